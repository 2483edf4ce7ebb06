#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cogforge/matrix.hpp"

namespace cogforge::tree {

struct Node {
  std::string label;
  std::optional<double> length;  // branch to the parent
  int parent = -1;
  std::vector<int> children;
  bool is_leaf() const { return children.empty(); }
};

/// Rooted storage, but every metric here treats the tree as unrooted.
/// Construction normalizes: nodes are renumbered in preorder, parent links
/// are rebuilt from the child lists, and nodes with a single child are
/// merged into that child (lengths add up).
class Tree {
 public:
  Tree() = default;
  Tree(std::vector<Node> nodes, int root);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Leaf labels in preorder.
  std::vector<std::string> leaf_labels() const;
  std::set<std::string> leaf_set() const;
  std::size_t n_leaves() const;
  std::optional<int> find_leaf(std::string_view label) const;

 private:
  std::vector<Node> nodes_;
  int root_ = -1;
};

Tree parse_newick(std::string_view text);
Tree load_newick(const std::filesystem::path& path);
std::string to_newick(const Tree& tree);
void write_newick(const Tree& tree, const std::filesystem::path& path);

/// Keeps only the listed leaves. Every label must be a leaf of the tree.
Tree prune_to(const Tree& tree, const std::set<std::string>& keep);
/// Removes the edge above internal node `node`, attaching its children to
/// its parent.
Tree contract_edge(const Tree& tree, int node);
/// Same unrooted tree hung from internal node `node`.
Tree reroot(const Tree& tree, int node);

enum class Quartet { ab_cd, ac_bd, ad_bc, star };

std::string_view quartet_name(Quartet q);

/// Leaf-to-leaf path lengths counting every edge as 1, indexed by sorted
/// leaf label.
class LeafDistances {
 public:
  explicit LeafDistances(const Tree& tree);
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::optional<std::size_t> index(std::string_view label) const;
  int operator()(std::size_t i, std::size_t j) const { return d_[i * labels_.size() + j]; }

 private:
  std::vector<std::string> labels_;
  std::vector<int> d_;
};

/// Pairing with the strictly smallest sum of path lengths; STAR when the
/// minimum is shared.
Quartet quartet_topology(const LeafDistances& d, std::size_t a, std::size_t b, std::size_t c, std::size_t e);
Quartet quartet_topology(const Tree& tree, const std::array<std::string, 4>& labels);

enum class StarPolicy { exclude, contradict };

StarPolicy parse_star_policy(std::string_view name);

struct GqdResult {
  std::uint64_t quartets = 0;      // C(n,4)
  std::uint64_t resolved = 0;      // resolved in gold
  std::uint64_t contradicted = 0;  // resolved in gold, inferred disagrees
  double value() const { return static_cast<double>(contradicted) / static_cast<double>(resolved); }
};

/// Fraction of quartets resolved in `gold` that `inferred` contradicts.
GqdResult gq_distance(const Tree& inferred, const Tree& gold, StarPolicy policy = StarPolicy::exclude);

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major, labels.size()^2

  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::string> l)
      : labels(std::move(l)), values(labels.size() * labels.size(), 0.0) {}
  std::size_t size() const { return labels.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * labels.size() + j]; }
  void set(std::size_t i, std::size_t j, double v) { at(i, j) = v; at(j, i) = v; }
  std::string to_tsv() const;
};

/// Mismatches over sites where both rows are 0 or 1.
DistanceMatrix hamming_matrix(const matrix::CharacterMatrix& matrix);

/// Sums of branch lengths between leaves; every branch needs a length.
DistanceMatrix patristic_distances(const Tree& tree);

/// Neighbor joining. Ties on the selection criterion go to the smallest
/// (i, j); negative branch estimates are set to 0.
Tree nj_tree(const DistanceMatrix& distances);

}  // namespace cogforge::tree
