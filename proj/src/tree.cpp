#include "cogforge/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"

namespace cogforge::tree {
namespace {

std::optional<double> add_lengths(std::optional<double> a, std::optional<double> b) {
  if (!a && !b) return std::nullopt;
  return a.value_or(0.0) + b.value_or(0.0);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Undirected neighbor lists with the length of each edge.
struct Adjacency {
  std::vector<std::vector<std::pair<int, std::optional<double>>>> edges;

  explicit Adjacency(const Tree& t) : edges(t.size()) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      int p = t.nodes()[i].parent;
      if (p < 0) continue;
      edges[i].emplace_back(p, t.nodes()[i].length);
      edges[static_cast<std::size_t>(p)].emplace_back(static_cast<int>(i), t.nodes()[i].length);
    }
  }
};

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  Tree parse() {
    int root = subtree(-1);
    skip();
    if (pos_ >= text_.size()) fail("missing ';'");
    if (text_[pos_] == ')') fail("unbalanced parentheses");
    if (text_[pos_] != ';') fail(std::string("unexpected '") + text_[pos_] + "'");
    ++pos_;
    skip();
    if (pos_ != text_.size()) fail("trailing garbage after ';'");
    return Tree(std::move(nodes_), root);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError("<newick>", pos_, what); }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '[') {
        auto end = text_.find(']', pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 1;
      } else {
        break;
      }
    }
  }

  std::string label() {
    skip();
    std::string out;
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated quoted label");
        char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            out.push_back('\'');
            ++pos_;
          } else {
            break;
          }
        } else {
          out.push_back(c);
        }
      }
      return out;
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::string_view("(),:;[]' \t\r\n").find(c) != std::string_view::npos) break;
      out.push_back(c);
      ++pos_;
    }
    return out;
  }

  std::optional<double> length() {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ':') return std::nullopt;
    ++pos_;
    skip();
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc() || !std::isfinite(v)) fail("bad branch length");
    if (v < 0) fail("negative branch length");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  int subtree(int parent) {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_.back().parent = parent;
    if (text_[pos_] == '(') {
      ++pos_;
      while (true) {
        int child = subtree(id);
        nodes_[static_cast<std::size_t>(id)].children.push_back(child);
        skip();
        if (pos_ >= text_.size()) fail("unbalanced parentheses");
        if (text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail(std::string("expected ',' or ')' but found '") + text_[pos_] + "'");
      }
      std::string l = label();
      nodes_[static_cast<std::size_t>(id)].label = std::move(l);
    } else {
      std::size_t start = pos_;
      std::string l = label();
      if (l.empty()) fail("unlabeled leaf");
      if (!leaves_.insert(l).second) {
        pos_ = start;
        fail("duplicate leaf label '" + l + "'");
      }
      nodes_[static_cast<std::size_t>(id)].label = std::move(l);
    }
    nodes_[static_cast<std::size_t>(id)].length = length();
    return id;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
  std::set<std::string> leaves_;
};

std::string quote_label(const std::string& label) {
  if (label.find_first_of("()[]':;, \t\r\n") == std::string::npos) return label;
  std::string out = "'";
  for (char c : label) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  return out + "'";
}

void write_subtree(const Tree& t, int i, std::string& out) {
  const Node& n = t.node(i);
  if (!n.is_leaf()) {
    out.push_back('(');
    for (std::size_t k = 0; k < n.children.size(); ++k) {
      if (k) out.push_back(',');
      write_subtree(t, n.children[k], out);
    }
    out.push_back(')');
  }
  out += quote_label(n.label);
  if (n.length) out += ":" + format_double(*n.length);
}

}  // namespace

Tree::Tree(std::vector<Node> nodes, int root) {
  if (nodes.empty()) throw DataError("empty tree");
  if (root < 0 || static_cast<std::size_t>(root) >= nodes.size()) throw DataError("root index out of range");
  std::vector<char> seen(nodes.size(), 0);
  auto mark = [&](int i) {
    if (i < 0 || static_cast<std::size_t>(i) >= nodes.size()) throw DataError("child index out of range");
    if (seen[static_cast<std::size_t>(i)]) throw DataError("node reachable twice");
    seen[static_cast<std::size_t>(i)] = 1;
  };

  std::vector<Node> out;
  out.reserve(nodes.size());
  auto build = [&](auto& self, int i, int parent) -> int {
    mark(i);
    std::optional<double> len = nodes[static_cast<std::size_t>(i)].length;
    int cur = i;
    while (nodes[static_cast<std::size_t>(cur)].children.size() == 1) {
      int c = nodes[static_cast<std::size_t>(cur)].children[0];
      mark(c);
      len = add_lengths(len, nodes[static_cast<std::size_t>(c)].length);
      cur = c;
    }
    int id = static_cast<int>(out.size());
    out.push_back({nodes[static_cast<std::size_t>(cur)].label, len, parent, {}});
    for (int c : nodes[static_cast<std::size_t>(cur)].children) {
      int k = self(self, c, id);
      out[static_cast<std::size_t>(id)].children.push_back(k);
    }
    return id;
  };
  build(build, root, -1);

  std::set<std::string> labels;
  for (const Node& n : out) {
    if (!n.is_leaf()) continue;
    if (n.label.empty()) throw DataError("unlabeled leaf");
    if (!labels.insert(n.label).second) throw DataError("duplicate leaf label '" + n.label + "'");
    if (n.length && *n.length < 0) throw DataError("negative branch length above " + n.label);
  }
  nodes_ = std::move(out);
  root_ = 0;
}

std::vector<std::string> Tree::leaf_labels() const {
  std::vector<std::string> out;
  for (const Node& n : nodes_)
    if (n.is_leaf()) out.push_back(n.label);
  return out;
}

std::set<std::string> Tree::leaf_set() const {
  auto l = leaf_labels();
  return {l.begin(), l.end()};
}

std::size_t Tree::n_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::optional<int> Tree::find_leaf(std::string_view label) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf() && nodes_[i].label == label) return static_cast<int>(i);
  return std::nullopt;
}

Tree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

Tree load_newick(const std::filesystem::path& path) {
  try {
    return parse_newick(text_io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.position(), e.detail());
  }
}

std::string to_newick(const Tree& tree) {
  if (tree.empty()) throw DataError("empty tree");
  std::string out;
  write_subtree(tree, tree.root(), out);
  return out + ";";
}

void write_newick(const Tree& tree, const std::filesystem::path& path) {
  text_io::write_file(path, to_newick(tree) + "\n");
}

Tree prune_to(const Tree& tree, const std::set<std::string>& keep) {
  std::set<std::string> leaves = tree.leaf_set();
  for (const auto& l : keep)
    if (!leaves.count(l)) throw DataError("cannot keep '" + l + "': not a leaf of the tree");
  if (keep.empty()) throw DataError("pruning would remove every leaf");

  std::vector<Node> nodes = tree.nodes();
  std::vector<char> kept(nodes.size(), 0);
  // Preorder numbering puts children after their parent.
  for (std::size_t i = nodes.size(); i-- > 0;) {
    if (nodes[i].is_leaf()) {
      kept[i] = keep.count(nodes[i].label) > 0;
    } else {
      std::vector<int> children;
      for (int c : nodes[i].children)
        if (kept[static_cast<std::size_t>(c)]) children.push_back(c);
      kept[i] = !children.empty();
      nodes[i].children = std::move(children);
    }
  }
  return Tree(std::move(nodes), tree.root());
}

Tree contract_edge(const Tree& tree, int node) {
  if (node < 0 || static_cast<std::size_t>(node) >= tree.size()) throw DataError("node index out of range");
  const Node& n = tree.node(node);
  if (n.is_leaf() || n.parent < 0) throw DataError("only edges above internal non-root nodes can be contracted");
  std::vector<Node> nodes = tree.nodes();
  auto& siblings = nodes[static_cast<std::size_t>(n.parent)].children;
  auto it = std::find(siblings.begin(), siblings.end(), node);
  it = siblings.erase(it);
  siblings.insert(it, n.children.begin(), n.children.end());
  return Tree(std::move(nodes), tree.root());
}

Tree reroot(const Tree& tree, int node) {
  if (node < 0 || static_cast<std::size_t>(node) >= tree.size()) throw DataError("node index out of range");
  if (tree.node(node).is_leaf()) throw DataError("cannot hang a tree from a leaf");
  Adjacency adj(tree);
  std::vector<Node> nodes(tree.size());
  std::vector<char> seen(tree.size(), 0);
  std::deque<int> queue{node};
  seen[static_cast<std::size_t>(node)] = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    nodes[static_cast<std::size_t>(u)].label = tree.node(u).label;
    for (const auto& [v, len] : adj.edges[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      nodes[static_cast<std::size_t>(v)].length = len;
      nodes[static_cast<std::size_t>(u)].children.push_back(v);
      queue.push_back(v);
    }
  }
  return Tree(std::move(nodes), node);
}

std::string_view quartet_name(Quartet q) {
  switch (q) {
    case Quartet::ab_cd: return "AB|CD";
    case Quartet::ac_bd: return "AC|BD";
    case Quartet::ad_bc: return "AD|BC";
    case Quartet::star: return "STAR";
  }
  return "?";
}

LeafDistances::LeafDistances(const Tree& tree) {
  labels_ = tree.leaf_labels();
  std::sort(labels_.begin(), labels_.end());
  const std::size_t n = labels_.size();
  d_.assign(n * n, 0);
  Adjacency adj(tree);
  std::vector<int> dist(tree.size());
  for (std::size_t i = 0; i < n; ++i) {
    int start = *tree.find_leaf(labels_[i]);
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(start)] = 0;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const auto& e : adj.edges[static_cast<std::size_t>(u)]) {
        auto v = static_cast<std::size_t>(e.first);
        if (dist[v] >= 0) continue;
        dist[v] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(e.first);
      }
    }
    for (std::size_t j = 0; j < n; ++j) d_[i * n + j] = dist[static_cast<std::size_t>(*tree.find_leaf(labels_[j]))];
  }
}

std::optional<std::size_t> LeafDistances::index(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

Quartet quartet_topology(const LeafDistances& d, std::size_t a, std::size_t b, std::size_t c, std::size_t e) {
  int s1 = d(a, b) + d(c, e);
  int s2 = d(a, c) + d(b, e);
  int s3 = d(a, e) + d(b, c);
  if (s1 < s2 && s1 < s3) return Quartet::ab_cd;
  if (s2 < s1 && s2 < s3) return Quartet::ac_bd;
  if (s3 < s1 && s3 < s2) return Quartet::ad_bc;
  return Quartet::star;
}

Quartet quartet_topology(const Tree& tree, const std::array<std::string, 4>& labels) {
  LeafDistances d(tree);
  std::array<std::size_t, 4> idx{};
  for (std::size_t k = 0; k < 4; ++k) {
    auto i = d.index(labels[k]);
    if (!i) throw DataError("unknown leaf '" + labels[k] + "'");
    idx[k] = *i;
  }
  if (std::set<std::size_t>(idx.begin(), idx.end()).size() != 4) throw DataError("quartet labels must be distinct");
  return quartet_topology(d, idx[0], idx[1], idx[2], idx[3]);
}

StarPolicy parse_star_policy(std::string_view name) {
  if (name == "exclude") return StarPolicy::exclude;
  if (name == "contradict") return StarPolicy::contradict;
  throw UsageError("unknown star policy '" + std::string(name) + "' (expected exclude or contradict)");
}

GqdResult gq_distance(const Tree& inferred, const Tree& gold, StarPolicy policy) {
  std::set<std::string> li = inferred.leaf_set(), lg = gold.leaf_set();
  if (li != lg) {
    std::string msg = "leaf sets differ;";
    std::string only_i, only_g;
    for (const auto& l : li)
      if (!lg.count(l)) only_i += " " + l;
    for (const auto& l : lg)
      if (!li.count(l)) only_g += " " + l;
    if (!only_i.empty()) msg += " only in inferred:" + only_i + ";";
    if (!only_g.empty()) msg += " only in gold:" + only_g + ";";
    msg.pop_back();
    throw DataError(msg);
  }
  const std::size_t n = lg.size();
  if (n < 4) throw DataError("quartet distance needs at least four leaves");

  // Both matrices index leaves by sorted label, so indices agree.
  LeafDistances dg(gold), di(inferred);
  GqdResult r;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t e = c + 1; e < n; ++e) {
          ++r.quartets;
          Quartet tg = quartet_topology(dg, a, b, c, e);
          if (tg == Quartet::star) continue;
          ++r.resolved;
          Quartet ti = quartet_topology(di, a, b, c, e);
          if (ti == Quartet::star ? policy == StarPolicy::contradict : ti != tg) ++r.contradicted;
        }
  if (r.resolved == 0) throw DataError("gold tree fully unresolved");
  return r;
}

std::string DistanceMatrix::to_tsv() const {
  std::string out;
  for (const auto& l : labels) out += "\t" + l;
  out += "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out += labels[i];
    for (std::size_t j = 0; j < size(); ++j) out += "\t" + format_double((*this)(i, j));
    out += "\n";
  }
  return out;
}

DistanceMatrix hamming_matrix(const matrix::CharacterMatrix& m) {
  if (m.n_taxa() < 2) throw DataError("distance matrix needs at least two taxa");
  DistanceMatrix d(m.taxa());
  for (std::size_t i = 0; i < m.n_taxa(); ++i) {
    for (std::size_t j = i + 1; j < m.n_taxa(); ++j) {
      std::size_t comparable = 0, mismatches = 0;
      for (std::size_t c = 0; c < m.n_columns(); ++c) {
        auto x = m.at(i, c), y = m.at(j, c);
        if (x == matrix::Cell::missing || y == matrix::Cell::missing) continue;
        ++comparable;
        mismatches += x != y;
      }
      if (comparable == 0)
        throw DataError("taxa " + m.taxa()[i] + " and " + m.taxa()[j] + " share no comparable sites");
      d.set(i, j, static_cast<double>(mismatches) / static_cast<double>(comparable));
    }
  }
  return d;
}

DistanceMatrix patristic_distances(const Tree& tree) {
  std::vector<std::string> labels = tree.leaf_labels();
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (tree.nodes()[i].parent >= 0 && !tree.nodes()[i].length)
      throw DataError("branch above node " + std::to_string(i) + " has no length");
  Adjacency adj(tree);
  DistanceMatrix d(labels);
  std::vector<double> dist(tree.size());
  std::vector<char> seen(tree.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int start = *tree.find_leaf(labels[i]);
    std::fill(seen.begin(), seen.end(), 0);
    dist[static_cast<std::size_t>(start)] = 0.0;
    seen[static_cast<std::size_t>(start)] = 1;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const auto& [v, len] : adj.edges[static_cast<std::size_t>(u)]) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        seen[static_cast<std::size_t>(v)] = 1;
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + *len;
        queue.push_back(v);
      }
    }
    for (std::size_t j = 0; j < labels.size(); ++j)
      d.at(i, j) = dist[static_cast<std::size_t>(*tree.find_leaf(labels[j]))];
  }
  return d;
}

Tree nj_tree(const DistanceMatrix& distances) {
  const std::size_t n = distances.size();
  if (n < 3) throw DataError("neighbor joining needs at least three taxa");
  if (distances.values.size() != n * n) throw DataError("distance matrix has the wrong number of cells");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances(i, i) != 0.0) throw DataError("nonzero diagonal for " + distances.labels[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      double a = distances(i, j), b = distances(j, i);
      if (!std::isfinite(a) || a < 0) throw DataError("invalid distance between " + distances.labels[i] + " and " + distances.labels[j]);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw DataError("asymmetric distance matrix at (" + distances.labels[i] + ", " + distances.labels[j] + ")");
    }
  }

  std::vector<Node> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].label = distances.labels[i];
  std::vector<int> active(n);
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < n; ++j) d[i][j] = distances(i, j);
  }

  while (active.size() > 3) {
    const std::size_t r = active.size();
    std::vector<double> sums(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) sums[i] += d[i][j];
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = i + 1; j < r; ++j) {
        double q = static_cast<double>(r - 2) * d[i][j] - sums[i] - sums[j];
        if (q < best) {
          best = q;
          bi = i;
          bj = j;
        }
      }
    double li = 0.5 * d[bi][bj] + (sums[bi] - sums[bj]) / (2.0 * static_cast<double>(r - 2));
    double lj = d[bi][bj] - li;
    int u = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes.back().children = {active[bi], active[bj]};
    nodes[static_cast<std::size_t>(active[bi])].length = std::max(0.0, li);
    nodes[static_cast<std::size_t>(active[bj])].length = std::max(0.0, lj);

    std::vector<double> du(r);
    for (std::size_t k = 0; k < r; ++k) du[k] = 0.5 * (d[bi][k] + d[bj][k] - d[bi][bj]);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < r; ++k)
      if (k != bi && k != bj) keep.push_back(k);
    std::vector<std::vector<double>> next(keep.size() + 1, std::vector<double>(keep.size() + 1, 0.0));
    std::vector<int> next_active;
    for (std::size_t x = 0; x < keep.size(); ++x) {
      next_active.push_back(active[keep[x]]);
      for (std::size_t y = 0; y < keep.size(); ++y) next[x][y] = d[keep[x]][keep[y]];
      next[x][keep.size()] = next[keep.size()][x] = du[keep[x]];
    }
    next_active.push_back(u);
    d = std::move(next);
    active = std::move(next_active);
  }

  int center = static_cast<int>(nodes.size());
  nodes.push_back({});
  nodes.back().children = {active[0], active[1], active[2]};
  nodes[static_cast<std::size_t>(active[0])].length = std::max(0.0, 0.5 * (d[0][1] + d[0][2] - d[1][2]));
  nodes[static_cast<std::size_t>(active[1])].length = std::max(0.0, 0.5 * (d[0][1] + d[1][2] - d[0][2]));
  nodes[static_cast<std::size_t>(active[2])].length = std::max(0.0, 0.5 * (d[0][2] + d[1][2] - d[0][1]));
  return Tree(std::move(nodes), center);
}

}  // namespace cogforge::tree
