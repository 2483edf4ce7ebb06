#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

using cogforge::WordRow;
using cogforge::Wordlist;
using cogforge::tree::Node;
using cogforge::tree::Tree;

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(COGFORGE_FIXTURES) / name; }

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::path(COGFORGE_SCRATCH) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::size_t uniform(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double enumerate_alignment_score(const std::string& a, const std::string& b, double match, double mismatch,
                                 double gap_open, double gap_extend) {
  double best = -std::numeric_limits<double>::infinity();
  // state: 0 = pair, 1 = gap in a (consumes b), 2 = gap in b (consumes a)
  std::function<void(std::size_t, std::size_t, int, double)> walk = [&](std::size_t i, std::size_t j, int state,
                                                                        double score) {
    if (i == a.size() && j == b.size()) {
      best = std::max(best, score);
      return;
    }
    if (i < a.size() && j < b.size()) walk(i + 1, j + 1, 0, score + (a[i] == b[j] ? match : mismatch));
    if (j < b.size()) walk(i, j + 1, 1, score + (state == 1 ? gap_extend : gap_open));
    if (i < a.size()) walk(i + 1, j, 2, score + (state == 2 ? gap_extend : gap_open));
  };
  walk(0, 0, 0, 0.0);
  return best;
}

std::vector<std::set<std::string>> clades(const Tree& tree) {
  std::vector<std::set<std::string>> below(tree.size());
  // Children sit after their parent in storage order, so walk backwards.
  for (int i = static_cast<int>(tree.size()) - 1; i >= 0; --i) {
    const Node& n = tree.node(i);
    if (n.is_leaf()) below[i].insert(n.label);
    for (int c : n.children) below[i].insert(below[c].begin(), below[c].end());
  }
  std::vector<std::set<std::string>> out;
  for (int i = 0; i < static_cast<int>(tree.size()); ++i)
    if (i != tree.root()) out.push_back(below[i]);
  return out;
}

int restricted_quartet(const std::vector<std::set<std::string>>& clades, const std::string& a, const std::string& b,
                       const std::string& c, const std::string& d) {
  for (const auto& cl : clades) {
    bool ia = cl.count(a), ib = cl.count(b), ic = cl.count(c), id = cl.count(d);
    if (ia + ib + ic + id != 2) continue;
    if ((ia && ib) || (ic && id)) return 0;
    if ((ia && ic) || (ib && id)) return 1;
    return 2;
  }
  return 3;
}

QuartetCounts brute_force_gqd(const Tree& inferred, const Tree& gold, bool star_contradicts) {
  auto set = gold.leaf_set();
  std::vector<std::string> l(set.begin(), set.end());
  auto cg = clades(gold), ci = clades(inferred);
  QuartetCounts r;
  const std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t m = k + 1; m < n; ++m) {
          ++r.quartets;
          int g = restricted_quartet(cg, l[i], l[j], l[k], l[m]);
          if (g == 3) continue;
          ++r.resolved;
          int t = restricted_quartet(ci, l[i], l[j], l[k], l[m]);
          if (t == 3 ? star_contradicts : t != g) ++r.contradicted;
        }
  return r;
}

std::vector<std::string> leaf_names(std::size_t n, const std::string& prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Tree random_binary_tree(Rng& rng, const std::vector<std::string>& labels, bool lengths) {
  std::vector<Node> nodes(3);
  nodes[0].children = {1, 2};
  nodes[1].label = labels.at(0);
  nodes[1].parent = 0;
  nodes[2].label = labels.at(1);
  nodes[2].parent = 0;
  for (std::size_t k = 2; k < labels.size(); ++k) {
    int v = 1 + static_cast<int>(uniform(rng, nodes.size() - 1));
    int p = nodes[v].parent;
    int w = static_cast<int>(nodes.size());
    int leaf = w + 1;
    nodes.push_back({});
    nodes.push_back({});
    std::replace(nodes[p].children.begin(), nodes[p].children.end(), v, w);
    nodes[w].parent = p;
    nodes[w].children = {v, leaf};
    nodes[v].parent = w;
    nodes[leaf].label = labels[k];
    nodes[leaf].parent = w;
  }
  if (lengths)
    for (std::size_t i = 1; i < nodes.size(); ++i) nodes[i].length = uniform_real(rng, 0.1, 1.0);
  return Tree(std::move(nodes), 0);
}

Tree random_contractions(Rng& rng, Tree tree, std::size_t count) {
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<int> internal;
    for (int i = 0; i < static_cast<int>(tree.size()); ++i)
      if (i != tree.root() && !tree.node(i).is_leaf()) internal.push_back(i);
    if (internal.empty()) break;
    tree = cogforge::tree::contract_edge(tree, internal[uniform(rng, internal.size())]);
  }
  return tree;
}

Tree shuffle_children(Rng& rng, const Tree& tree) {
  std::vector<Node> nodes = tree.nodes();
  for (auto& n : nodes) std::shuffle(n.children.begin(), n.children.end(), rng);
  return Tree(std::move(nodes), tree.root());
}

double path_length(const Tree& tree, int a, int b) {
  std::map<int, double> up;
  double d = 0.0;
  for (int v = a; v != -1; v = tree.node(v).parent) {
    up[v] = d;
    d += tree.node(v).length.value_or(1.0);
  }
  d = 0.0;
  for (int v = b; v != -1; v = tree.node(v).parent) {
    if (up.count(v)) return d + up[v];
    d += tree.node(v).length.value_or(1.0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Wordlist random_cognate_wordlist(Rng& rng, std::size_t languages, std::size_t concepts, double fill) {
  Wordlist wl;
  std::int64_t id = 1;
  for (std::size_t c = 0; c < concepts; ++c) {
    std::size_t classes = 1 + uniform(rng, 3);
    for (std::size_t l = 0; l < languages; ++l) {
      if (uniform_real(rng, 0.0, 1.0) >= fill) continue;
      WordRow r;
      r.row_id = id++;
      r.doculect = "L" + std::to_string(l);
      r.meaning = "c" + std::to_string(c);
      r.form = "x";
      r.cogid = static_cast<std::int64_t>(c * 10 + uniform(rng, classes));
      wl.add(std::move(r));
    }
  }
  return wl;
}

std::u32string leftmost_longest(const std::map<std::u32string, std::u32string>& map, const std::u32string& word) {
  std::size_t longest = 0;
  for (const auto& [k, _] : map) longest = std::max(longest, k.size());
  std::u32string out;
  std::size_t i = 0;
  while (i < word.size()) {
    bool hit = false;
    for (std::size_t len = std::min(longest, word.size() - i); len > 0 && !hit; --len) {
      auto it = map.find(word.substr(i, len));
      if (it == map.end()) continue;
      out += it->second;
      i += len;
      hit = true;
    }
    if (!hit) out += word[i++];
  }
  return out;
}

BCubedScores bcubed(const std::vector<std::int64_t>& reference, const std::vector<std::int64_t>& predicted) {
  const std::size_t n = reference.size();
  double p = 0.0, r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double both = 0, same_pred = 0, same_ref = 0;
    for (std::size_t j = 0; j < n; ++j) {
      bool sp = predicted[j] == predicted[i], sr = reference[j] == reference[i];
      both += sp && sr;
      same_pred += sp;
      same_ref += sr;
    }
    p += both / same_pred;
    r += both / same_ref;
  }
  p /= static_cast<double>(n);
  r /= static_cast<double>(n);
  return {p, r, 2.0 * p * r / (p + r)};
}

bool same_partition(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

namespace {

const std::string kConsonants = "ptkmnsrwjh";
const std::string kVowels = "aeiou";

// Dolgopolsky class of the letters used by the synthetic data.
char letter_class(char c) {
  switch (c) {
    case 'p': return 'P';
    case 't': return 'T';
    case 'k': return 'K';
    case 'm': return 'M';
    case 'n': return 'N';
    case 's': return 'S';
    case 'r': return 'R';
    case 'w': return 'W';
    case 'j': return 'J';
    case 'h': return 'H';
    default: return 'V';
  }
}

std::string random_word(Rng& rng) {
  std::string w;
  for (int k = 0; k < 3; ++k) {
    w += kConsonants[uniform(rng, kConsonants.size())];
    w += kVowels[uniform(rng, kVowels.size())];
  }
  return w;
}

// Class-level Hamming share between equal-length words.
double class_difference(const std::string& a, const std::string& b) {
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += letter_class(a[i]) != letter_class(b[i]);
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

}  // namespace

EvolvedData evolve_wordlist(Rng& rng, std::size_t leaves) {
  EvolvedData out;
  out.tree = random_binary_tree(rng, leaf_names(leaves, "lang"), false);
  out.alphabet = kConsonants + kVowels;
  const Tree& t = out.tree;

  std::vector<std::set<std::string>> below(t.size());
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
    if (t.node(i).is_leaf()) below[i].insert(t.node(i).label);
    for (int c : t.node(i).children) below[i].insert(below[c].begin(), below[c].end());
  }
  auto labels = t.leaf_labels();
  std::sort(labels.begin(), labels.end());

  std::int64_t row = 1, cogid = 1;
  std::size_t concept_no = 0;
  std::vector<WordRow> rows;
  for (int e = 0; e < static_cast<int>(t.size()); ++e) {
    if (e == t.root()) continue;
    std::size_t on_edge = 1 + uniform(rng, 3);
    for (std::size_t k = 0; k < on_edge; ++k) {
      std::string inside = random_word(rng), outside = random_word(rng);
      // Consonant classes must all differ so the two words never cluster.
      while (class_difference(inside, outside) < 0.5) outside = random_word(rng);
      std::string meaning = "m" + std::to_string(concept_no++);
      for (const auto& l : labels) {
        bool in = below[e].count(l);
        WordRow r;
        r.row_id = row++;
        r.doculect = l;
        r.meaning = meaning;
        r.form = in ? inside : outside;
        r.ipa = r.form;
        std::vector<std::string> tokens;
        for (char c : r.form) tokens.emplace_back(1, c);
        r.tokens = tokens;
        r.cogid = cogid + (in ? 0 : 1);
        rows.push_back(std::move(r));
      }
      cogid += 2;
    }
  }
  // Doculect-major order, as real wordlists usually come.
  std::stable_sort(rows.begin(), rows.end(), [](const WordRow& a, const WordRow& b) { return a.doculect < b.doculect; });
  for (auto& r : rows) out.wordlist.add(std::move(r));
  return out;
}

std::map<std::string, std::vector<cogforge::g2p::Ruleset>> substitution_rulesets(
    Rng& rng, const std::vector<std::string>& doculects, const std::string& alphabet, double rate) {
  std::map<std::string, std::vector<cogforge::g2p::Ruleset>> out;
  const auto n_sub = static_cast<std::size_t>(std::lround(rate * static_cast<double>(alphabet.size())));
  for (const auto& d : doculects) {
    std::vector<std::size_t> order(alphabet.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<cogforge::g2p::Ruleset::Entry> entries;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
      char from = alphabet[i], to = from;
      if (std::find(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_sub), i) !=
          order.begin() + static_cast<std::ptrdiff_t>(n_sub)) {
        std::string other;
        for (char c : alphabet)
          if (letter_class(c) != letter_class(from)) other += c;
        to = other[uniform(rng, other.size())];
      }
      entries.push_back({std::u32string(1, static_cast<char32_t>(from)), std::u32string(1, static_cast<char32_t>(to))});
    }
    out[d].emplace_back(d, std::move(entries));
  }
  return out;
}

}  // namespace oracle
