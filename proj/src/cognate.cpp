#include "cogforge/cognate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"

namespace cogforge::cognate {

ScoreMatrix::ScoreMatrix(double match, double mismatch) : match_(match), mismatch_(mismatch) {
  index_.fill(-1);
}

int ScoreMatrix::add_symbol(char c) {
  auto slot = static_cast<unsigned char>(c) & 0x7F;
  if (index_[slot] >= 0) return index_[slot];
  std::size_t k = size_ + 1;
  std::vector<double> cells(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      cells[i * k + j] = (i < size_ && j < size_) ? cells_[i * size_ + j] : (i == j ? match_ : mismatch_);
  cells_ = std::move(cells);
  size_ = k;
  alphabet_.push_back(c);
  index_[slot] = static_cast<int>(k - 1);
  return index_[slot];
}

void ScoreMatrix::set(char a, char b, double score) {
  int ia = add_symbol(a);
  int ib = add_symbol(b);
  cells_[static_cast<std::size_t>(ia) * size_ + static_cast<std::size_t>(ib)] = score;
  cells_[static_cast<std::size_t>(ib) * size_ + static_cast<std::size_t>(ia)] = score;
}

ScoringScheme::ScoringScheme(double match, double mismatch, double gap_open, double gap_extend)
    : matrix_(match, mismatch), gap_open_(gap_open), gap_extend_(gap_extend) {}

ScoringScheme ScoringScheme::unit() { return ScoringScheme(1.0, -1.0, -1.0, -1.0); }

ScoringScheme ScoringScheme::standard() { return ScoringScheme(1.0, -1.0, -1.0, -0.5); }

void ScoreMatrix::set_directed(char a, char b, double score) {
  int ia = add_symbol(a);
  int ib = add_symbol(b);
  cells_[static_cast<std::size_t>(ia) * size_ + static_cast<std::size_t>(ib)] = score;
}

void ScoringScheme::set_pair(char a, char b, double score) { matrix_.set(a, b, score); }

void ScoringScheme::validate() const {
  if (!(gap_open_ < 0.0) || !(gap_extend_ < 0.0)) throw UsageError("gap penalties must be negative");
  double min_identity = matrix_.match();
  double max_mismatch = matrix_.mismatch();
  for (char a : matrix_.alphabet()) {
    min_identity = std::min(min_identity, matrix_(a, a));
    for (char b : matrix_.alphabet())
      if (a != b) max_mismatch = std::max(max_mismatch, matrix_(a, b));
  }
  if (!(min_identity > max_mismatch))
    throw UsageError("scoring scheme: identity scores must exceed every mismatch score");
}

ScoringScheme ScoringScheme::parse(std::string_view csv, const std::string& source) {
  auto lines = text_io::lines(csv);
  if (lines.empty() || text_io::trim(lines[0]) != "a,b,score")
    throw ParseError(source, 1, "expected header 'a,b,score'");
  double match = 1.0, mismatch = -1.0, gap_open = -1.0, gap_extend = -0.5;
  std::vector<std::tuple<char, char, double>> pairs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = text_io::trim(lines[i]);
    if (line.empty() || line.front() == '%') continue;
    auto f = text_io::split(line, ',');
    if (f.size() != 3) throw ParseError(source, i + 1, "expected 3 fields");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(source, i + 1, "score is not a number");
    }
    std::string a(text_io::trim(f[0])), b(text_io::trim(f[1]));
    if (b.empty()) {
      if (a == "MATCH") match = value;
      else if (a == "MISMATCH") mismatch = value;
      else if (a == "GAP_OPEN") gap_open = value;
      else if (a == "GAP_EXTEND") gap_extend = value;
      else throw ParseError(source, i + 1, "unknown parameter '" + a + "'");
      continue;
    }
    if (a.size() != 1 || b.size() != 1) throw ParseError(source, i + 1, "class labels must be single characters");
    pairs.emplace_back(a[0], b[0], value);
  }
  ScoringScheme scheme(match, mismatch, gap_open, gap_extend);
  for (auto [a, b, v] : pairs) scheme.set_pair(a, b, v);
  scheme.validate();
  return scheme;
}

ScoringScheme ScoringScheme::load(const std::filesystem::path& path) {
  return parse(text_io::read_file(path), path.string());
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum State : unsigned char { kMatch = 0, kGapA = 1, kGapB = 2 };

// Index of the largest value; earlier entries win ties.
inline State best_of(double m, double ga, double gb, double& out) {
  State s = kMatch;
  out = m;
  if (ga > out) {
    out = ga;
    s = kGapA;
  }
  if (gb > out) {
    out = gb;
    s = kGapB;
  }
  return s;
}

}  // namespace

Alignment align(std::string_view a, std::string_view b, const ScoreMatrix& scores, double gap_open,
                double gap_extend) {
  if (a.empty() || b.empty()) throw DataError("cannot align an empty sequence");
  const std::size_t n = a.size(), m = b.size(), w = m + 1;
  // M: a_i aligned to b_j. GA: gap in a (b_j against '-'). GB: gap in b.
  std::vector<double> M((n + 1) * w, kNegInf), GA((n + 1) * w, kNegInf), GB((n + 1) * w, kNegInf);
  std::vector<State> pM((n + 1) * w, kMatch), pGA((n + 1) * w, kMatch), pGB((n + 1) * w, kMatch);
  M[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    GA[j] = gap_open + static_cast<double>(j - 1) * gap_extend;
    pGA[j] = j == 1 ? kMatch : kGapA;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    GB[i * w] = gap_open + static_cast<double>(i - 1) * gap_extend;
    pGB[i * w] = i == 1 ? kMatch : kGapB;
  }

  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t c = i * w + j, d = (i - 1) * w + (j - 1), l = i * w + (j - 1), u = (i - 1) * w + j;
      double v;
      pM[c] = best_of(M[d], GA[d], GB[d], v);
      M[c] = v + scores(a[i - 1], b[j - 1]);
      pGA[c] = best_of(M[l] + gap_open, GA[l] + gap_extend, GB[l] + gap_open, v);
      GA[c] = v;
      pGB[c] = best_of(M[u] + gap_open, GA[u] + gap_open, GB[u] + gap_extend, v);
      GB[c] = v;
    }
  }

  Alignment out;
  std::size_t end = n * w + m;
  State state = best_of(M[end], GA[end], GB[end], out.score);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    std::size_t c = i * w + j;
    switch (state) {
      case kMatch:
        out.top.push_back(a[i - 1]);
        out.bottom.push_back(b[j - 1]);
        state = pM[c];
        --i;
        --j;
        break;
      case kGapA:
        out.top.push_back('-');
        out.bottom.push_back(b[j - 1]);
        state = pGA[c];
        --j;
        break;
      case kGapB:
        out.top.push_back(a[i - 1]);
        out.bottom.push_back('-');
        state = pGB[c];
        --i;
        break;
    }
  }
  std::reverse(out.top.begin(), out.top.end());
  std::reverse(out.bottom.begin(), out.bottom.end());
  return out;
}

Alignment align(std::string_view a, std::string_view b, const ScoringScheme& scheme) {
  return align(a, b, scheme.matrix(), scheme.gap_open(), scheme.gap_extend());
}

double normalized_distance(std::string_view a, std::string_view b, const ScoreMatrix& scores,
                           double gap_open, double gap_extend) {
  if (a == b) return 0.0;
  double ab = align(a, b, scores, gap_open, gap_extend).score;
  double aa = align(a, a, scores, gap_open, gap_extend).score;
  double bb = align(b, b, scores, gap_open, gap_extend).score;
  double denom = aa + bb;
  if (!(denom > 0.0)) return 1.0;
  return std::clamp(1.0 - 2.0 * ab / denom, 0.0, 1.0);
}

double sca_distance(std::string_view a, std::string_view b, const ScoringScheme& scheme) {
  return normalized_distance(a, b, scheme.matrix(), scheme.gap_open(), scheme.gap_extend());
}

const LexStatScorer::PairTable* LexStatScorer::table(std::string_view l1, std::string_view l2) const {
  std::pair<std::string, std::string> key{std::string(std::min(l1, l2)), std::string(std::max(l1, l2))};
  auto it = tables_.find(key);
  return it == tables_.end() ? nullptr : &it->second;
}

double LexStatScorer::log_odds(std::string_view l1, std::string_view l2, char x, char y) const {
  const PairTable* t = table(l1, l2);
  if (!t) return 0.0;
  return l1 <= l2 ? t->log_odds(x, y) : t->log_odds(y, x);
}

bool LexStatScorer::is_fallback(std::string_view l1, std::string_view l2) const {
  const PairTable* t = table(l1, l2);
  return !t || t->fallback;
}

std::vector<std::pair<std::string, std::string>> LexStatScorer::fallback_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, t] : tables_)
    if (t.fallback) out.push_back(key);
  return out;
}

double LexStatScorer::distance(std::string_view l1, std::string_view a, std::string_view l2,
                               std::string_view b) const {
  const PairTable* t = l1 == l2 ? nullptr : table(l1, l2);
  if (!t || t->fallback) return sca_distance(a, b, scheme_);
  if (l1 > l2) {
    std::swap(l1, l2);
    std::swap(a, b);
  }
  return normalized_distance(a, b, t->combined, scheme_.gap_open(), scheme_.gap_extend());
}

std::vector<ClassSequence> row_classes(const Wordlist& wordlist, const ipa::SoundClassTable& table) {
  std::vector<ClassSequence> out;
  std::vector<std::string> missing;
  out.reserve(wordlist.size());
  for (const WordRow& r : wordlist.rows()) {
    if (!r.tokens || r.tokens->empty()) {
      missing.push_back(std::to_string(r.row_id));
      out.emplace_back();
      continue;
    }
    out.push_back(ipa::to_sound_classes(*r.tokens, table, false));
  }
  if (!missing.empty()) throw DataError("rows without tokens: " + text_io::join(missing, ", "));
  return out;
}

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  // Rejection sampling keeps the draw uniform and independent of the
  // standard library's distribution implementation.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

void count_pairs(std::string_view a, std::string_view b, const ScoringScheme& scheme,
                 std::map<std::pair<char, char>, double>& counts) {
  Alignment al = align(a, b, scheme);
  for (std::size_t k = 0; k < al.top.size(); ++k)
    if (al.top[k] != '-' && al.bottom[k] != '-') counts[{al.top[k], al.bottom[k]}] += 1.0;
}

}  // namespace

LexStatScorer build_lexstat_scorer(const Wordlist& wordlist, const std::vector<ClassSequence>& classes,
                                   const ScoringScheme& scheme, const LexStatOptions& options) {
  if (options.runs == 0) throw UsageError("LexStat needs at least one permutation run");
  if (!(options.smoothing > 0.0)) throw UsageError("LexStat smoothing must be positive");
  if (classes.size() != wordlist.size()) throw UsageError("class sequences do not match the wordlist");

  // doculect -> concept -> classes (first row wins when synonyms exist)
  std::map<std::string, std::map<std::string, const ClassSequence*>> words;
  for (std::size_t i = 0; i < wordlist.size(); ++i) {
    const WordRow& r = wordlist.rows()[i];
    words[r.doculect].try_emplace(r.meaning, &classes[i]);
  }
  std::vector<std::string> doculects;
  for (const auto& [d, _] : words) doculects.push_back(d);

  LexStatScorer scorer(scheme, options);
  const double w = options.weight, s = options.smoothing;
  for (std::size_t i = 0; i < doculects.size(); ++i) {
    for (std::size_t j = i + 1; j < doculects.size(); ++j) {
      const auto& wa = words[doculects[i]];
      const auto& wb = words[doculects[j]];
      std::vector<const ClassSequence*> xs, ys;
      for (const std::string& meaning : wordlist.concepts()) {
        auto ia = wa.find(meaning), ib = wb.find(meaning);
        if (ia == wa.end() || ib == wb.end()) continue;
        if (ia->second->empty() || ib->second->empty()) continue;
        xs.push_back(ia->second);
        ys.push_back(ib->second);
      }

      LexStatScorer::PairTable table;
      table.combined = ScoreMatrix((1.0 - w) * scheme.match(), (1.0 - w) * scheme.mismatch());
      if (xs.size() < 2) {
        table.fallback = true;
        table.combined = scheme.matrix();
        scorer.tables().emplace(std::make_pair(doculects[i], doculects[j]), std::move(table));
        continue;
      }

      for (std::size_t k = 0; k < xs.size(); ++k) count_pairs(*xs[k], *ys[k], scheme, table.attested);

      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      std::vector<std::size_t> perm(ys.size());
      std::map<std::pair<char, char>, double> shuffled;
      for (std::size_t run = 0; run < options.runs; ++run) {
        for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
        for (std::size_t k = perm.size() - 1; k > 0; --k) std::swap(perm[k], perm[bounded(rng, k + 1)]);
        for (std::size_t k = 0; k < xs.size(); ++k) count_pairs(*xs[k], *ys[perm[k]], scheme, shuffled);
      }
      for (auto& [key, v] : shuffled) table.expected[key] = v / static_cast<double>(options.runs);

      std::string alphabet = scheme.matrix().alphabet();
      for (const auto& [key, _] : table.attested) alphabet += {key.first, key.second};
      for (const auto& [key, _] : table.expected) alphabet += {key.first, key.second};
      std::sort(alphabet.begin(), alphabet.end());
      alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());

      ScoreMatrix log_odds(0.0, 0.0);
      auto get = [](const std::map<std::pair<char, char>, double>& m, char p, char q) {
        auto it = m.find({p, q});
        return it == m.end() ? 0.0 : it->second;
      };
      // Rows are classes of doculect i, columns classes of doculect j.
      for (char x : alphabet) {
        for (char y : alphabet) {
          double lo = std::log2((get(table.attested, x, y) + s) / (get(table.expected, x, y) + s));
          log_odds.set_directed(x, y, lo);
          table.combined.set_directed(x, y, w * lo + (1.0 - w) * scheme.score(x, y));
        }
      }
      table.log_odds = std::move(log_odds);
      scorer.tables().emplace(std::make_pair(doculects[i], doculects[j]), std::move(table));
    }
  }
  return scorer;
}

LexStatScorer build_lexstat_scorer(const Wordlist& wordlist, const ipa::SoundClassTable& table,
                                   const ScoringScheme& scheme, const LexStatOptions& options) {
  return build_lexstat_scorer(wordlist, row_classes(wordlist, table), scheme, options);
}

Method parse_method(std::string_view name) {
  if (name == "sca") return Method::sca;
  if (name == "lexstat") return Method::lexstat;
  throw UsageError("clustering method must be sca or lexstat");
}

std::string_view method_name(Method m) { return m == Method::sca ? "sca" : "lexstat"; }

double ClusterParams::effective_threshold() const {
  if (threshold) return *threshold;
  return method == Method::sca ? 0.45 : 0.60;
}

void ClusterParams::validate() const {
  double t = effective_threshold();
  if (!(t > 0.0 && t <= 1.0)) throw UsageError("threshold must lie in (0, 1]");
  scheme.validate();
  if (method == Method::lexstat && lexstat.runs == 0) throw UsageError("LexStat needs at least one permutation run");
}

std::vector<int> cluster_concept(const std::vector<ClusterItem>& items, const ClusterParams& params,
                                 const LexStatScorer* scorer) {
  const std::size_t n = items.size();
  if (n == 0) return {};
  if (params.method == Method::lexstat && !scorer) throw UsageError("LexStat clustering needs a scorer");

  // Canonical per-item keys make merge order independent of row order.
  std::vector<std::string> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = items[i].doculect + '\x1f' + items[i].classes;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t p = keys[i] <= keys[j] ? i : j, q = p == i ? j : i;
      double d = params.method == Method::sca
                     ? sca_distance(items[p].classes, items[q].classes, params.scheme)
                     : scorer->distance(items[p].doculect, items[p].classes, items[q].doculect, items[q].classes);
      dist[i * n + j] = dist[j * n + i] = d;
    }
  }

  struct Cluster {
    std::vector<std::size_t> members;  // sorted by key
    bool active = true;
  };
  std::vector<Cluster> clusters(n);
  for (std::size_t i = 0; i < n; ++i) clusters[i].members = {i};

  auto linkage = [&](const Cluster& a, const Cluster& b) {
    double sum = 0.0;
    for (std::size_t x : a.members)
      for (std::size_t y : b.members) sum += dist[x * n + y];
    return sum / static_cast<double>(a.members.size() * b.members.size());
  };
  std::vector<double> link(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) link[i * n + j] = dist[i * n + j];

  const double threshold = params.effective_threshold();
  while (true) {
    std::size_t bi = n, bj = n;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clusters[i].active) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!clusters[j].active) continue;
        double d = link[i * n + j];
        bool better = bi == n || d < best;
        if (!better && d == best) {
          auto lo = [&](std::size_t c) { return keys[clusters[c].members.front()]; };
          auto cur = std::minmax(lo(bi), lo(bj));
          auto cand = std::minmax(lo(i), lo(j));
          better = cand < cur;
        }
        if (better) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n || best > threshold) break;
    auto& target = clusters[bi].members;
    target.insert(target.end(), clusters[bj].members.begin(), clusters[bj].members.end());
    std::sort(target.begin(), target.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });
    clusters[bj].active = false;
    clusters[bj].members.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (!clusters[k].active || k == bi) continue;
      double d = linkage(clusters[bi], clusters[k]);
      link[bi * n + k] = link[k * n + bi] = d;
    }
  }

  std::vector<int> owner(n, -1);
  for (std::size_t c = 0; c < n; ++c)
    if (clusters[c].active)
      for (std::size_t m : clusters[c].members) owner[m] = static_cast<int>(c);
  std::vector<int> local(n, 0);
  std::map<int, int> renumber;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = renumber.try_emplace(owner[i], static_cast<int>(renumber.size()) + 1);
    local[i] = it->second;
  }
  return local;
}

Wordlist assign_cognates(const Wordlist& wordlist, const ClusterParams& params,
                         const ipa::SoundClassTable& table) {
  params.validate();
  std::vector<ClassSequence> classes = row_classes(wordlist, table);
  std::optional<LexStatScorer> scorer;
  if (params.method == Method::lexstat)
    scorer.emplace(build_lexstat_scorer(wordlist, classes, params.scheme, params.lexstat));

  std::vector<std::int64_t> cogids(wordlist.size(), 0);
  std::int64_t next = 1;
  for (const std::string& meaning : wordlist.concepts()) {
    std::vector<std::size_t> idx = wordlist.rows_for_concept(meaning);
    std::vector<ClusterItem> items;
    items.reserve(idx.size());
    for (std::size_t i : idx) items.push_back({wordlist.rows()[i].doculect, classes[i]});
    std::vector<int> local = cluster_concept(items, params, scorer ? &*scorer : nullptr);
    int max_local = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      cogids[idx[k]] = next + local[k] - 1;
      max_local = std::max(max_local, local[k]);
    }
    next += max_local;
  }

  Wordlist out(wordlist.allow_synonyms());
  for (std::size_t i = 0; i < wordlist.size(); ++i) {
    WordRow row = wordlist.rows()[i];
    row.cogid = cogids[i];
    out.add(std::move(row));
  }
  return out;
}

BCubed bcubed(const std::vector<std::int64_t>& reference, const std::vector<std::int64_t>& predicted) {
  if (reference.size() != predicted.size()) throw UsageError("B-cubed labellings differ in length");
  const std::size_t n = reference.size();
  if (n == 0) return {1.0, 1.0, 1.0};
  double p = 0.0, r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t both = 0, same_pred = 0, same_ref = 0;
    for (std::size_t j = 0; j < n; ++j) {
      bool sp = predicted[j] == predicted[i], sr = reference[j] == reference[i];
      same_pred += sp;
      same_ref += sr;
      both += sp && sr;
    }
    p += static_cast<double>(both) / static_cast<double>(same_pred);
    r += static_cast<double>(both) / static_cast<double>(same_ref);
  }
  p /= static_cast<double>(n);
  r /= static_cast<double>(n);
  return {p, r, (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0};
}

}  // namespace cogforge::cognate
