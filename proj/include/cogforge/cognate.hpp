#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogforge/corpus.hpp"
#include "cogforge/ipa.hpp"

namespace cogforge::cognate {

/// A word as a string of one-character sound-class labels, e.g. "TVM".
using ClassSequence = std::string;

/// Score lookup over one-character class labels. Labels never set
/// explicitly score `match` against themselves and `mismatch` otherwise.
class ScoreMatrix {
 public:
  explicit ScoreMatrix(double match = 1.0, double mismatch = -1.0);
  double operator()(char a, char b) const {
    int ia = index_[static_cast<unsigned char>(a) & 0x7F];
    int ib = index_[static_cast<unsigned char>(b) & 0x7F];
    if (ia < 0 || ib < 0) return a == b ? match_ : mismatch_;
    return cells_[static_cast<std::size_t>(ia) * size_ + static_cast<std::size_t>(ib)];
  }
  /// Sets both (a,b) and (b,a).
  void set(char a, char b, double score);
  /// Sets (a,b) only; for tables where the row label comes from one language
  /// and the column label from another.
  void set_directed(char a, char b, double score);
  /// Labels with explicit entries, in insertion order.
  const std::string& alphabet() const { return alphabet_; }
  double match() const { return match_; }
  double mismatch() const { return mismatch_; }

 private:
  int add_symbol(char c);

  std::array<int, 128> index_;
  std::string alphabet_;
  std::vector<double> cells_;
  std::size_t size_ = 0;
  double match_;
  double mismatch_;
};

class ScoringScheme {
 public:
  ScoringScheme(double match, double mismatch, double gap_open, double gap_extend);

  /// match 1, mismatch -1, linear gaps of -1.
  static ScoringScheme unit();
  /// match 1, mismatch -1, gap open -1, gap extend -0.5.
  static ScoringScheme standard();
  /// CSV `a,b,score` with optional MATCH/MISMATCH/GAP_OPEN/GAP_EXTEND rows
  /// (second field empty).
  static ScoringScheme parse(std::string_view csv, const std::string& source = "<scoring scheme>");
  static ScoringScheme load(const std::filesystem::path& path);

  void set_pair(char a, char b, double score);
  double score(char a, char b) const { return matrix_(a, b); }
  const ScoreMatrix& matrix() const { return matrix_; }
  double gap_open() const { return gap_open_; }
  double gap_extend() const { return gap_extend_; }
  double match() const { return matrix_.match(); }
  double mismatch() const { return matrix_.mismatch(); }

  /// Gaps negative; every identity score above every mismatch score.
  void validate() const;

 private:
  ScoreMatrix matrix_;
  double gap_open_;
  double gap_extend_;
};

struct Alignment {
  std::string top;     // a with '-' for gaps
  std::string bottom;  // b with '-' for gaps
  double score = 0.0;
};

/// Optimal global alignment with affine gaps (a gap run of length k costs
/// gap_open + (k-1) * gap_extend). Traceback prefers match, then a gap in
/// `a`, then a gap in `b`.
Alignment align(std::string_view a, std::string_view b, const ScoringScheme& scheme);
Alignment align(std::string_view a, std::string_view b, const ScoreMatrix& scores, double gap_open,
                double gap_extend);

/// 1 - 2 S(a,b) / (S(a,a) + S(b,b)), clamped to [0,1].
double sca_distance(std::string_view a, std::string_view b, const ScoringScheme& scheme);
double normalized_distance(std::string_view a, std::string_view b, const ScoreMatrix& scores,
                           double gap_open, double gap_extend);

struct LexStatOptions {
  std::size_t runs = 1000;
  std::uint64_t seed = 42;
  double smoothing = 0.5;
  /// Weight of the log-odds table against the plain scheme when aligning.
  double weight = 2.0 / 3.0;
};

/// Language-pair specific sound-class log-odds, from attested alignments of
/// same-concept words against alignments under shuffled concept assignment.
class LexStatScorer {
 public:
  struct PairTable {
    std::map<std::pair<char, char>, double> attested;
    std::map<std::pair<char, char>, double> expected;
    ScoreMatrix log_odds{0.0, 0.0};
    ScoreMatrix combined{0.0, 0.0};
    bool fallback = false;
  };

  LexStatScorer(ScoringScheme scheme, LexStatOptions options) : scheme_(std::move(scheme)), options_(options) {}

  const ScoringScheme& scheme() const { return scheme_; }
  const LexStatOptions& options() const { return options_; }
  /// Table with rows indexed by classes of the lexicographically smaller doculect.
  const PairTable* table(std::string_view l1, std::string_view l2) const;
  /// log2((attested + s) / (expected + s)) for class x in l1 against y in l2.
  double log_odds(std::string_view l1, std::string_view l2, char x, char y) const;
  bool is_fallback(std::string_view l1, std::string_view l2) const;
  std::vector<std::pair<std::string, std::string>> fallback_pairs() const;
  double distance(std::string_view l1, std::string_view a, std::string_view l2, std::string_view b) const;

  std::map<std::pair<std::string, std::string>, PairTable>& tables() { return tables_; }
  const std::map<std::pair<std::string, std::string>, PairTable>& tables() const { return tables_; }

 private:
  ScoringScheme scheme_;
  LexStatOptions options_;
  std::map<std::pair<std::string, std::string>, PairTable> tables_;
};

/// Class sequences for every row (lenient lookup, '?' for unknown tokens).
/// Throws DataError listing row ids that have no tokens.
std::vector<ClassSequence> row_classes(const Wordlist& wordlist, const ipa::SoundClassTable& table);

LexStatScorer build_lexstat_scorer(const Wordlist& wordlist, const std::vector<ClassSequence>& classes,
                                   const ScoringScheme& scheme, const LexStatOptions& options);
LexStatScorer build_lexstat_scorer(const Wordlist& wordlist, const ipa::SoundClassTable& table,
                                   const ScoringScheme& scheme, const LexStatOptions& options);

enum class Method { sca, lexstat };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

struct ClusterParams {
  Method method = Method::sca;
  std::optional<double> threshold;  // default: 0.45 (sca) / 0.60 (lexstat)
  LexStatOptions lexstat;
  ScoringScheme scheme = ScoringScheme::standard();

  double effective_threshold() const;
  void validate() const;
};

struct ClusterItem {
  std::string doculect;
  ClassSequence classes;
};

/// Pairwise distances, then average-linkage merging while the closest pair
/// of clusters is within the threshold. Returns 1-based local class ids in
/// order of first appearance.
std::vector<int> cluster_concept(const std::vector<ClusterItem>& items, const ClusterParams& params,
                                 const LexStatScorer* scorer = nullptr);

/// Fills COGID for every row. Ids are consecutive integers, concept by
/// concept in wordlist order, so two concepts never share an id.
Wordlist assign_cognates(const Wordlist& wordlist, const ClusterParams& params,
                         const ipa::SoundClassTable& table);

struct BCubed {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// B-cubed scores of a predicted labelling against a reference labelling
/// over the same items.
BCubed bcubed(const std::vector<std::int64_t>& reference, const std::vector<std::int64_t>& predicted);

}  // namespace cogforge::cognate
