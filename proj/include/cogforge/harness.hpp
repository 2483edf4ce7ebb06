#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogforge/cognate.hpp"
#include "cogforge/corpus.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/ipa.hpp"
#include "cogforge/tree.hpp"

// Transcription error rates and the transcription/tokenization ablation.
namespace cogforge::harness {

/// Receives one human-readable warning.
using WarningSink = std::function<void(const std::string&)>;

struct TranscriptionPair {
  std::string glottocode;
  std::string reference;
  std::string candidate;
};

/// Share of pairs whose NFC forms differ.
double error_rate_exact(const std::vector<std::pair<std::string, std::string>>& pairs);

struct SoundClassErrors {
  std::size_t n = 0;
  std::size_t errors = 0;
  std::size_t untokenizable = 0;  // included in errors
  double rate() const { return static_cast<double>(errors) / static_cast<double>(n); }
};

/// Share of pairs whose sound-class strings differ after tokenizing both
/// sides. Pairs that fail to tokenize count as errors.
SoundClassErrors error_rate_soundclass(const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const ipa::TokenizeOptions& options, const ipa::SoundClassTable& table);

struct LanguageErrorRate {
  std::string glottocode;
  std::size_t n = 0;
  double e1 = 0.0;
  double e2 = 0.0;
  std::size_t untokenizable = 0;
  bool flagged() const { return e2 > e1; }
};

/// One row per glottocode, sorted by glottocode.
std::vector<LanguageErrorRate> error_rate_report(const std::vector<TranscriptionPair>& pairs,
                                                 const ipa::TokenizeOptions& options,
                                                 const ipa::SoundClassTable& table);
/// TSV with a header comment; `pretty` prints rates as percentages.
std::string format_error_report(const std::vector<LanguageErrorRate>& rows, bool pretty = false);

/// TSV `GLOTTOCODE REFERENCE CANDIDATE`.
std::vector<TranscriptionPair> parse_transcription_pairs(std::string_view tsv,
                                                         const std::string& source = "<pairs>");

struct TokenizationPair {
  std::string ipa;
  std::vector<std::string> reference;
};

/// Share of words whose token list differs from the reference.
double tokenization_error_rate(const std::vector<TokenizationPair>& pairs, const ipa::TokenizeOptions& options);

/// TSV `IPA TOKENS` with space-separated reference tokens.
std::vector<TokenizationPair> parse_tokenization_pairs(std::string_view tsv,
                                                       const std::string& source = "<tokenization pairs>");

enum class Variant { original, auto_token, auto_both };

std::string_view variant_name(Variant v);
const std::vector<Variant>& all_variants();

/// original keeps IPA and TOKENS; auto-token re-tokenizes the IPA; auto-both
/// transcribes FORM with the doculect's rulesets and tokenizes the result.
Wordlist build_variant(const Wordlist& wordlist, Variant variant,
                       const std::map<std::string, std::vector<g2p::Ruleset>>& rulesets,
                       const WarningSink& warn = {});

/// Cognate detection, binary encoding, Hamming distances and neighbor joining.
tree::Tree infer_tree(const Wordlist& wordlist, const cognate::ClusterParams& params,
                      const ipa::SoundClassTable& table);

struct AblationInput {
  Wordlist wordlist;
  std::map<std::string, std::vector<g2p::Ruleset>> rulesets;  // by doculect
  tree::Tree gold;
  cognate::ClusterParams cluster;
  ipa::SoundClassTable classes;
  /// Directory with `<variant>.nwk` files that replace the inferred trees.
  std::optional<std::filesystem::path> trees_dir;
  tree::StarPolicy star_policy = tree::StarPolicy::exclude;
};

struct AblationRow {
  Variant variant;
  std::size_t n_doculects = 0;
  tree::GqdResult gqd;
};

std::vector<AblationRow> ablate(const AblationInput& input, const WarningSink& warn = {});
std::string format_ablation(const std::vector<AblationRow>& rows);

}  // namespace cogforge::harness
