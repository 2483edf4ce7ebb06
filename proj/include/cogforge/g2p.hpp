#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Table-driven grapheme-to-phoneme transduction: ordered context rewrite
// rules around a greedy leftmost-longest grapheme map.
namespace cogforge::g2p {

/// `from -> to / left _ right`. A leading '#' in `left` or a trailing '#' in
/// `right` anchors the context at a word boundary. Strings are NFC code points.
struct RewriteRule {
  std::u32string from;
  std::u32string to;
  std::u32string left;
  std::u32string right;
  bool left_boundary = false;
  bool right_boundary = false;
};

RewriteRule parse_rule(std::string_view text);

enum class UnknownPolicy { strict, pass_through, drop };

UnknownPolicy parse_unknown_policy(std::string_view name);

class Ruleset {
 public:
  struct Entry {
    std::u32string grapheme;
    std::u32string phoneme;
  };

  Ruleset() = default;
  /// Entries are re-sorted longest grapheme first; duplicate or empty
  /// graphemes throw DataError.
  Ruleset(std::string name, std::vector<Entry> entries, std::vector<RewriteRule> pre = {},
          std::vector<RewriteRule> post = {});

  const std::string& name() const { return name_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<RewriteRule>& pre_rules() const { return pre_; }
  const std::vector<RewriteRule>& post_rules() const { return post_; }
  std::size_t max_phoneme_length() const { return max_phoneme_; }

 private:
  std::string name_;
  std::vector<Entry> entries_;
  std::vector<RewriteRule> pre_;
  std::vector<RewriteRule> post_;
  std::size_t max_phoneme_ = 0;
};

Ruleset parse_ruleset(std::string name, std::string_view map_csv, std::string_view pre_rules = {},
                      std::string_view post_rules = {});
Ruleset compile_ruleset(const std::filesystem::path& map_path,
                        const std::optional<std::filesystem::path>& pre_path = std::nullopt,
                        const std::optional<std::filesystem::path>& post_path = std::nullopt);

struct Transcription {
  std::string ipa;
  std::size_t unmapped = 0;  // characters with no grapheme entry
};

/// Lowercases and NFC-normalizes `word`, applies pre-rules, the grapheme map,
/// then post-rules. Whitespace is copied through and acts as a word boundary.
Transcription transcribe(const Ruleset& ruleset, std::string_view word,
                         UnknownPolicy policy = UnknownPolicy::pass_through);

/// First ruleset that covers every character wins; otherwise the one with the
/// fewest unmapped characters (earlier ruleset on ties).
Transcription backoff_transcribe(const std::vector<Ruleset>& rulesets, std::string_view word,
                                 UnknownPolicy policy = UnknownPolicy::pass_through);

/// Loads `<code>.csv` (+ optional `<code>.pre`, `<code>.post`) and backoff
/// variants `<code>.<script>.csv` from a directory. The plain file comes first
/// in each list, the variants follow in filename order.
std::map<std::string, std::vector<Ruleset>> load_ruleset_dir(const std::filesystem::path& dir);

}  // namespace cogforge::g2p
