#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Shared domain types: languages, synsets, and the wordlist table that every
// pipeline stage reads and writes.
namespace cogforge {

bool is_valid_iso(std::string_view code);
bool is_valid_glottocode(std::string_view code);

struct LanguageRef {
  std::string iso;
  std::optional<std::string> glottocode;

  /// Throws DataError if either code is malformed.
  void validate() const;
  auto operator<=>(const LanguageRef&) const = default;
};

struct Sense {
  LanguageRef lang;
  std::string lemma;
  bool is_main = false;
  bool is_key = false;
  std::optional<std::string> ipa;
};

enum class SynsetKind { lexical, entity };

struct Synset {
  std::string id;
  SynsetKind kind = SynsetKind::lexical;
  std::vector<Sense> senses;

  /// Main sense for an ISO code, or nullptr.
  const Sense* main_sense(std::string_view iso) const;
  /// Main sense for a resolved glottocode, or nullptr.
  const Sense* main_sense_for_glottocode(std::string_view glottocode) const;
};

/// Immutable, id-indexed collection of synsets. Construction enforces the
/// per-synset invariants (unique ids, non-empty lemmas, at most one main sense
/// per language).
class SynsetStore {
 public:
  SynsetStore() = default;
  explicit SynsetStore(std::vector<Synset> synsets);

  const std::vector<Synset>& synsets() const { return synsets_; }
  const Synset* find(std::string_view id) const;
  std::size_t size() const { return synsets_.size(); }
  bool empty() const { return synsets_.empty(); }

  /// ISO codes of all sense languages.
  const std::set<std::string>& languages() const { return languages_; }
  /// Glottocodes of all resolved sense languages.
  std::set<std::string> glottocodes() const;

 private:
  std::vector<Synset> synsets_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::set<std::string> languages_;
};

// ISO -> glottocodes, each list in ascending priority order.
using LanguageMap = std::map<std::string, std::vector<std::string>, std::less<>>;

LanguageMap parse_language_map(std::string_view csv, const std::string& source = "<language map>");
LanguageMap load_language_map(const std::filesystem::path& path);
std::optional<std::string> resolve_language(std::string_view iso, const LanguageMap& map);

/// Fills in glottocodes from the map and drops senses whose ISO code does not
/// resolve. Synsets left without senses are kept (they may still be entities
/// that a later filter removes).
SynsetStore resolve_store(const SynsetStore& store, const LanguageMap& map);

SynsetStore parse_synset_dump(std::string_view jsonl, const std::string& source = "<synset dump>");
SynsetStore load_synset_dump(const std::filesystem::path& path);
std::string serialize_synset_dump(const SynsetStore& store);

struct WordRow {
  std::int64_t row_id = 0;
  std::string doculect;
  std::string meaning;
  std::string form;
  std::optional<std::string> ipa;
  std::optional<std::vector<std::string>> tokens;
  std::optional<std::int64_t> cogid;

  bool operator==(const WordRow&) const = default;
};

/// The pipeline's central table. Rows keep insertion order; doculects and
/// concepts are kept in order of first appearance.
class Wordlist {
 public:
  explicit Wordlist(bool allow_synonyms = false) : allow_synonyms_(allow_synonyms) {}
  explicit Wordlist(std::vector<WordRow> rows, bool allow_synonyms = false);

  /// Validates and appends; throws DataError naming the row id on violation.
  void add(WordRow row);

  const std::vector<WordRow>& rows() const { return rows_; }
  const std::vector<std::string>& doculects() const { return doculects_; }
  const std::vector<std::string>& concepts() const { return concepts_; }
  bool allow_synonyms() const { return allow_synonyms_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  /// Row indices for one concept, in row order.
  std::vector<std::size_t> rows_for_concept(std::string_view meaning) const;
  bool has(std::string_view doculect, std::string_view meaning) const;

 private:
  bool allow_synonyms_ = false;
  std::vector<WordRow> rows_;
  std::vector<std::string> doculects_;
  std::vector<std::string> concepts_;
  std::set<std::string, std::less<>> doculect_set_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> concept_rows_;
  std::set<std::pair<std::string, std::string>> pairs_;
  std::set<std::int64_t> ids_;
};

Wordlist parse_wordlist(std::string_view tsv, const std::string& source = "<wordlist>",
                        bool allow_synonyms = false);
Wordlist load_wordlist(const std::filesystem::path& path, bool allow_synonyms = false);
std::string format_wordlist(const Wordlist& wordlist);
void write_wordlist(const Wordlist& wordlist, const std::filesystem::path& path);

}  // namespace cogforge
