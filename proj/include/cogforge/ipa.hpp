#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogforge::ipa {

/// One segment: a base letter (or tie-bar-joined letters) with its
/// diacritics, modifiers and length marks, NFC-encoded.
using IpaToken = std::string;

struct TokenizeOptions {
  bool strict = false;
  bool merge_diphthongs = false;
};

/// Stress marks, syllable dots, whitespace, tone letters and intonation
/// arrows. These never end up inside a token.
bool is_discardable(char32_t cp);
bool is_tie_bar(char32_t cp);
bool is_length_mark(char32_t cp);
/// Combining diacritics and spacing modifier letters (tie bars excluded).
bool is_attaching(char32_t cp);
/// Member of the bundled IPA letter inventory (what strict mode accepts).
bool is_ipa_letter(char32_t cp);
bool is_ipa_vowel(char32_t cp);
/// The bundled letter inventory in code point order.
const std::vector<char32_t>& ipa_letters();

/// Splits an IPA string into segments. Strict mode rejects characters outside
/// the inventory as well as orphaned diacritics and dangling tie bars; lenient
/// mode keeps any such character as a segment of its own.
std::vector<IpaToken> tokenize(std::string_view ipa, const TokenizeOptions& options = {});

/// The part of a token used for class lookup: NFD with combining marks,
/// modifiers, length marks and tie bars removed.
std::u32string base_symbol(std::string_view token);

/// Maps IPA base symbols to sound-class labels. Multi-letter keys (affricates
/// such as "ts") are allowed and tried before the first base letter.
class SoundClassTable {
 public:
  SoundClassTable() = default;
  explicit SoundClassTable(std::map<std::u32string, char> entries);

  static SoundClassTable parse(std::string_view csv, const std::string& source = "<sound classes>");
  static SoundClassTable load(const std::filesystem::path& path);
  /// The Dolgopolsky table shipped in the data directory.
  static SoundClassTable load_default();

  std::optional<char> lookup(std::string_view token) const;
  const std::map<std::u32string, char>& entries() const { return entries_; }

 private:
  std::map<std::u32string, char> entries_;
};

/// One label per token. Unmappable tokens throw in strict mode and become '?'
/// otherwise.
std::string to_sound_classes(const std::vector<IpaToken>& tokens, const SoundClassTable& table,
                             bool strict = true);

std::filesystem::path default_data_dir();

}  // namespace cogforge::ipa
