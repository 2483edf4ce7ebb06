#include "cogforge/ipa.hpp"

#include <algorithm>
#include <cstdlib>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/unicode.hpp"

namespace cogforge::ipa {
namespace {

std::vector<char32_t> build_inventory() {
  std::vector<char32_t> v;
  for (char32_t c = U'a'; c <= U'z'; ++c) v.push_back(c);
  for (char32_t c : {U'æ', U'ç', U'ð', U'ø', U'ħ', U'ŋ', U'œ', U'ǀ', U'ǁ', U'ǂ', U'ǃ'}) v.push_back(c);
  for (char32_t c = 0x0250; c <= 0x02AF; ++c) v.push_back(c);
  for (char32_t c : {U'β', U'θ', U'χ', U'ᵻ', U'ᵿ', U'ⱱ'}) v.push_back(c);
  std::sort(v.begin(), v.end());
  return v;
}

const std::u32string kVowels =
    U"aeiouyæøœɐɑɒɔɘəɚɛɜɝɞɤɨɩɪɯɵɶɷɿʅʉʊʌʏʚʮʯᵻᵿ";

}  // namespace

const std::vector<char32_t>& ipa_letters() {
  static const std::vector<char32_t> inventory = build_inventory();
  return inventory;
}

bool is_ipa_letter(char32_t cp) {
  const auto& inv = ipa_letters();
  return std::binary_search(inv.begin(), inv.end(), cp);
}

bool is_ipa_vowel(char32_t cp) { return kVowels.find(cp) != std::u32string::npos; }

bool is_discardable(char32_t cp) {
  switch (cp) {
    case 0x02C8:  // ˈ primary stress
    case 0x02CC:  // ˌ secondary stress
    case U'.':    // syllable break
    case 0x2016:  // ‖ major group
    case 0x203F:  // ‿ linking
    case 0x2197:  // ↗ global rise
    case 0x2198:  // ↘ global fall
    case 0xA71B:  // ꜛ upstep
    case 0xA71C:  // ꜜ downstep
      return true;
    default:
      break;
  }
  if (cp >= 0x02E5 && cp <= 0x02E9) return true;  // tone letters
  return unicode::is_whitespace(cp);
}

bool is_tie_bar(char32_t cp) { return cp == 0x0361 || cp == 0x035C; }

bool is_length_mark(char32_t cp) { return cp == 0x02D0 || cp == 0x02D1; }

bool is_attaching(char32_t cp) {
  if (is_tie_bar(cp) || is_discardable(cp)) return false;
  if (is_length_mark(cp)) return true;
  return unicode::is_combining_mark(cp) || unicode::is_modifier_letter(cp);
}

std::vector<IpaToken> tokenize(std::string_view ipa, const TokenizeOptions& options) {
  std::u32string text = unicode::to_u32(unicode::nfd(ipa));
  std::vector<std::u32string> tokens;
  bool joining = false;

  auto fail = [&](std::size_t offset, const std::string& why) {
    throw DataError("cannot tokenize '" + std::string(ipa) + "': " + why + " " +
                    unicode::describe(text[offset]) + " at offset " + std::to_string(offset));
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char32_t c = text[i];
    if (is_discardable(c)) continue;
    if (is_tie_bar(c)) {
      if (tokens.empty()) {
        if (options.strict) fail(i, "tie bar without preceding letter");
        tokens.emplace_back(1, c);
      } else {
        tokens.back().push_back(c);
      }
      joining = true;
      continue;
    }
    if (is_attaching(c)) {
      if (tokens.empty()) {
        if (options.strict) fail(i, "diacritic without base letter");
        tokens.emplace_back(1, c);
      } else {
        tokens.back().push_back(c);
      }
      continue;
    }
    bool letter = options.strict ? is_ipa_letter(c) : unicode::is_letter(c);
    if (!letter && options.strict) fail(i, "symbol outside the IPA inventory");
    if (letter && joining && !tokens.empty())
      tokens.back().push_back(c);
    else
      tokens.emplace_back(1, c);
    joining = false;
  }
  if (joining && options.strict) throw DataError("cannot tokenize '" + std::string(ipa) + "': dangling tie bar");

  if (options.merge_diphthongs) {
    std::vector<std::u32string> merged;
    for (auto& t : tokens) {
      if (!merged.empty() && is_ipa_vowel(t.front()) && is_ipa_vowel(merged.back().front()))
        merged.back() += t;
      else
        merged.push_back(std::move(t));
    }
    tokens = std::move(merged);
  }

  std::vector<IpaToken> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(unicode::nfc(unicode::to_utf8(t)));
  return out;
}

std::u32string base_symbol(std::string_view token) {
  std::u32string base;
  for (char32_t c : unicode::to_u32(unicode::nfd(token)))
    if (!is_attaching(c) && !is_tie_bar(c) && !is_discardable(c)) base.push_back(c);
  return base;
}

SoundClassTable::SoundClassTable(std::map<std::u32string, char> entries) : entries_(std::move(entries)) {}

SoundClassTable SoundClassTable::parse(std::string_view csv, const std::string& source) {
  auto lines = text_io::lines(csv);
  std::size_t header = 0;
  while (header < lines.size() && (lines[header].empty() || lines[header].front() == '%')) ++header;
  if (header == lines.size() || text_io::trim(lines[header]) != "symbol,class")
    throw ParseError(source, header + 1, "expected header 'symbol,class'");
  std::map<std::u32string, char> entries;
  for (std::size_t i = header + 1; i < lines.size(); ++i) {
    std::string_view line = text_io::trim(lines[i]);
    if (line.empty() || line.front() == '%') continue;
    auto f = text_io::split(line, ',');
    if (f.size() != 2) throw ParseError(source, i + 1, "expected 'symbol,class'");
    std::string_view label = text_io::trim(f[1]);
    if (label.size() != 1) throw ParseError(source, i + 1, "class label must be one character");
    std::u32string symbol = unicode::to_u32(unicode::nfd(text_io::trim(f[0])));
    if (symbol.empty()) throw ParseError(source, i + 1, "empty symbol");
    if (!entries.emplace(symbol, label.front()).second)
      throw ParseError(source, i + 1, "duplicate symbol '" + std::string(text_io::trim(f[0])) + "'");
  }
  return SoundClassTable(std::move(entries));
}

SoundClassTable SoundClassTable::load(const std::filesystem::path& path) {
  return parse(text_io::read_file(path), path.string());
}

SoundClassTable SoundClassTable::load_default() { return load(default_data_dir() / "dolgo.csv"); }

std::optional<char> SoundClassTable::lookup(std::string_view token) const {
  std::u32string base = base_symbol(token);
  if (base.empty()) return std::nullopt;
  if (auto it = entries_.find(base); it != entries_.end()) return it->second;
  if (auto it = entries_.find(base.substr(0, 1)); it != entries_.end()) return it->second;
  return std::nullopt;
}

std::string to_sound_classes(const std::vector<IpaToken>& tokens, const SoundClassTable& table,
                             bool strict) {
  std::string out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto label = table.lookup(t);
    if (!label) {
      if (strict) throw DataError("no sound class for token '" + t + "'");
      out.push_back('?');
    } else {
      out.push_back(*label);
    }
  }
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("COGFORGE_DATA_DIR")) return env;
  return COGFORGE_DATA_DIR;
}

}  // namespace cogforge::ipa
