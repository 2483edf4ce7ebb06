#include "cogforge/g2p.hpp"

#include <algorithm>
#include <set>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/unicode.hpp"

namespace cogforge::g2p {
namespace {

std::u32string u32_nfc(std::string_view s) { return unicode::to_u32(unicode::nfc(s)); }

bool at_boundary(const std::u32string& s, std::ptrdiff_t pos) {
  return pos < 0 || pos >= static_cast<std::ptrdiff_t>(s.size()) ||
         unicode::is_whitespace(s[static_cast<std::size_t>(pos)]);
}

bool matches_at(const std::u32string& s, std::size_t pos, const std::u32string& needle) {
  return pos + needle.size() <= s.size() && s.compare(pos, needle.size(), needle) == 0;
}

bool rule_applies(const RewriteRule& r, const std::u32string& s, std::size_t i) {
  if (!matches_at(s, i, r.from)) return false;
  if (r.left.size() > i) return false;
  std::size_t lstart = i - r.left.size();
  if (!matches_at(s, lstart, r.left)) return false;
  if (r.left_boundary && !at_boundary(s, static_cast<std::ptrdiff_t>(lstart) - 1)) return false;
  std::size_t rstart = i + r.from.size();
  if (!matches_at(s, rstart, r.right)) return false;
  if (r.right_boundary && !at_boundary(s, static_cast<std::ptrdiff_t>(rstart + r.right.size())))
    return false;
  return true;
}

std::u32string apply_rule(const RewriteRule& r, const std::u32string& s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (rule_applies(r, s, i)) {
      out += r.to;
      i += r.from.size();
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::vector<RewriteRule> parse_rule_file(std::string_view text, const std::string& source) {
  std::vector<RewriteRule> rules;
  auto lines = text_io::lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text_io::trim(lines[i]);
    if (line.empty() || line.front() == '%') continue;
    try {
      rules.push_back(parse_rule(line));
    } catch (const DataError& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  return rules;
}

}  // namespace

RewriteRule parse_rule(std::string_view text) {
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos) throw DataError("rule without '->': " + std::string(text));
  RewriteRule rule;
  std::string_view lhs = text_io::trim(text.substr(0, arrow));
  std::string_view rest = text.substr(arrow + 2);
  std::string_view rhs = rest;
  std::string_view context;
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    rhs = rest.substr(0, slash);
    context = rest.substr(slash + 1);
  }
  rhs = text_io::trim(rhs);
  if (lhs.empty()) throw DataError("rule with empty left-hand side: " + std::string(text));
  rule.from = u32_nfc(lhs);
  if (rhs != "0") rule.to = u32_nfc(rhs);

  if (!context.empty()) {
    auto underscore = context.find('_');
    if (underscore == std::string_view::npos || context.find('_', underscore + 1) != std::string_view::npos)
      throw DataError("context needs exactly one '_': " + std::string(text));
    std::string_view left = text_io::trim(context.substr(0, underscore));
    std::string_view right = text_io::trim(context.substr(underscore + 1));
    if (!left.empty() && left.front() == '#') {
      rule.left_boundary = true;
      left.remove_prefix(1);
    }
    if (!right.empty() && right.back() == '#') {
      rule.right_boundary = true;
      right.remove_suffix(1);
    }
    if (left.find('#') != std::string_view::npos || right.find('#') != std::string_view::npos)
      throw DataError("'#' only allowed at the outer edge of a context: " + std::string(text));
    rule.left = u32_nfc(left);
    rule.right = u32_nfc(right);
  }
  return rule;
}

UnknownPolicy parse_unknown_policy(std::string_view name) {
  if (name == "strict") return UnknownPolicy::strict;
  if (name == "pass-through" || name == "pass_through") return UnknownPolicy::pass_through;
  if (name == "drop") return UnknownPolicy::drop;
  throw UsageError("unknown-character policy must be strict, pass-through or drop");
}

Ruleset::Ruleset(std::string name, std::vector<Entry> entries, std::vector<RewriteRule> pre,
                 std::vector<RewriteRule> post)
    : name_(std::move(name)), entries_(std::move(entries)), pre_(std::move(pre)), post_(std::move(post)) {
  std::set<std::u32string> keys;
  for (const Entry& e : entries_) {
    if (e.grapheme.empty()) throw DataError(name_ + ": empty grapheme key");
    if (!keys.insert(e.grapheme).second)
      throw DataError(name_ + ": duplicate grapheme '" + unicode::to_utf8(e.grapheme) + "'");
    max_phoneme_ = std::max(max_phoneme_, e.phoneme.size());
  }
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.grapheme.size() != b.grapheme.size()) return a.grapheme.size() > b.grapheme.size();
    return a.grapheme < b.grapheme;
  });
}

Ruleset parse_ruleset(std::string name, std::string_view map_csv, std::string_view pre_rules,
                      std::string_view post_rules) {
  auto lines = text_io::lines(map_csv);
  if (lines.empty() || text_io::trim(lines[0]) != "orth,phon")
    throw ParseError(name, 1, "expected header 'orth,phon'");
  std::vector<Ruleset::Entry> entries;
  std::set<std::u32string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    auto comma = lines[i].find(',');
    if (comma == std::string::npos) throw ParseError(name, i + 1, "expected 'orth,phon'");
    // Only the first comma separates; the phoneme may be empty (deletion).
    std::u32string orth = u32_nfc(text_io::trim(std::string_view(lines[i]).substr(0, comma)));
    std::u32string phon = u32_nfc(text_io::trim(std::string_view(lines[i]).substr(comma + 1)));
    if (orth.empty()) throw ParseError(name, i + 1, "empty grapheme");
    if (!seen.insert(orth).second)
      throw ParseError(name, i + 1, "duplicate grapheme '" + unicode::to_utf8(orth) + "'");
    entries.push_back({std::move(orth), std::move(phon)});
  }
  return Ruleset(name, std::move(entries), parse_rule_file(pre_rules, name + " (pre)"),
                 parse_rule_file(post_rules, name + " (post)"));
}

Ruleset compile_ruleset(const std::filesystem::path& map_path,
                        const std::optional<std::filesystem::path>& pre_path,
                        const std::optional<std::filesystem::path>& post_path) {
  std::string name = map_path.stem().string();
  std::string pre = pre_path ? text_io::read_file(*pre_path) : std::string();
  std::string post = post_path ? text_io::read_file(*post_path) : std::string();
  return parse_ruleset(name, text_io::read_file(map_path), pre, post);
}

Transcription transcribe(const Ruleset& ruleset, std::string_view word, UnknownPolicy policy) {
  std::u32string s = unicode::to_u32(unicode::nfc(unicode::lower(unicode::nfc(word))));
  for (const auto& r : ruleset.pre_rules()) s = apply_rule(r, s);

  std::u32string out;
  Transcription result;
  std::size_t i = 0;
  while (i < s.size()) {
    const Ruleset::Entry* hit = nullptr;
    for (const auto& e : ruleset.entries()) {
      if (matches_at(s, i, e.grapheme)) {
        hit = &e;
        break;
      }
    }
    if (hit) {
      out += hit->phoneme;
      i += hit->grapheme.size();
      continue;
    }
    char32_t c = s[i++];
    if (unicode::is_whitespace(c)) {
      out.push_back(c);
      continue;
    }
    ++result.unmapped;
    switch (policy) {
      case UnknownPolicy::strict:
        throw DataError(ruleset.name() + ": no grapheme mapping for " + unicode::describe(c) +
                        " in '" + std::string(word) + "'");
      case UnknownPolicy::pass_through:
        out.push_back(c);
        break;
      case UnknownPolicy::drop:
        break;
    }
  }

  for (const auto& r : ruleset.post_rules()) out = apply_rule(r, out);
  result.ipa = unicode::nfc(unicode::to_utf8(out));
  return result;
}

Transcription backoff_transcribe(const std::vector<Ruleset>& rulesets, std::string_view word,
                                 UnknownPolicy policy) {
  if (rulesets.empty()) throw UsageError("backoff transcription needs at least one ruleset");
  std::size_t best = 0;
  std::size_t best_unmapped = 0;
  for (std::size_t i = 0; i < rulesets.size(); ++i) {
    Transcription t = transcribe(rulesets[i], word, UnknownPolicy::pass_through);
    if (t.unmapped == 0) {
      if (policy == UnknownPolicy::pass_through) return t;
      return transcribe(rulesets[i], word, policy);
    }
    if (i == 0 || t.unmapped < best_unmapped) {
      best = i;
      best_unmapped = t.unmapped;
    }
  }
  return transcribe(rulesets[best], word, policy);
}

std::map<std::string, std::vector<Ruleset>> load_ruleset_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("not a G2P ruleset directory: " + dir.string());
  std::vector<fs::path> maps;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") maps.push_back(entry.path());
  std::sort(maps.begin(), maps.end());

  std::map<std::string, std::vector<std::pair<std::string, Ruleset>>> staged;
  for (const fs::path& map_path : maps) {
    std::string stem = map_path.stem().string();
    std::string code = stem.substr(0, stem.find('.'));
    auto sibling = [&](const char* ext) -> std::optional<fs::path> {
      fs::path p = map_path;
      p.replace_extension(ext);
      return fs::exists(p) ? std::optional<fs::path>(p) : std::nullopt;
    };
    staged[code].emplace_back(stem, compile_ruleset(map_path, sibling(".pre"), sibling(".post")));
  }

  std::map<std::string, std::vector<Ruleset>> out;
  for (auto& [code, list] : staged) {
    std::stable_sort(list.begin(), list.end(), [&](const auto& a, const auto& b) {
      bool a_plain = a.first == code, b_plain = b.first == code;
      if (a_plain != b_plain) return a_plain;
      return a.first < b.first;
    });
    for (auto& [stem, rs] : list) out[code].push_back(std::move(rs));
  }
  return out;
}

}  // namespace cogforge::g2p
