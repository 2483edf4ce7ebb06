#include "cogforge/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "cogforge/error.hpp"
#include "cogforge/matrix.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/unicode.hpp"

namespace cogforge::harness {
namespace {

std::string format_rate(double v, bool pretty) {
  char buf[64];
  if (pretty) {
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return buf;
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Sound class per token; unknown tokens compare by their own spelling.
std::optional<std::vector<std::string>> class_key(const std::string& ipa_text, const ipa::TokenizeOptions& options,
                                                  const ipa::SoundClassTable& table) {
  std::vector<ipa::IpaToken> tokens;
  try {
    tokens = ipa::tokenize(ipa_text, options);
  } catch (const DataError&) {
    return std::nullopt;
  }
  if (tokens.empty()) return std::nullopt;
  std::vector<std::string> key;
  for (const auto& t : tokens) {
    auto c = table.lookup(t);
    key.push_back(c ? std::string(1, *c) : "?" + t);
  }
  return key;
}

std::vector<std::vector<std::string>> read_tsv(std::string_view tsv, const std::string& source,
                                               const std::vector<std::string>& header) {
  auto lines = text_io::lines(tsv);
  if (lines.empty() || text_io::split(lines[0], '\t') != header)
    throw ParseError(source, 1, "expected header " + text_io::join(header, "\\t"));
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    auto f = text_io::split(lines[i], '\t');
    if (f.size() != header.size())
      throw ParseError(source, i + 1, "expected " + std::to_string(header.size()) + " fields");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

double error_rate_exact(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) throw DataError("error rate of an empty pair list");
  std::size_t errors = 0;
  for (const auto& [ref, cand] : pairs) errors += unicode::nfc(ref) != unicode::nfc(cand);
  return static_cast<double>(errors) / static_cast<double>(pairs.size());
}

SoundClassErrors error_rate_soundclass(const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const ipa::TokenizeOptions& options, const ipa::SoundClassTable& table) {
  if (pairs.empty()) throw DataError("error rate of an empty pair list");
  SoundClassErrors r;
  r.n = pairs.size();
  for (const auto& [ref, cand] : pairs) {
    auto a = class_key(ref, options, table), b = class_key(cand, options, table);
    if (!a || !b) {
      ++r.untokenizable;
      ++r.errors;
    } else if (*a != *b) {
      ++r.errors;
    }
  }
  return r;
}

std::vector<LanguageErrorRate> error_rate_report(const std::vector<TranscriptionPair>& pairs,
                                                 const ipa::TokenizeOptions& options,
                                                 const ipa::SoundClassTable& table) {
  if (pairs.empty()) throw DataError("error rate of an empty pair list");
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_language;
  for (const auto& p : pairs) by_language[p.glottocode].emplace_back(p.reference, p.candidate);
  std::vector<LanguageErrorRate> out;
  for (const auto& [code, list] : by_language) {
    SoundClassErrors sc = error_rate_soundclass(list, options, table);
    out.push_back({code, list.size(), error_rate_exact(list), sc.rate(), sc.untokenizable});
  }
  return out;
}

std::string format_error_report(const std::vector<LanguageErrorRate>& rows, bool pretty) {
  std::string out =
      "# word-level rates: e1 = share of words whose transcription differs from the reference, "
      "e2 = share whose sound-class sequence differs\n";
  out += "glottocode\tn\te1\te2\tuntokenizable\tflag\n";
  for (const auto& r : rows)
    out += r.glottocode + "\t" + std::to_string(r.n) + "\t" + format_rate(r.e1, pretty) + "\t" +
           format_rate(r.e2, pretty) + "\t" + std::to_string(r.untokenizable) + "\t" +
           (r.flagged() ? "e2>e1" : "") + "\n";
  return out;
}

std::vector<TranscriptionPair> parse_transcription_pairs(std::string_view tsv, const std::string& source) {
  std::vector<TranscriptionPair> out;
  for (auto& f : read_tsv(tsv, source, {"GLOTTOCODE", "REFERENCE", "CANDIDATE"}))
    out.push_back({f[0], unicode::nfc(f[1]), unicode::nfc(f[2])});
  return out;
}

double tokenization_error_rate(const std::vector<TokenizationPair>& pairs, const ipa::TokenizeOptions& options) {
  if (pairs.empty()) throw DataError("error rate of an empty pair list");
  std::size_t errors = 0;
  for (const auto& p : pairs) {
    std::vector<std::string> ref;
    for (const auto& t : p.reference) ref.push_back(unicode::nfc(t));
    try {
      errors += ipa::tokenize(p.ipa, options) != ref;
    } catch (const DataError&) {
      ++errors;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(pairs.size());
}

std::vector<TokenizationPair> parse_tokenization_pairs(std::string_view tsv, const std::string& source) {
  std::vector<TokenizationPair> out;
  for (auto& f : read_tsv(tsv, source, {"IPA", "TOKENS"})) {
    TokenizationPair p{unicode::nfc(f[0]), {}};
    for (auto& t : text_io::split(f[1], ' '))
      if (!t.empty()) p.reference.push_back(std::move(t));
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::auto_token: return "auto-token";
    case Variant::auto_both: return "auto-both";
  }
  return "?";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::original, Variant::auto_token, Variant::auto_both};
  return v;
}

Wordlist build_variant(const Wordlist& wordlist, Variant variant,
                       const std::map<std::string, std::vector<g2p::Ruleset>>& rulesets, const WarningSink& warn) {
  auto warning = [&](const std::string& msg) {
    if (warn) warn(msg);
  };
  if (variant == Variant::auto_both)
    for (const auto& doc : wordlist.doculects())
      if (!rulesets.count(doc)) warning("no G2P ruleset for " + doc + "; dropped from auto-both");

  Wordlist out(wordlist.allow_synonyms());
  for (const WordRow& src : wordlist.rows()) {
    WordRow row = src;
    row.cogid.reset();
    if (!src.ipa || (variant == Variant::original && !src.tokens))
      throw DataError("row " + std::to_string(src.row_id) + " lacks reference IPA or tokens");
    if (variant == Variant::auto_both) {
      auto it = rulesets.find(src.doculect);
      if (it == rulesets.end()) continue;
      row.ipa = g2p::backoff_transcribe(it->second, src.form).ipa;
    }
    if (variant != Variant::original) {
      row.tokens = ipa::tokenize(*row.ipa);
      if (row.tokens->empty()) {
        warning("row " + std::to_string(src.row_id) + " has no tokens in " + std::string(variant_name(variant)) +
                "; dropped");
        continue;
      }
    }
    out.add(std::move(row));
  }
  return out;
}

tree::Tree infer_tree(const Wordlist& wordlist, const cognate::ClusterParams& params,
                      const ipa::SoundClassTable& table) {
  Wordlist cognates = cognate::assign_cognates(wordlist, params, table);
  matrix::CharacterMatrix m = matrix::encode_binary(cognates);
  return tree::nj_tree(tree::hamming_matrix(m));
}

std::vector<AblationRow> ablate(const AblationInput& input, const WarningSink& warn) {
  std::set<std::string> gold_leaves = input.gold.leaf_set();
  for (const auto& l : gold_leaves)
    if (!std::count(input.wordlist.doculects().begin(), input.wordlist.doculects().end(), l))
      throw DataError("gold tree leaf " + l + " is not a doculect of the wordlist");

  std::vector<AblationRow> rows;
  for (Variant v : all_variants()) {
    tree::Tree inferred;
    std::optional<std::filesystem::path> override_path;
    if (input.trees_dir) {
      auto p = *input.trees_dir / (std::string(variant_name(v)) + ".nwk");
      if (std::filesystem::exists(p)) override_path = p;
    }
    if (override_path) {
      inferred = tree::load_newick(*override_path);
    } else {
      Wordlist w = build_variant(input.wordlist, v, input.rulesets, warn);
      inferred = infer_tree(w, input.cluster, input.classes);
    }
    std::set<std::string> common;
    for (const auto& l : inferred.leaf_set())
      if (gold_leaves.count(l)) common.insert(l);
    if (common.size() < 4)
      throw DataError(std::string(variant_name(v)) + ": fewer than four doculects shared with the gold tree");
    tree::Tree gold = tree::prune_to(input.gold, common);
    inferred = tree::prune_to(inferred, common);
    rows.push_back({v, common.size(), tree::gq_distance(inferred, gold, input.star_policy)});
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::string out = "variant\tgq_distance\n";
  for (const auto& r : rows) out += std::string(variant_name(r.variant)) + "\t" + format_rate(r.gqd.value(), false) + "\n";
  return out;
}

}  // namespace cogforge::harness
