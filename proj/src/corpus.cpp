#include "cogforge/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

#include <nlohmann/json.hpp>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/unicode.hpp"

namespace cogforge {

bool is_valid_iso(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool is_valid_glottocode(std::string_view code) {
  static const std::regex pattern("^[a-z0-9]{4}[0-9]{4}$");
  return std::regex_match(code.begin(), code.end(), pattern);
}

void LanguageRef::validate() const {
  if (!is_valid_iso(iso)) throw DataError("invalid ISO 639-3 code '" + iso + "'");
  if (glottocode && !is_valid_glottocode(*glottocode))
    throw DataError("invalid glottocode '" + *glottocode + "'");
}

const Sense* Synset::main_sense(std::string_view iso) const {
  for (const auto& s : senses)
    if (s.is_main && s.lang.iso == iso) return &s;
  return nullptr;
}

const Sense* Synset::main_sense_for_glottocode(std::string_view glottocode) const {
  for (const auto& s : senses)
    if (s.is_main && s.lang.glottocode && *s.lang.glottocode == glottocode) return &s;
  return nullptr;
}

SynsetStore::SynsetStore(std::vector<Synset> synsets) : synsets_(std::move(synsets)) {
  for (std::size_t i = 0; i < synsets_.size(); ++i) {
    const Synset& syn = synsets_[i];
    if (syn.id.empty()) throw DataError("synset with empty id");
    if (!index_.emplace(syn.id, i).second) throw DataError("duplicate synset id " + syn.id);
    std::set<std::string> main_langs;
    for (const Sense& s : syn.senses) {
      s.lang.validate();
      if (s.lemma.empty()) throw DataError("synset " + syn.id + ": empty lemma for " + s.lang.iso);
      if (s.is_main && !main_langs.insert(s.lang.iso).second)
        throw DataError("synset " + syn.id + ": more than one main sense for " + s.lang.iso);
      languages_.insert(s.lang.iso);
    }
  }
}

const Synset* SynsetStore::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &synsets_[it->second];
}

std::set<std::string> SynsetStore::glottocodes() const {
  std::set<std::string> out;
  for (const auto& syn : synsets_)
    for (const auto& s : syn.senses)
      if (s.lang.glottocode) out.insert(*s.lang.glottocode);
  return out;
}

LanguageMap parse_language_map(std::string_view csv, const std::string& source) {
  auto lines = text_io::lines(csv);
  if (lines.empty() || text_io::trim(lines[0]) != "iso,glottocode,priority")
    throw ParseError(source, 1, "expected header 'iso,glottocode,priority'");

  std::map<std::string, std::vector<std::pair<long, std::string>>> staged;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = text_io::trim(lines[i]);
    if (line.empty()) continue;
    auto fields = text_io::split(line, ',');
    if (fields.size() != 3) throw ParseError(source, i + 1, "expected 3 fields");
    std::string iso(text_io::trim(fields[0]));
    std::string glotto(text_io::trim(fields[1]));
    std::string_view prio_text = text_io::trim(fields[2]);
    long priority = 0;
    auto [ptr, ec] = std::from_chars(prio_text.data(), prio_text.data() + prio_text.size(), priority);
    if (ec != std::errc() || ptr != prio_text.data() + prio_text.size())
      throw ParseError(source, i + 1, "priority is not an integer");
    if (iso.empty() || glotto.empty()) throw ParseError(source, i + 1, "empty code");
    if (!seen.emplace(iso, glotto).second)
      throw ParseError(source, i + 1, "duplicate mapping " + iso + " -> " + glotto);
    staged[iso].emplace_back(priority, glotto);
  }

  LanguageMap out;
  for (auto& [iso, entries] : staged) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& list = out[iso];
    for (auto& e : entries) list.push_back(std::move(e.second));
  }
  return out;
}

LanguageMap load_language_map(const std::filesystem::path& path) {
  return parse_language_map(text_io::read_file(path), path.string());
}

std::optional<std::string> resolve_language(std::string_view iso, const LanguageMap& map) {
  auto it = map.find(iso);
  if (it == map.end() || it->second.empty()) return std::nullopt;
  return it->second.front();
}

SynsetStore resolve_store(const SynsetStore& store, const LanguageMap& map) {
  std::vector<Synset> out;
  out.reserve(store.size());
  for (const Synset& syn : store.synsets()) {
    Synset copy{syn.id, syn.kind, {}};
    for (const Sense& s : syn.senses) {
      auto glotto = resolve_language(s.lang.iso, map);
      if (!glotto) continue;
      Sense resolved = s;
      resolved.lang.glottocode = *glotto;
      copy.senses.push_back(std::move(resolved));
    }
    out.push_back(std::move(copy));
  }
  return SynsetStore(std::move(out));
}

namespace {

Synset synset_from_json(const nlohmann::json& j) {
  Synset syn;
  syn.id = j.at("id").get<std::string>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "concept")
    syn.kind = SynsetKind::lexical;
  else if (kind == "entity")
    syn.kind = SynsetKind::entity;
  else
    throw DataError("unknown synset kind '" + kind + "'");
  for (const auto& js : j.at("senses")) {
    Sense s;
    s.lang.iso = js.at("lang").get<std::string>();
    s.lemma = unicode::nfc(js.at("lemma").get<std::string>());
    s.is_main = js.value("main", false);
    s.is_key = js.value("key", false);
    if (js.contains("ipa") && !js["ipa"].is_null()) s.ipa = unicode::nfc(js["ipa"].get<std::string>());
    syn.senses.push_back(std::move(s));
  }
  return syn;
}

}  // namespace

SynsetStore parse_synset_dump(std::string_view jsonl, const std::string& source) {
  std::vector<Synset> synsets;
  auto lines = text_io::lines(jsonl);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    try {
      synsets.push_back(synset_from_json(nlohmann::json::parse(lines[i])));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, i + 1, e.what());
    } catch (const DataError& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  try {
    return SynsetStore(std::move(synsets));
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

SynsetStore load_synset_dump(const std::filesystem::path& path) {
  return parse_synset_dump(text_io::read_file(path), path.string());
}

std::string serialize_synset_dump(const SynsetStore& store) {
  std::string out;
  for (const Synset& syn : store.synsets()) {
    nlohmann::ordered_json j;
    j["id"] = syn.id;
    j["kind"] = syn.kind == SynsetKind::lexical ? "concept" : "entity";
    j["senses"] = nlohmann::ordered_json::array();
    for (const Sense& s : syn.senses) {
      nlohmann::ordered_json js;
      js["lang"] = s.lang.iso;
      js["lemma"] = s.lemma;
      js["main"] = s.is_main;
      js["key"] = s.is_key;
      if (s.ipa) js["ipa"] = *s.ipa;
      j["senses"].push_back(std::move(js));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

Wordlist::Wordlist(std::vector<WordRow> rows, bool allow_synonyms) : allow_synonyms_(allow_synonyms) {
  for (auto& r : rows) add(std::move(r));
}

void Wordlist::add(WordRow row) {
  auto fail = [&](const std::string& what) {
    throw DataError("row " + std::to_string(row.row_id) + ": " + what);
  };
  if (row.doculect.empty()) fail("empty DOCULECT");
  if (row.meaning.empty()) fail("empty CONCEPT");
  for (char c : row.doculect)
    if (c == ' ' || c == '\t' || c == '\n') fail("whitespace in DOCULECT");
  if (row.ipa && row.ipa->empty()) row.ipa.reset();
  if (row.tokens && row.tokens->empty()) row.tokens.reset();
  if (row.form.empty() && !row.ipa) fail("neither FORM nor IPA present");
  if (row.tokens && !row.ipa) fail("TOKENS without IPA");
  if (row.tokens)
    for (const auto& t : *row.tokens)
      if (t.empty() || t.find_first_of(" \t") != std::string::npos) fail("malformed token");
  if (!ids_.insert(row.row_id).second) fail("duplicate ID");
  if (!pairs_.emplace(row.doculect, row.meaning).second && !allow_synonyms_)
    fail("second entry for (" + row.doculect + ", " + row.meaning + ") but synonyms are disabled");

  if (doculect_set_.insert(row.doculect).second) doculects_.push_back(row.doculect);
  auto [it, inserted] = concept_rows_.try_emplace(row.meaning);
  if (inserted) concepts_.push_back(row.meaning);
  it->second.push_back(rows_.size());
  rows_.push_back(std::move(row));
}

std::vector<std::size_t> Wordlist::rows_for_concept(std::string_view meaning) const {
  auto it = concept_rows_.find(meaning);
  return it == concept_rows_.end() ? std::vector<std::size_t>{} : it->second;
}

bool Wordlist::has(std::string_view doculect, std::string_view meaning) const {
  return pairs_.count({std::string(doculect), std::string(meaning)}) > 0;
}

namespace {

const std::vector<std::string> kWordlistColumns = {"ID", "DOCULECT", "CONCEPT", "FORM",
                                                   "IPA", "TOKENS", "COGID"};

std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line,
                       const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(source, line, std::string(what) + " is not an integer: '" + std::string(text) + "'");
  return v;
}

}  // namespace

Wordlist parse_wordlist(std::string_view tsv, const std::string& source, bool allow_synonyms) {
  auto lines = text_io::lines(tsv);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  auto header = text_io::split(lines[0], '\t');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(text_io::trim(header[i]))] = i;
  for (const char* required : {"ID", "DOCULECT", "CONCEPT", "FORM", "IPA"})
    if (!col.count(required)) throw ParseError(source, 1, std::string("missing column ") + required);
  auto get = [&](const std::vector<std::string>& f, const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= f.size()) return {};
    return f[it->second];
  };

  Wordlist wl(allow_synonyms);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = text_io::split(lines[i], '\t');
    if (f.size() != header.size())
      throw ParseError(source, i + 1, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(f.size()));
    WordRow row;
    row.row_id = parse_int(get(f, "ID"), source, i + 1, "ID");
    row.doculect = get(f, "DOCULECT");
    row.meaning = unicode::nfc(get(f, "CONCEPT"));
    row.form = unicode::nfc(get(f, "FORM"));
    if (auto ipa = get(f, "IPA"); !ipa.empty()) row.ipa = unicode::nfc(ipa);
    if (auto tok = get(f, "TOKENS"); !tok.empty()) {
      std::vector<std::string> tokens;
      for (auto& t : text_io::split(unicode::nfc(tok), ' '))
        if (!t.empty()) tokens.push_back(t);
      row.tokens = std::move(tokens);
    }
    if (auto cog = get(f, "COGID"); !cog.empty()) row.cogid = parse_int(cog, source, i + 1, "COGID");
    try {
      wl.add(std::move(row));
    } catch (const DataError& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  return wl;
}

Wordlist load_wordlist(const std::filesystem::path& path, bool allow_synonyms) {
  return parse_wordlist(text_io::read_file(path), path.string(), allow_synonyms);
}

std::string format_wordlist(const Wordlist& wordlist) {
  std::string out = text_io::join(kWordlistColumns, "\t") + "\n";
  for (const WordRow& r : wordlist.rows()) {
    out += std::to_string(r.row_id);
    out += '\t' + r.doculect + '\t' + r.meaning + '\t' + r.form + '\t';
    if (r.ipa) out += *r.ipa;
    out += '\t';
    if (r.tokens) out += text_io::join(*r.tokens, " ");
    out += '\t';
    if (r.cogid) out += std::to_string(*r.cogid);
    out += '\n';
  }
  return out;
}

void write_wordlist(const Wordlist& wordlist, const std::filesystem::path& path) {
  text_io::write_file(path, format_wordlist(wordlist));
}

}  // namespace cogforge
