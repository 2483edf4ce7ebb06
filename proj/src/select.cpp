#include "cogforge/select.hpp"

#include <algorithm>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/unicode.hpp"

namespace cogforge::select {

void SelectionParams::validate() const {
  if (k < 1) throw UsageError("k must be at least 1");
  if (languages.empty()) throw UsageError("no languages under study");
}

SynsetStore filter_concept_synsets(const SynsetStore& store) {
  std::vector<Synset> kept;
  for (const Synset& syn : store.synsets())
    if (syn.kind == SynsetKind::lexical) kept.push_back(syn);
  return SynsetStore(std::move(kept));
}

AvailabilityCount count_availability(const Synset& synset, const SelectionParams& params,
                                     const std::set<std::string>& g2p_supported) {
  AvailabilityCount c{synset.id, 0, 0};
  for (const std::string& lang : params.languages) {
    const Sense* main = synset.main_sense_for_glottocode(lang);
    if (!main) continue;
    if (main->ipa) {
      ++c.n_ipa;
      ++c.n_ipa_or_g2p;
    } else if (g2p_supported.count(lang)) {
      ++c.n_ipa_or_g2p;
    }
  }
  return c;
}

std::vector<AvailabilityCount> availability_counts(const SynsetStore& store, const SelectionParams& params,
                                                   const std::set<std::string>& g2p_supported) {
  std::vector<AvailabilityCount> out;
  for (const Synset& syn : store.synsets()) {
    AvailabilityCount c = count_availability(syn, params, g2p_supported);
    if (c.n_ipa > 0) out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> select_top_k(const std::vector<AvailabilityCount>& counts,
                                      const SelectionParams& params) {
  std::vector<const AvailabilityCount*> order;
  order.reserve(counts.size());
  for (const auto& c : counts) order.push_back(&c);
  std::sort(order.begin(), order.end(), [&](const AvailabilityCount* a, const AvailabilityCount* b) {
    std::size_t ka = params.key(*a), kb = params.key(*b);
    if (ka != kb) return ka > kb;
    return a->synset_id < b->synset_id;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < order.size() && i < params.k; ++i) ids.push_back(order[i]->synset_id);
  return ids;
}

std::vector<ConceptSelection> select_by_concept_list(const SynsetStore& store,
                                                     const std::vector<std::string>& concept_list,
                                                     const SelectionParams& params,
                                                     const std::set<std::string>& g2p_supported) {
  // English lemma -> candidate synsets, built once.
  std::map<std::string, std::vector<const Synset*>> by_lemma;
  for (const Synset& syn : store.synsets()) {
    std::set<std::string> lemmas;
    for (const Sense& s : syn.senses)
      if (s.lang.iso == "eng") lemmas.insert(unicode::lower(s.lemma));
    for (const auto& l : lemmas) by_lemma[l].push_back(&syn);
  }

  std::vector<ConceptSelection> out;
  for (const std::string& meaning : concept_list) {
    ConceptSelection sel{meaning, std::nullopt};
    auto it = by_lemma.find(unicode::lower(unicode::nfc(meaning)));
    if (it != by_lemma.end()) {
      std::vector<const Synset*> candidates = it->second;
      auto is_key = [](const Synset* syn) {
        const Sense* eng = syn->main_sense("eng");
        return eng && eng->is_key;
      };
      if (std::any_of(candidates.begin(), candidates.end(), is_key))
        std::erase_if(candidates, [&](const Synset* syn) { return !is_key(syn); });
      const Synset* best = nullptr;
      std::size_t best_count = 0;
      for (const Synset* syn : candidates) {
        std::size_t n = params.key(count_availability(*syn, params, g2p_supported));
        if (!best || n > best_count || (n == best_count && syn->id < best->id)) {
          best = syn;
          best_count = n;
        }
      }
      if (best) sel.synset_id = best->id;
    }
    out.push_back(std::move(sel));
  }
  return out;
}

std::map<std::size_t, std::size_t> availability_histogram(const std::vector<AvailabilityCount>& counts,
                                                          bool use_g2p) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& c : counts) ++hist[use_g2p ? c.n_ipa_or_g2p : c.n_ipa];
  return hist;
}

std::string format_histogram(const std::map<std::size_t, std::size_t>& histogram) {
  std::string out = "n_languages\tn_synsets\n";
  for (const auto& [n, count] : histogram) out += std::to_string(n) + "\t" + std::to_string(count) + "\n";
  return out;
}

std::vector<std::string> parse_concept_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& line : text_io::lines(text)) {
    std::string_view t = text_io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(unicode::nfc(t));
  }
  return out;
}

Materialized materialize_wordlist(const SynsetStore& store, const std::vector<SelectedSynset>& selected,
                                  const SelectionParams& params,
                                  const std::map<std::string, std::vector<g2p::Ruleset>>& rulesets,
                                  const std::set<std::string>& g2p_supported) {
  if (params.use_g2p)
    for (const auto& lang : g2p_supported)
      if (params.languages.count(lang) && !rulesets.count(lang))
        throw DataError("no G2P ruleset for supported language " + lang);

  Materialized out{Wordlist(false), {}};
  std::int64_t next_id = 1;
  const ipa::TokenizeOptions strict{true, false};
  for (const SelectedSynset& sel : selected) {
    const Synset* syn = store.find(sel.synset_id);
    if (!syn) throw DataError("selected synset " + sel.synset_id + " not in store");
    for (const std::string& lang : params.languages) {
      const Sense* main = syn->main_sense_for_glottocode(lang);
      if (!main) continue;
      std::string ipa;
      bool from_dump = main->ipa.has_value();
      if (from_dump) {
        ipa = *main->ipa;
      } else if (params.use_g2p && g2p_supported.count(lang)) {
        ipa = g2p::backoff_transcribe(rulesets.at(lang), main->lemma).ipa;
      } else {
        ++out.drops.no_ipa;
        continue;
      }
      std::vector<std::string> tokens;
      try {
        tokens = ipa::tokenize(ipa, strict);
      } catch (const DataError&) {
        ++(from_dump ? out.drops.invalid_dump_ipa : out.drops.invalid_g2p_ipa);
        continue;
      }
      if (tokens.empty()) {
        ++(from_dump ? out.drops.invalid_dump_ipa : out.drops.invalid_g2p_ipa);
        continue;
      }
      WordRow row;
      row.row_id = next_id++;
      row.doculect = lang;
      row.meaning = sel.meaning;
      row.form = main->lemma;
      row.ipa = ipa;
      row.tokens = std::move(tokens);
      out.wordlist.add(std::move(row));
    }
  }
  return out;
}

}  // namespace cogforge::select
