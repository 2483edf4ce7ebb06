#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cogforge/corpus.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/ipa.hpp"

// Synset selection (top-K by availability, or a concept list) and
// materialization of the chosen synsets into a wordlist.
namespace cogforge::select {

struct AvailabilityCount {
  std::string synset_id;
  std::size_t n_ipa = 0;
  std::size_t n_ipa_or_g2p = 0;
};

struct SelectionParams {
  std::set<std::string> languages;  // glottocodes under study
  bool use_g2p = false;
  std::size_t k = 5000;
  std::optional<std::vector<std::string>> concept_list;  // set => concept-list mode

  void validate() const;
  std::size_t key(const AvailabilityCount& c) const { return use_g2p ? c.n_ipa_or_g2p : c.n_ipa; }
};

SynsetStore filter_concept_synsets(const SynsetStore& store);

/// Availability for one synset without the "no dump IPA" filter.
AvailabilityCount count_availability(const Synset& synset, const SelectionParams& params,
                                     const std::set<std::string>& g2p_supported);

/// Per-synset counts over a glottocode-resolved store. Synsets with no main
/// sense carrying a dump IPA in any language under study are dropped.
std::vector<AvailabilityCount> availability_counts(const SynsetStore& store, const SelectionParams& params,
                                                   const std::set<std::string>& g2p_supported);

/// Descending by the active count; ties by synset id ascending; at most k.
std::vector<std::string> select_top_k(const std::vector<AvailabilityCount>& counts,
                                      const SelectionParams& params);

struct ConceptSelection {
  std::string meaning;
  std::optional<std::string> synset_id;  // nullopt => unresolved
};

std::vector<ConceptSelection> select_by_concept_list(const SynsetStore& store,
                                                     const std::vector<std::string>& concept_list,
                                                     const SelectionParams& params,
                                                     const std::set<std::string>& g2p_supported);

/// `n_languages -> n_synsets` for either count.
std::map<std::size_t, std::size_t> availability_histogram(const std::vector<AvailabilityCount>& counts,
                                                          bool use_g2p);
std::string format_histogram(const std::map<std::size_t, std::size_t>& histogram);

std::vector<std::string> parse_concept_list(std::string_view text);

struct SelectedSynset {
  std::string meaning;  // synset id in top-K mode, English lemma in concept-list mode
  std::string synset_id;
};

struct DropCounts {
  std::size_t invalid_dump_ipa = 0;  // dump IPA rejected by the strict tokenizer
  std::size_t invalid_g2p_ipa = 0;   // transcribed IPA rejected by the strict tokenizer
  std::size_t no_ipa = 0;            // main sense present but no IPA source for the language

  std::size_t total() const { return invalid_dump_ipa + invalid_g2p_ipa + no_ipa; }
};

struct Materialized {
  Wordlist wordlist;
  DropCounts drops;
};

/// One row per (synset, language) with a usable main sense. Dump IPA wins;
/// otherwise, with use_g2p, the lemma is transcribed with the language's
/// backoff rulesets. Rows whose IPA fails strict tokenization are dropped.
Materialized materialize_wordlist(const SynsetStore& store, const std::vector<SelectedSynset>& selected,
                                  const SelectionParams& params,
                                  const std::map<std::string, std::vector<g2p::Ruleset>>& rulesets,
                                  const std::set<std::string>& g2p_supported);

}  // namespace cogforge::select
