#include <doctest.h>

#include "cogforge/error.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/select.hpp"
#include "oracles.hpp"

using namespace cogforge;
using namespace cogforge::select;

namespace {

Sense sense(const std::string& iso, const std::string& glottocode, const std::string& lemma, bool main, bool key,
            std::optional<std::string> ipa = std::nullopt) {
  Sense s;
  s.lang = {iso, glottocode};
  s.lemma = lemma;
  s.is_main = main;
  s.is_key = key;
  s.ipa = std::move(ipa);
  return s;
}

Synset synset(const std::string& id, std::vector<Sense> senses, SynsetKind kind = SynsetKind::lexical) {
  return {id, kind, std::move(senses)};
}

SelectionParams params(std::set<std::string> languages, bool use_g2p = false) {
  SelectionParams p;
  p.languages = std::move(languages);
  p.use_g2p = use_g2p;
  return p;
}

}  // namespace

TEST_CASE("named entities are filtered out") {
  SynsetStore mixed({synset("a", {sense("eng", "stan1293", "x", true, false)}),
                     synset("b", {sense("eng", "stan1293", "y", true, false)}, SynsetKind::entity)});
  SynsetStore kept = filter_concept_synsets(mixed);
  REQUIRE(kept.size() == 1);
  CHECK(kept.synsets()[0].id == "a");

  SynsetStore entities({synset("e", {}, SynsetKind::entity)});
  CHECK(filter_concept_synsets(entities).empty());

  std::vector<Synset> ten;
  for (int i = 0; i < 10; ++i)
    ten.push_back(synset("s" + std::to_string(i), {}, i < 3 ? SynsetKind::entity : SynsetKind::lexical));
  CHECK(filter_concept_synsets(SynsetStore(ten)).size() == 7);

  CHECK(filter_concept_synsets(load_synset_dump(oracle::fixture("toy_dump.jsonl"))).size() == 10);
}

TEST_CASE("availability counts") {
  Synset s = synset("bn:1", {sense("eng", "stan1293", "hand", true, true, "hænd"),
                             sense("deu", "stan1295", "Hand", true, false)});
  auto p = params({"stan1293", "stan1295"});
  auto c = count_availability(s, p, {"stan1295"});
  CHECK(c.n_ipa == 1);
  CHECK(c.n_ipa_or_g2p == 2);

  Synset none = synset("bn:2", {sense("deu", "stan1295", "Haus", true, false)});
  auto counts = availability_counts(SynsetStore({s, none}), p, {"stan1295"});
  REQUIRE(counts.size() == 1);
  CHECK(counts[0].synset_id == "bn:1");

  CHECK(availability_counts(SynsetStore(), p, {}).empty());

  // Non-main senses and languages outside the study set are ignored.
  Synset other = synset("bn:3", {sense("eng", "stan1293", "hand", false, false, "hænd"),
                                 sense("hun", "hung1274", "kéz", true, false, "keːz")});
  auto c3 = count_availability(other, p, {"stan1295"});
  CHECK(c3.n_ipa == 0);
  CHECK(c3.n_ipa_or_g2p == 0);
}

TEST_CASE("top-k ordering") {
  auto p = params({"x"});
  p.k = 2;
  std::vector<AvailabilityCount> counts{{"A", 3, 3}, {"B", 5, 5}, {"C", 5, 5}};
  CHECK(select_top_k(counts, p) == std::vector<std::string>{"B", "C"});
  p.k = 10;
  CHECK(select_top_k(counts, p) == std::vector<std::string>{"B", "C", "A"});
  CHECK(select_top_k({}, p).empty());

  p.use_g2p = true;
  std::vector<AvailabilityCount> g2p{{"A", 1, 9}, {"B", 5, 5}};
  CHECK(select_top_k(g2p, p) == std::vector<std::string>{"A", "B"});

  p.k = 0;
  CHECK_THROWS_AS(p.validate(), UsageError);
}

TEST_CASE("top-k output is sorted by the key and bounded by k") {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AvailabilityCount> counts;
    std::size_t n = oracle::uniform(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = oracle::uniform(rng, 6);
      counts.push_back({"s" + std::to_string(i), a, a + oracle::uniform(rng, 3)});
    }
    auto p = params({"x"}, trial % 2);
    p.k = 1 + oracle::uniform(rng, 20);
    auto ids = select_top_k(counts, p);
    CHECK(ids.size() == std::min(p.k, counts.size()));
    std::map<std::string, std::size_t> key;
    for (const auto& c : counts) key[c.synset_id] = p.key(c);
    for (std::size_t i = 1; i < ids.size(); ++i) {
      CHECK(key[ids[i - 1]] >= key[ids[i]]);
      if (key[ids[i - 1]] == key[ids[i]]) CHECK(ids[i - 1] < ids[i]);
    }
  }
}

TEST_CASE("concept-list resolution") {
  auto p = params({"stan1293", "stan1295", "hung1274"});
  auto eng = [](const std::string& lemma, bool key) { return sense("eng", "stan1293", lemma, true, key, "x"); };

  SynsetStore key_store({synset("X", {eng("hand", true)}),
                         synset("Y", {eng("hand", false), sense("deu", "stan1295", "Hand", true, false, "hant"),
                                      sense("hun", "hung1274", "kéz", true, false, "keːz")})});
  auto r = select_by_concept_list(key_store, {"hand"}, p, {});
  REQUIRE(r.size() == 1);
  CHECK(r[0].synset_id == "X");

  SynsetStore avail({synset("X", {eng("hand", false)}),
                     synset("Y", {eng("hand", false), sense("deu", "stan1295", "Hand", true, false, "hant")})});
  CHECK(select_by_concept_list(avail, {"hand"}, p, {})[0].synset_id == "Y");

  auto missing = select_by_concept_list(avail, {"moon"}, p, {});
  REQUIRE(missing.size() == 1);
  CHECK(missing[0].meaning == "moon");
  CHECK_FALSE(missing[0].synset_id.has_value());

  SynsetStore tie({synset("Z", {eng("eye", false)}), synset("A", {eng("eye", false)})});
  CHECK(select_by_concept_list(tie, {"eye"}, p, {})[0].synset_id == "A");
}

TEST_CASE("concept-list mode on the fixture never returns a non-key candidate") {
  SynsetStore store = filter_concept_synsets(load_synset_dump(oracle::fixture("toy_dump.jsonl")));
  store = resolve_store(store, load_language_map(oracle::fixture("language_map.csv")));
  auto p = params(store.glottocodes());
  auto list = parse_concept_list("hand\nwater\nstar\n");
  auto r = select_by_concept_list(store, list, p, {});
  REQUIRE(r.size() == 3);
  CHECK(r[0].synset_id == "bn:00000001n");
  CHECK(r[1].synset_id == "bn:00000002n");
  CHECK_FALSE(r[2].synset_id.has_value());
  for (const auto& sel : r)
    if (sel.synset_id) CHECK(store.find(*sel.synset_id)->main_sense("eng")->is_key);
}

TEST_CASE("histogram") {
  std::vector<AvailabilityCount> counts{{"A", 1, 2}, {"B", 1, 3}, {"C", 2, 3}};
  auto h = availability_histogram(counts, false);
  CHECK(h == std::map<std::size_t, std::size_t>{{1, 2}, {2, 1}});
  auto g = availability_histogram(counts, true);
  CHECK(g == std::map<std::size_t, std::size_t>{{2, 1}, {3, 2}});
  CHECK(format_histogram(h) == "n_languages\tn_synsets\n1\t2\n2\t1\n");
}

TEST_CASE("materialization") {
  auto p = params({"stan1293", "stan1295"});
  std::vector<SelectedSynset> sel{{"bn:1", "bn:1"}};

  SynsetStore both({synset("bn:1", {sense("eng", "stan1293", "hand", true, true, "hænd"),
                                    sense("deu", "stan1295", "Hand", true, false, "hant")})});
  auto m = materialize_wordlist(both, sel, p, {}, {});
  CHECK(m.wordlist.size() == 2);
  CHECK(m.drops.total() == 0);
  CHECK(m.wordlist.rows()[0].meaning == "bn:1");
  CHECK(m.wordlist.rows()[0].tokens == std::vector<std::string>{"h", "æ", "n", "d"});

  SynsetStore bad({synset("bn:1", {sense("eng", "stan1293", "hand", true, true, "h@nd"),
                                   sense("deu", "stan1295", "Hand", true, false, "hant")})});
  auto d = materialize_wordlist(bad, sel, p, {}, {});
  CHECK(d.wordlist.size() == 1);
  CHECK(d.drops.invalid_dump_ipa == 1);

  SynsetStore g2p_store({synset("bn:1", {sense("eng", "stan1293", "hand", true, true, "hænd"),
                                         sense("deu", "stan1295", "Hand", true, false)})});
  std::map<std::string, std::vector<g2p::Ruleset>> rules;
  rules["stan1295"].push_back(g2p::parse_ruleset("stan1295", "orth,phon\nh,h\na,a\nn,n\nd,t\n"));
  auto gp = params({"stan1293", "stan1295"}, true);
  auto g = materialize_wordlist(g2p_store, sel, gp, rules, {"stan1295"});
  REQUIRE(g.wordlist.size() == 2);
  CHECK(g.wordlist.rows()[1].ipa == g2p::transcribe(rules["stan1295"][0], "Hand").ipa);
  CHECK(g.wordlist.rows()[1].form == "Hand");

  auto no_g2p = materialize_wordlist(g2p_store, sel, p, {}, {});
  CHECK(no_g2p.wordlist.size() == 1);
  CHECK(no_g2p.drops.no_ipa == 1);

  CHECK_THROWS(materialize_wordlist(g2p_store, sel, gp, {}, {"stan1295"}));

  std::vector<SelectedSynset> list_mode{{"hand", "bn:1"}};
  CHECK(materialize_wordlist(both, list_mode, p, {}, {}).wordlist.rows()[0].meaning == "hand");
}

TEST_CASE("random stores: count monotonicity and at most one row per synset and language") {
  oracle::Rng rng(9);
  const std::vector<std::pair<std::string, std::string>> langs{
      {"eng", "stan1293"}, {"deu", "stan1295"}, {"hun", "hung1274"}, {"fin", "finn1318"}};
  std::map<std::string, std::vector<g2p::Ruleset>> rules;
  rules["stan1295"].push_back(g2p::parse_ruleset("stan1295", "orth,phon\na,a\nt,t\n"));
  rules["finn1318"].push_back(g2p::parse_ruleset("finn1318", "orth,phon\na,a\nt,t\n"));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Synset> synsets;
    for (int i = 0; i < 8; ++i) {
      Synset s = synset("bn:" + std::to_string(i), {});
      for (const auto& [iso, code] : langs) {
        if (oracle::uniform(rng, 3) == 0) continue;
        bool main = oracle::uniform(rng, 4) != 0;
        std::optional<std::string> ipa;
        if (oracle::uniform(rng, 2)) ipa = oracle::uniform(rng, 5) ? "ta" : "t@";
        s.senses.push_back(sense(iso, code, "tat", main, false, ipa));
      }
      synsets.push_back(std::move(s));
    }
    SynsetStore store(synsets);
    auto p = params({"stan1293", "stan1295", "hung1274", "finn1318"}, true);
    std::set<std::string> supported{"stan1295", "finn1318"};
    auto counts = availability_counts(store, p, supported);
    std::vector<SelectedSynset> sel;
    for (const auto& c : counts) {
      CHECK(c.n_ipa >= 1);
      CHECK(c.n_ipa <= c.n_ipa_or_g2p);
      CHECK(c.n_ipa_or_g2p <= p.languages.size());
      sel.push_back({c.synset_id, c.synset_id});
    }
    for (const auto& s : store.synsets()) {
      auto c = count_availability(s, p, supported);
      CHECK(c.n_ipa <= c.n_ipa_or_g2p);
    }
    auto m = materialize_wordlist(store, sel, p, rules, supported);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : m.wordlist.rows()) CHECK(seen.insert({r.meaning, r.doculect}).second);
  }
}
