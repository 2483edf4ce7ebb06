#include <doctest.h>

#include "cogforge/error.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/unicode.hpp"
#include "oracles.hpp"

using namespace cogforge;
using namespace cogforge::g2p;

namespace {

const char* kHungarian = "orth,phon\na,ɒ\nsz,s\nó,oː\n";

}  // namespace

TEST_CASE("ruleset compilation") {
  Ruleset r = parse_ruleset("hu", kHungarian);
  REQUIRE(r.entries().size() == 3);
  CHECK(unicode::to_utf8(r.entries().front().grapheme) == "sz");

  Ruleset post = parse_ruleset("x", "orth,phon\nn,n\n", "", "n -> m / _ p\n");
  CHECK(post.post_rules().size() == 1);
  CHECK(post.pre_rules().empty());

  CHECK_THROWS_AS(parse_ruleset("x", "orth,phon\na,ɒ\na,a\n"), DataError);
  CHECK_THROWS(parse_ruleset("x", "orth,phon\n,a\n"));
  CHECK_THROWS_AS(parse_ruleset("x", "orth,phon\na,a\n", "a => b\n"), ParseError);
}

TEST_CASE("rule grammar") {
  RewriteRule r = parse_rule("s -> ʃ / # _ t");
  CHECK(unicode::to_utf8(r.from) == "s");
  CHECK(unicode::to_utf8(r.to) == "ʃ");
  CHECK(r.left_boundary);
  CHECK_FALSE(r.right_boundary);
  CHECK(r.left.empty());
  CHECK(unicode::to_utf8(r.right) == "t");

  RewriteRule plain = parse_rule("d -> t / _ #");
  CHECK(plain.right_boundary);
  RewriteRule bare = parse_rule("x -> ks");
  CHECK(bare.left.empty());
  CHECK(bare.right.empty());
}

TEST_CASE("transcription examples") {
  Ruleset r = parse_ruleset("hu", kHungarian);
  CHECK(transcribe(r, "szó").ipa == "soː");
  CHECK(transcribe(r, "").ipa.empty());
  CHECK(transcribe(r, "SZÓ").ipa == "soː");

  Ruleset a = parse_ruleset("a", "orth,phon\na,ɒ\n");
  CHECK_THROWS_AS(transcribe(a, "ab", UnknownPolicy::strict), DataError);
  Transcription passed = transcribe(a, "ab");
  CHECK(passed.ipa == "ɒb");
  CHECK(passed.unmapped == 1);
  CHECK(transcribe(a, "ab", UnknownPolicy::drop).ipa == "ɒ");
  CHECK(parse_unknown_policy("strict") == UnknownPolicy::strict);
  CHECK_THROWS(parse_unknown_policy("loud"));
}

TEST_CASE("context rules") {
  Ruleset r = parse_ruleset("de", "orth,phon\nd,d\na,a\nn,n\np,p\nm,m\n", "", "d -> t / _ #\nn -> m / _ p\n");
  CHECK(transcribe(r, "and").ipa == "ant");
  CHECK(transcribe(r, "dan").ipa == "dan");
  CHECK(transcribe(r, "anpa").ipa == "ampa");
  CHECK(transcribe(r, "and and").ipa == "ant ant");

  Ruleset pre = parse_ruleset("de", "orth,phon\nsch,ʃ\ns,z\nt,t\na,a\n", "s -> sch / # _ t\n");
  CHECK(transcribe(pre, "sta").ipa == "ʃta");
  CHECK(transcribe(pre, "asta").ipa == "azta");
}

TEST_CASE("longest match beats a split") {
  Ruleset r = parse_ruleset("x", "orth,phon\ns,s\nsz,ʃ\nz,z\n");
  CHECK(transcribe(r, "sz").ipa == "ʃ");
  CHECK(transcribe(r, "ssz").ipa == "sʃ");
}

TEST_CASE("greedy matching agrees with a leftmost-longest oracle on random maps") {
  oracle::Rng rng(7);
  const std::u32string letters = U"abcd";
  const std::u32string outputs = U"ptkmnɒʃ";
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::u32string, std::u32string> map;
    std::size_t keys = 1 + oracle::uniform(rng, 8);
    while (map.size() < keys) {
      std::u32string k;
      std::size_t len = 1 + oracle::uniform(rng, 3);
      for (std::size_t i = 0; i < len; ++i) k += letters[oracle::uniform(rng, letters.size())];
      std::u32string v;
      std::size_t vlen = 1 + oracle::uniform(rng, 2);
      for (std::size_t i = 0; i < vlen; ++i) v += outputs[oracle::uniform(rng, outputs.size())];
      map[k] = v;
    }
    std::vector<Ruleset::Entry> entries;
    std::size_t max_out = 0;
    for (const auto& [k, v] : map) {
      entries.push_back({k, v});
      max_out = std::max(max_out, v.size());
    }
    Ruleset r("random", entries);
    for (int w = 0; w < 10; ++w) {
      std::u32string word;
      std::size_t len = oracle::uniform(rng, 9);
      for (std::size_t i = 0; i < len; ++i) word += letters[oracle::uniform(rng, letters.size())];
      Transcription t = transcribe(r, unicode::to_utf8(word));
      CHECK(unicode::to_u32(t.ipa) == oracle::leftmost_longest(map, word));
      CHECK(unicode::to_u32(t.ipa).size() <= std::max<std::size_t>(max_out, 1) * word.size());
      CHECK(transcribe(r, unicode::to_utf8(word)).ipa == t.ipa);
    }
  }
}

TEST_CASE("backoff across scripts") {
  Ruleset latin = parse_ruleset("latn", "orth,phon\nd,d\na,a\n");
  Ruleset cyrillic = parse_ruleset("cyrl", "orth,phon\nд,d\nа,a\n");
  CHECK(backoff_transcribe({latin, cyrillic}, "да").ipa == transcribe(cyrillic, "да").ipa);
  CHECK(backoff_transcribe({latin, cyrillic}, "да").unmapped == 0);
  CHECK(backoff_transcribe({latin}, "да").ipa == transcribe(latin, "да").ipa);
  CHECK(backoff_transcribe({latin, cyrillic}, "da").ipa == transcribe(latin, "da").ipa);
  CHECK_THROWS(backoff_transcribe({}, "da"));

  // Mixed script: each ruleset misses one character, the earlier one wins.
  Ruleset one = parse_ruleset("one", "orth,phon\nd,t\n");
  Ruleset two = parse_ruleset("two", "orth,phon\nд,d\n");
  auto a = transcribe(one, "dд"), b = transcribe(two, "dд");
  REQUIRE(a.unmapped == b.unmapped);
  CHECK(backoff_transcribe({one, two}, "dд").ipa == a.ipa);
  CHECK(backoff_transcribe({two, one}, "dд").ipa == b.ipa);

  // Fewer unmapped characters wins over order.
  Ruleset partial = parse_ruleset("partial", "orth,phon\nd,d\n");
  Ruleset better = parse_ruleset("better", "orth,phon\nd,d\n\u0430,a\n");
  CHECK(backoff_transcribe({partial, better}, "d\u0430x").ipa == transcribe(better, "d\u0430x").ipa);
}

TEST_CASE("ruleset directory loading") {
  auto sets = load_ruleset_dir(oracle::fixture("g2p"));
  REQUIRE(sets.count("russ1263"));
  REQUIRE(sets.at("russ1263").size() == 2);
  CHECK(sets.at("russ1263")[0].name() == "russ1263");
  CHECK(sets.at("stan1295").front().post_rules().size() >= 1);
  CHECK(backoff_transcribe(sets.at("stan1295"), "Hand").ipa == "hant");
  CHECK(backoff_transcribe(sets.at("stan1295"), "Stein").ipa == "ʃtaɪ̯n");
}
