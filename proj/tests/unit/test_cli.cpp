#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>

#include "cogforge/text_io.hpp"
#include "oracles.hpp"

using cogforge::text_io::read_file;
using cogforge::text_io::write_file;

namespace {

struct Outcome {
  int code;
  std::string output;  // stdout and stderr together
};

Outcome cli(const std::string& args) {
  std::string cmd = std::string("'") + COGFORGE_CLI + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fx(const std::string& name) { return "'" + oracle::fixture(name).string() + "'"; }

}  // namespace

TEST_CASE("exit codes") {
  auto dir = oracle::scratch_dir("cli_codes");
  write_file(dir / "gold.nwk", "((a,b),(c,d),e);\n");
  write_file(dir / "inferred.nwk", "(((a,c),b),(d,e));\n");
  write_file(dir / "broken.nwk", "((a,b),(c,d);\n");
  std::string g = "'" + (dir / "gold.nwk").string() + "'", i = "'" + (dir / "inferred.nwk").string() + "'";

  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("gqd --gold " + g).code == 1);
  CHECK(cli("gqd --inferred " + i + " --gold " + g + " --star-policy sometimes").code == 1);

  Outcome ok = cli("gqd --inferred " + i + " --gold " + g);
  CHECK(ok.code == 0);
  auto want = oracle::brute_force_gqd(cogforge::tree::parse_newick("(((a,c),b),(d,e));"),
                                      cogforge::tree::parse_newick("((a,b),(c,d),e);"), false);
  CHECK(ok.output.find("5\t" + std::to_string(want.resolved) + "\t" + std::to_string(want.contradicted)) !=
        std::string::npos);

  Outcome bad = cli("gqd --inferred '" + (dir / "broken.nwk").string() + "' --gold " + g);
  CHECK(bad.code == 2);
  CHECK(bad.output.find("broken.nwk") != std::string::npos);
  CHECK(cli("gqd --inferred '" + (dir / "missing.nwk").string() + "' --gold " + g).code == 2);
}

TEST_CASE("subcommands on the fixtures") {
  auto dir = oracle::scratch_dir("cli_run");

  Outcome t = cli("transcribe --rules " + fx("g2p") + " --lang stan1295 Hand Stein");
  CHECK(t.code == 0);
  CHECK(t.output == "Hand\thant\nStein\tʃtaɪ̯n\n");

  Outcome tok = cli("tokenize --sound-classes 'ˈaːt' 'at͡sa'");
  CHECK(tok.code == 0);
  CHECK(tok.output.find("aː t") != std::string::npos);
  CHECK(tok.output.find("a t͡s a") != std::string::npos);
  CHECK(cli("tokenize --strict 'h@nd'").code == 2);

  Outcome rev = cli("reveng --pairs " + fx("transcription_pairs.tsv") + " --tokenization " + fx("tokenization.tsv"));
  CHECK(rev.code == 0);
  CHECK(rev.output.find("glottocode\tn\te1\te2\tuntokenizable\tflag") != std::string::npos);
  CHECK(rev.output.find("tokenization_error_rate\t0\n") != std::string::npos);

  std::string out = "'" + dir.string() + "'";
  Outcome run = cli("run --config " + fx("pipeline.conf") + " --output " + out + "/toy");
  CHECK(run.code == 0);
  CHECK(run.output.find("WARN materialize: ") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "toy" / "manifest.txt"));

  CHECK(cli("cluster --wordlist " + out + "/toy/wordlist.tsv --out " + out + "/cog.tsv").code == 0);
  CHECK(read_file(dir / "cog.tsv") == read_file(dir / "toy" / "cognates.tsv"));
  CHECK(cli("encode --wordlist " + out + "/cog.tsv --output-dir " + out + "/enc").code == 0);
  CHECK(read_file(dir / "enc" / "matrix.phy") == read_file(dir / "toy" / "matrix.phy"));
  Outcome stats = cli("stats --wordlist " + out + "/toy/wordlist.tsv --name toy");
  CHECK(stats.code == 0);
  CHECK(stats.output == read_file(dir / "toy" / "stats.tsv"));
  CHECK(cli("sparsity --wordlist " + out + "/toy/wordlist.tsv --svg " + out + "/s.svg").code == 0);
  CHECK(read_file(dir / "s.svg") == read_file(dir / "toy" / "sparsity.svg"));

  Outcome sel = cli("select --dump " + fx("toy_dump.jsonl") + " --language-map " + fx("language_map.csv") +
                    " --concept-list " + fx("concepts.txt"));
  CHECK(sel.code == 0);
  CHECK(sel.output.find("bn:00000001n") != std::string::npos);

  CHECK(cli("ingest --dump " + fx("toy_dump.jsonl") + " --language-map " + fx("language_map.csv")).code == 0);
  CHECK(cli("run --config '" + (dir / "nope.conf").string() + "'").code == 2);
}
