#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cogforge/cognate.hpp"
#include "cogforge/corpus.hpp"
#include "cogforge/error.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/harness.hpp"
#include "cogforge/ipa.hpp"
#include "cogforge/matrix.hpp"
#include "cogforge/pipeline.hpp"
#include "cogforge/select.hpp"
#include "cogforge/text_io.hpp"
#include "cogforge/tree.hpp"

namespace fs = std::filesystem;
using namespace cogforge;

namespace {

harness::WarningSink warn_for(const std::string& stage) {
  return [stage](const std::string& msg) { std::cerr << "WARN " << stage << ": " << msg << "\n"; };
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-")
    std::cout << text;
  else
    text_io::write_file(output, text);
}

std::vector<std::string> read_inputs(const std::vector<std::string>& args, const std::string& input) {
  std::vector<std::string> out = args;
  if (!input.empty())
    for (const auto& line : text_io::lines(text_io::read_file(input)))
      if (!text_io::trim(line).empty()) out.push_back(line);
  if (out.empty()) throw UsageError("nothing to process: pass arguments or --input");
  return out;
}

struct ClusterOptions {
  std::string method = "sca";
  std::optional<double> threshold;
  std::size_t runs = 1000;
  std::uint64_t seed = 42;
  std::string classes;
  std::string scoring;

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "sca or lexstat")->capture_default_str();
    app->add_option("--threshold", threshold, "merge threshold in (0,1]");
    app->add_option("--runs", runs, "lexstat shuffles")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--classes", classes, "sound-class table CSV");
    app->add_option("--scoring", scoring, "scoring scheme CSV");
  }

  cognate::ClusterParams params() const {
    cognate::ClusterParams p;
    p.method = cognate::parse_method(method);
    p.threshold = threshold;
    p.lexstat.runs = runs;
    p.lexstat.seed = seed;
    if (!scoring.empty()) p.scheme = cognate::ScoringScheme::load(scoring);
    p.validate();
    return p;
  }

  ipa::SoundClassTable table() const {
    return classes.empty() ? ipa::SoundClassTable::load_default() : ipa::SoundClassTable::load(classes);
  }
};

std::set<std::string> parse_languages(const std::string& list, const SynsetStore& store) {
  if (list.empty() || list == "all") return store.glottocodes();
  std::set<std::string> out;
  for (const auto& l : text_io::split(list, ','))
    if (!text_io::trim(l).empty()) out.emplace(text_io::trim(l));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cognate detection and phylogenetic signal toolkit"};
  app.set_version_flag("--version", std::string(COGFORGE_VERSION));
  app.require_subcommand(1);

  // ingest
  std::string dump, language_map, output;
  auto* ingest = app.add_subcommand("ingest", "Validate a synset dump and resolve its languages");
  ingest->add_option("--dump", dump, "JSONL synset dump")->required();
  ingest->add_option("--language-map", language_map, "iso,glottocode,priority CSV")->required();
  ingest->add_option("-o,--output", output, "write the resolved dump here");

  // select
  std::string languages, g2p_dir, concept_list, histogram, wordlist_out;
  bool use_g2p = false;
  std::size_t k = 5000;
  auto* sel = app.add_subcommand("select", "Pick synsets and optionally materialize a wordlist");
  std::string mode;
  sel->add_option("--mode", mode, "topk or conceptlist (default: conceptlist when --concept-list is given)");
  sel->add_option("--dump", dump)->required();
  sel->add_option("--language-map", language_map)->required();
  sel->add_option("--languages", languages, "comma-separated glottocodes or 'all'");
  sel->add_option("--g2p-dir", g2p_dir, "directory of G2P rulesets");
  sel->add_flag("--use-g2p", use_g2p, "count G2P-transcribable senses");
  sel->add_option("--k", k, "number of synsets")->capture_default_str();
  sel->add_option("--concept-list", concept_list, "one English lemma per line");
  sel->add_option("--histogram", histogram, "write the availability histogram here");
  sel->add_option("--wordlist", wordlist_out, "write the materialized wordlist here");
  sel->add_option("-o,--output", output, "selected synsets TSV");

  // transcribe
  std::string rules_dir, lang, unknown = "pass-through", input;
  std::vector<std::string> words;
  auto* transcribe = app.add_subcommand("transcribe", "Rule-based grapheme-to-phoneme transcription");
  transcribe->alias("g2p");
  std::string map_path, pre_path, post_path;
  transcribe->add_option("--rules", rules_dir, "ruleset directory (with --lang)");
  transcribe->add_option("--lang", lang, "language code");
  transcribe->add_option("--map", map_path, "single orth,phon map CSV");
  transcribe->add_option("--pre", pre_path, "pre-rule file for --map");
  transcribe->add_option("--post", post_path, "post-rule file for --map");
  transcribe->add_option("-o,--output,--out", output);
  transcribe->add_option("--unknown", unknown, "strict, pass-through or drop")->capture_default_str();
  transcribe->add_option("--input,--in", input, "file with one word per line");
  transcribe->add_option("words", words);

  // tokenize
  bool strict = false, merge = false, show_classes = false;
  std::string classes_path;
  auto* tokenize = app.add_subcommand("tokenize", "Split IPA strings into segments");
  tokenize->add_flag("--strict", strict, "reject symbols outside the IPA inventory");
  tokenize->add_flag("--merge-diphthongs", merge, "merge adjacent vowels");
  tokenize->add_flag("--sound-classes", show_classes, "also print sound classes");
  tokenize->add_option("--classes", classes_path, "sound-class table CSV (implies --sound-classes)");
  tokenize->add_option("--input,--in", input, "file with one IPA string per line");
  tokenize->add_option("-o,--output,--out", output);
  tokenize->add_option("strings", words);

  // cluster
  std::string wordlist_path;
  bool synonyms = false;
  ClusterOptions cluster_opts;
  auto* cluster = app.add_subcommand("cluster", "Assign cognate classes");
  cluster->add_option("--wordlist,--in", wordlist_path)->required();
  cluster->add_flag("--synonyms", synonyms, "allow several rows per doculect and concept");
  cluster->add_option("-o,--output,--out", output, "cognate wordlist TSV");
  cluster_opts.add_to(cluster);

  // encode
  bool drop_constant = false;
  std::string out_dir;
  auto* encode = app.add_subcommand("encode", "Binary character matrix from cognate classes");
  encode->add_option("--wordlist", wordlist_path)->required();
  encode->add_option("--output-dir", out_dir)->required();
  encode->add_flag("--drop-constant", drop_constant, "remove constant columns");

  // stats
  std::string name = "dataset";
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--wordlist", wordlist_path)->required();
  stats->add_option("--name", name)->capture_default_str();
  stats->add_option("-o,--output", output);

  // sparsity
  std::string svg_path, tsv_path;
  auto* sparsity = app.add_subcommand("sparsity", "Language by concept coverage grid");
  sparsity->add_option("--wordlist", wordlist_path)->required();
  sparsity->add_option("--svg", svg_path)->required();
  sparsity->add_option("--tsv", tsv_path);

  // gqd
  std::string inferred_path, gold_path, star_policy = "exclude";
  auto* gqd = app.add_subcommand("gqd", "Generalized quartet distance");
  gqd->add_option("--inferred", inferred_path)->required();
  gqd->add_option("--gold", gold_path)->required();
  gqd->add_option("--star-policy", star_policy, "exclude or contradict")->capture_default_str();

  // reveng
  std::string pairs_path, token_pairs_path;
  bool pretty = false;
  auto* reveng = app.add_subcommand("reveng", "Transcription and tokenization error rates");
  reveng->add_option("--pairs", pairs_path, "TSV GLOTTOCODE REFERENCE CANDIDATE");
  reveng->add_option("--tokenization", token_pairs_path, "TSV IPA TOKENS");
  reveng->add_option("--classes", classes_path, "sound-class table CSV");
  reveng->add_flag("--pretty", pretty, "rates as percentages");
  reveng->add_flag("--merge-diphthongs", merge, "merge adjacent vowels when tokenizing");
  reveng->add_option("-o,--output", output);

  // ablate
  std::string trees_dir;
  auto* ablate = app.add_subcommand("ablate", "Compare original and automatic transcription/tokenization");
  ablate->add_option("--wordlist", wordlist_path, "wordlist with reference IPA and TOKENS")->required();
  ablate->add_option("--gold", gold_path)->required();
  ablate->add_option("--g2p-dir", g2p_dir, "rulesets named by doculect")->required();
  ablate->add_option("--trees-dir", trees_dir, "<variant>.nwk trees to score instead of inferring");
  ablate->add_option("--star-policy", star_policy)->capture_default_str();
  ablate->add_option("-o,--output", output);
  cluster_opts.add_to(ablate);

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "Full pipeline from a config file");
  run->add_option("--config", config_path)->required();
  run->add_option("--output", out_dir, "override the configured output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      SynsetStore raw = load_synset_dump(dump);
      SynsetStore resolved = resolve_store(raw, load_language_map(language_map));
      std::size_t senses = 0, kept = 0;
      for (const auto& s : raw.synsets()) senses += s.senses.size();
      for (const auto& s : resolved.synsets()) kept += s.senses.size();
      if (kept < senses) warn_for("ingest")(std::to_string(senses - kept) + " senses in unmapped languages dropped");
      std::cout << "synsets\t" << resolved.size() << "\nsenses\t" << kept << "\nlanguages\t"
                << resolved.glottocodes().size() << "\n";
      if (!output.empty()) text_io::write_file(output, serialize_synset_dump(resolved));
    } else if (*sel) {
      SynsetStore store = resolve_store(select::filter_concept_synsets(load_synset_dump(dump)),
                                        load_language_map(language_map));
      select::SelectionParams params;
      params.languages = parse_languages(languages, store);
      params.use_g2p = use_g2p;
      params.k = k;
      params.validate();
      std::map<std::string, std::vector<g2p::Ruleset>> rulesets;
      std::set<std::string> supported;
      if (use_g2p) {
        if (g2p_dir.empty()) throw UsageError("--use-g2p needs --g2p-dir");
        rulesets = g2p::load_ruleset_dir(g2p_dir);
        for (const auto& [code, list] : rulesets)
          if (params.languages.count(code)) supported.insert(code);
      }
      auto counts = select::availability_counts(store, params, supported);
      if (!histogram.empty())
        text_io::write_file(histogram, select::format_histogram(select::availability_histogram(counts, use_g2p)));
      if (mode.empty()) mode = concept_list.empty() ? "topk" : "conceptlist";
      if (mode != "topk" && mode != "conceptlist") throw UsageError("--mode must be topk or conceptlist");
      if (mode == "conceptlist" && concept_list.empty()) throw UsageError("--mode conceptlist needs --concept-list");
      std::vector<select::SelectedSynset> chosen;
      if (mode == "conceptlist") {
        auto list = select::parse_concept_list(text_io::read_file(concept_list));
        for (const auto& c : select::select_by_concept_list(store, list, params, supported)) {
          if (c.synset_id)
            chosen.push_back({c.meaning, *c.synset_id});
          else
            warn_for("select")("concept '" + c.meaning + "' matched no synset");
        }
      } else {
        for (const auto& id : select::select_top_k(counts, params)) chosen.push_back({id, id});
      }
      std::string table = "CONCEPT\tSYNSET\n";
      for (const auto& c : chosen) table += c.meaning + "\t" + c.synset_id + "\n";
      emit(table, output);
      if (!wordlist_out.empty()) {
        auto m = select::materialize_wordlist(store, chosen, params, rulesets, supported);
        if (m.drops.total()) warn_for("select")(std::to_string(m.drops.total()) + " rows dropped");
        write_wordlist(m.wordlist, wordlist_out);
      }
    } else if (*transcribe) {
      std::vector<g2p::Ruleset> chain;
      if (!map_path.empty()) {
        if (!rules_dir.empty()) throw UsageError("use either --map or --rules, not both");
        auto opt = [](const std::string& p) { return p.empty() ? std::nullopt : std::optional<fs::path>(p); };
        chain.push_back(g2p::compile_ruleset(map_path, opt(pre_path), opt(post_path)));
      } else {
        if (rules_dir.empty() || lang.empty()) throw UsageError("pass --map, or --rules with --lang");
        auto all = g2p::load_ruleset_dir(rules_dir);
        auto it = all.find(lang);
        if (it == all.end()) throw DataError("no ruleset for " + lang + " in " + rules_dir);
        chain = it->second;
      }
      auto policy = g2p::parse_unknown_policy(unknown);
      std::string text;
      std::size_t unmapped = 0;
      for (const auto& w : read_inputs(words, input)) {
        auto t = g2p::backoff_transcribe(chain, w, policy);
        unmapped += t.unmapped;
        text += w + "\t" + t.ipa + "\n";
      }
      if (unmapped) warn_for("transcribe")(std::to_string(unmapped) + " characters had no mapping");
      emit(text, output);
    } else if (*tokenize) {
      std::optional<ipa::SoundClassTable> table;
      if (show_classes || !classes_path.empty())
        table = classes_path.empty() ? ipa::SoundClassTable::load_default() : ipa::SoundClassTable::load(classes_path);
      std::string text;
      for (const auto& s : read_inputs(words, input)) {
        auto tokens = ipa::tokenize(s, {strict, merge});
        text += text_io::join(tokens, " ");
        if (table) text += "\t" + ipa::to_sound_classes(tokens, *table, false);
        text += "\n";
      }
      emit(text, output);
    } else if (*cluster) {
      Wordlist w = load_wordlist(wordlist_path, synonyms);
      Wordlist out = cognate::assign_cognates(w, cluster_opts.params(), cluster_opts.table());
      emit(format_wordlist(out), output);
    } else if (*encode) {
      auto m = matrix::encode_binary(load_wordlist(wordlist_path));
      if (drop_constant) {
        auto d = matrix::drop_constant_columns(m);
        if (!d.removed.empty()) warn_for("encode")(std::to_string(d.removed.size()) + " constant columns dropped");
        m = std::move(d.matrix);
      }
      fs::create_directories(out_dir);
      matrix::write_phylip(m, fs::path(out_dir) / "matrix.phy");
      matrix::write_nexus(m, fs::path(out_dir) / "matrix.nex");
      matrix::write_columns_meta(m, fs::path(out_dir) / "columns.tsv");
    } else if (*stats) {
      emit(matrix::format_stats(matrix::dataset_stats(load_wordlist(wordlist_path, true)), name), output);
    } else if (*sparsity) {
      auto grid = matrix::sparsity_grid(load_wordlist(wordlist_path, true));
      text_io::write_file(svg_path, grid.to_svg());
      if (!tsv_path.empty()) text_io::write_file(tsv_path, grid.to_tsv());
    } else if (*gqd) {
      auto r = tree::gq_distance(tree::load_newick(inferred_path), tree::load_newick(gold_path),
                                 tree::parse_star_policy(star_policy));
      std::cout << "quartets\tresolved\tcontradicted\tgq_distance\n"
                << r.quartets << "\t" << r.resolved << "\t" << r.contradicted << "\t" << r.value() << "\n";
    } else if (*reveng) {
      if (pairs_path.empty() && token_pairs_path.empty()) throw UsageError("pass --pairs and/or --tokenization");
      std::string text;
      ipa::TokenizeOptions opts{false, merge};
      if (!pairs_path.empty()) {
        auto table = classes_path.empty() ? ipa::SoundClassTable::load_default() : ipa::SoundClassTable::load(classes_path);
        auto rows = harness::error_rate_report(
            harness::parse_transcription_pairs(text_io::read_file(pairs_path), pairs_path), opts, table);
        text += harness::format_error_report(rows, pretty);
      }
      if (!token_pairs_path.empty()) {
        double rate = harness::tokenization_error_rate(
            harness::parse_tokenization_pairs(text_io::read_file(token_pairs_path), token_pairs_path), opts);
        std::ostringstream line;
        line << "# word-level tokenization error rate\ntokenization_error_rate\t" << rate << "\n";
        text += line.str();
      }
      emit(text, output);
    } else if (*ablate) {
      harness::AblationInput in{load_wordlist(wordlist_path),
                                g2p::load_ruleset_dir(g2p_dir),
                                tree::load_newick(gold_path),
                                cluster_opts.params(),
                                cluster_opts.table(),
                                trees_dir.empty() ? std::nullopt : std::optional<fs::path>(trees_dir),
                                tree::parse_star_policy(star_policy)};
      emit(harness::format_ablation(harness::ablate(in, warn_for("ablate"))), output);
    } else if (*run) {
      std::string text = text_io::read_file(config_path);
      auto config = pipeline::parse_config(text, fs::path(config_path).parent_path());
      if (!out_dir.empty()) config.output = out_dir;
      auto result = pipeline::run_pipeline(config, text, [](const std::string& msg) {
        std::cerr << "WARN " << msg << "\n";
      });
      for (const auto& a : result.artifacts) std::cout << (config.output / a).string() << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
