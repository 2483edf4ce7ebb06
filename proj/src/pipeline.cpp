#include "cogforge/pipeline.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "cogforge/corpus.hpp"
#include "cogforge/error.hpp"
#include "cogforge/g2p.hpp"
#include "cogforge/ipa.hpp"
#include "cogforge/matrix.hpp"
#include "cogforge/select.hpp"
#include "cogforge/text_io.hpp"

namespace cogforge::pipeline {
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKeys{
    "name",     "dump",      "wordlist",  "language_map",  "concept_list", "g2p_dir",    "classes",
    "scoring",  "gold_tree", "inferred_tree", "output",    "languages",    "use_g2p",    "k",
    "method",   "threshold", "runs",      "seed",          "drop_constant", "star_policy"};

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw UsageError("config key " + key + ": expected true or false, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("config key " + key + ": expected a number, got '" + v + "'");
  return out;
}

void require_exists(const std::optional<fs::path>& p, std::string_view key) {
  if (p && !fs::exists(*p)) throw UsageError(std::string(key) + " does not exist: " + p->string());
}

// Stage-tagged error with the category of the original failure.
[[noreturn]] void rethrow_in_stage(const std::string& stage) {
  try {
    throw;
  } catch (const UsageError& e) {
    throw UsageError(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(stage + ": " + e.what());
  }
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view content) {
    text_io::write_file(dir_ / (name + ".partial"), content);
    names_.push_back(name);
  }

  void commit() {
    for (const auto& n : names_) fs::rename(dir_ / (n + ".partial"), dir_ / n);
  }

  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

const std::vector<std::string> kArtifactNames{
    "selected.tsv", "availability.tsv", "wordlist.tsv", "cognates.tsv", "matrix.phy", "matrix.nex",
    "columns.tsv",  "stats.tsv",        "sparsity.svg", "sparsity.tsv", "inferred.nwk", "gqd.tsv",
    "manifest.txt"};

}  // namespace

void PipelineConfig::validate() const {
  if (dump.has_value() == wordlist.has_value()) throw UsageError("set exactly one of dump or wordlist");
  if (dump && !language_map) throw UsageError("a synset dump needs a language_map");
  if (use_g2p && !g2p_dir) throw UsageError("use_g2p needs g2p_dir");
  if (concept_list && !dump) throw UsageError("concept_list applies to synset dumps only");
  if (inferred_tree && !gold_tree) throw UsageError("inferred_tree needs gold_tree");
  if (output.empty()) throw UsageError("output directory not set");
  if (k < 1) throw UsageError("k must be at least 1");
  cluster.validate();
  require_exists(dump, "dump");
  require_exists(wordlist, "wordlist");
  require_exists(language_map, "language_map");
  require_exists(concept_list, "concept_list");
  require_exists(g2p_dir, "g2p_dir");
  require_exists(classes, "classes");
  require_exists(scoring, "scoring");
  require_exists(gold_tree, "gold_tree");
  require_exists(inferred_tree, "inferred_tree");
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("<config>", e.line(), e.message());
  }

  PipelineConfig c;
  auto path_of = [&](const std::string& v) {
    fs::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw UsageError("config sections are not supported: [" + key + "]");
    if (!kKeys.count(key)) throw UsageError("unknown config key '" + key + "'");
    const std::string v = node.data();
    if (key == "name") c.name = v;
    else if (key == "dump") c.dump = path_of(v);
    else if (key == "wordlist") c.wordlist = path_of(v);
    else if (key == "language_map") c.language_map = path_of(v);
    else if (key == "concept_list") c.concept_list = path_of(v);
    else if (key == "g2p_dir") c.g2p_dir = path_of(v);
    else if (key == "classes") c.classes = path_of(v);
    else if (key == "scoring") c.scoring = path_of(v);
    else if (key == "gold_tree") c.gold_tree = path_of(v);
    else if (key == "inferred_tree") c.inferred_tree = path_of(v);
    else if (key == "output") c.output = path_of(v);
    else if (key == "languages") {
      if (v != "all")
        for (auto& l : text_io::split(v, ',')) {
          std::string t(text_io::trim(l));
          if (!t.empty()) c.languages.push_back(t);
        }
    } else if (key == "use_g2p") c.use_g2p = parse_bool(key, v);
    else if (key == "k") c.k = parse_number<std::size_t>(key, v);
    else if (key == "method") c.cluster.method = cognate::parse_method(v);
    else if (key == "threshold") c.cluster.threshold = parse_number<double>(key, v);
    else if (key == "runs") c.cluster.lexstat.runs = parse_number<std::size_t>(key, v);
    else if (key == "seed") c.cluster.lexstat.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "drop_constant") c.drop_constant = parse_bool(key, v);
    else if (key == "star_policy") c.star_policy = tree::parse_star_policy(v);
  }
  if (c.scoring) {
    require_exists(c.scoring, "scoring");
    c.cluster.scheme = cognate::ScoringScheme::load(*c.scoring);
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(text_io::read_file(path), path.parent_path());
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(text_io::read_file(path)); }

RunResult run_pipeline(const PipelineConfig& config, std::string_view config_text, const harness::WarningSink& warn) {
  config.validate();
  auto warning = [&](const std::string& stage, const std::string& msg) {
    if (warn) warn(stage + ": " + msg);
  };

  fs::create_directories(config.output);
  for (const auto& n : kArtifactNames) {
    fs::remove(config.output / n);
    fs::remove(config.output / (n + ".partial"));
  }
  ArtifactWriter out(config.output);

  ipa::SoundClassTable classes;
  std::map<std::string, std::vector<g2p::Ruleset>> rulesets;
  try {
    classes = config.classes ? ipa::SoundClassTable::load(*config.classes) : ipa::SoundClassTable::load_default();
    if (config.g2p_dir) rulesets = g2p::load_ruleset_dir(*config.g2p_dir);
  } catch (...) {
    rethrow_in_stage("load");
  }

  Wordlist wordlist;
  if (config.dump) {
    SynsetStore store;
    try {
      store = select::filter_concept_synsets(load_synset_dump(*config.dump));
      store = resolve_store(store, load_language_map(*config.language_map));
    } catch (...) {
      rethrow_in_stage("ingest");
    }

    select::SelectionParams params;
    std::vector<select::SelectedSynset> selected;
    std::set<std::string> g2p_supported;
    try {
      if (config.languages.empty())
        params.languages = store.glottocodes();
      else
        params.languages = {config.languages.begin(), config.languages.end()};
      params.use_g2p = config.use_g2p;
      params.k = config.k;
      params.validate();
      if (config.use_g2p)
        for (const auto& [code, list] : rulesets)
          if (params.languages.count(code)) g2p_supported.insert(code);

      auto counts = select::availability_counts(store, params, g2p_supported);
      for (const auto& c : counts)
        if (c.n_ipa > c.n_ipa_or_g2p) throw DataError("availability count mismatch for " + c.synset_id);
      out.write("availability.tsv",
                select::format_histogram(select::availability_histogram(counts, config.use_g2p)));

      std::string table = "CONCEPT\tSYNSET\tN_IPA\tN_IPA_OR_G2P\n";
      if (config.concept_list) {
        auto list = select::parse_concept_list(text_io::read_file(*config.concept_list));
        for (const auto& sel : select::select_by_concept_list(store, list, params, g2p_supported)) {
          if (!sel.synset_id) {
            warning("select", "concept '" + sel.meaning + "' matched no synset");
            continue;
          }
          selected.push_back({sel.meaning, *sel.synset_id});
        }
      } else {
        for (const auto& id : select::select_top_k(counts, params)) selected.push_back({id, id});
      }
      for (const auto& s : selected) {
        auto c = select::count_availability(*store.find(s.synset_id), params, g2p_supported);
        table += s.meaning + "\t" + s.synset_id + "\t" + std::to_string(c.n_ipa) + "\t" +
                 std::to_string(c.n_ipa_or_g2p) + "\n";
      }
      out.write("selected.tsv", table);
    } catch (...) {
      rethrow_in_stage("select");
    }

    try {
      auto m = select::materialize_wordlist(store, selected, params, rulesets, g2p_supported);
      if (m.drops.invalid_dump_ipa)
        warning("materialize", std::to_string(m.drops.invalid_dump_ipa) + " rows dropped: dump IPA failed tokenization");
      if (m.drops.invalid_g2p_ipa)
        warning("materialize", std::to_string(m.drops.invalid_g2p_ipa) + " rows dropped: G2P output failed tokenization");
      if (m.drops.no_ipa) warning("materialize", std::to_string(m.drops.no_ipa) + " rows dropped: no IPA source");
      wordlist = std::move(m.wordlist);
    } catch (...) {
      rethrow_in_stage("materialize");
    }
  } else {
    try {
      Wordlist loaded = load_wordlist(*config.wordlist);
      std::set<std::string> keep(config.languages.begin(), config.languages.end());
      for (WordRow row : loaded.rows()) {
        if (!keep.empty() && !keep.count(row.doculect)) continue;
        if (!row.tokens) {
          if (!row.ipa) throw DataError("row " + std::to_string(row.row_id) + " has no IPA to tokenize");
          row.tokens = ipa::tokenize(*row.ipa, {true, false});
        }
        wordlist.add(std::move(row));
      }
    } catch (...) {
      rethrow_in_stage("ingest");
    }
  }
  if (wordlist.empty()) throw DataError("materialize: the wordlist is empty");
  out.write("wordlist.tsv", format_wordlist(wordlist));

  // Concept-list wordlists are too small per language to cluster.
  const bool stats_only = config.concept_list.has_value();
  if (stats_only) warning("cluster", "concept-list run: statistics only, no cognates, matrices or inferred tree");

  Wordlist cognates;
  matrix::CharacterMatrix m;
  if (!stats_only) try {
    cognates = cognate::assign_cognates(wordlist, config.cluster, classes);
  } catch (...) {
    rethrow_in_stage("cluster");
  }
  if (!stats_only) out.write("cognates.tsv", format_wordlist(cognates));

  if (!stats_only) try {
    m = matrix::encode_binary(cognates);
    if (config.drop_constant) {
      auto dropped = matrix::drop_constant_columns(m);
      if (!dropped.removed.empty())
        warning("encode", std::to_string(dropped.removed.size()) + " constant columns dropped");
      m = std::move(dropped.matrix);
    }
    out.write("matrix.phy", matrix::format_phylip(m));
    out.write("matrix.nex", matrix::format_nexus(m));
    out.write("columns.tsv", matrix::format_columns_meta(m));
  } catch (...) {
    rethrow_in_stage("encode");
  }

  try {
    out.write("stats.tsv", matrix::format_stats(matrix::dataset_stats(wordlist), config.name));
    auto grid = matrix::sparsity_grid(wordlist);
    out.write("sparsity.svg", grid.to_svg());
    out.write("sparsity.tsv", grid.to_tsv());
  } catch (...) {
    rethrow_in_stage("stats");
  }

  if (config.gold_tree && (!stats_only || config.inferred_tree)) {
    try {
      tree::Tree gold = tree::load_newick(*config.gold_tree);
      tree::Tree inferred;
      if (config.inferred_tree) {
        inferred = tree::load_newick(*config.inferred_tree);
      } else {
        inferred = tree::nj_tree(tree::hamming_matrix(m));
        out.write("inferred.nwk", tree::to_newick(inferred) + "\n");
      }
      std::set<std::string> common, gold_leaves = gold.leaf_set();
      for (const auto& l : inferred.leaf_set())
        if (gold_leaves.count(l)) common.insert(l);
      if (common.size() < gold_leaves.size())
        warning("gqd", std::to_string(gold_leaves.size() - common.size()) + " gold leaves missing from the data");
      auto r = tree::gq_distance(tree::prune_to(inferred, common), tree::prune_to(gold, common), config.star_policy);
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.value());
      out.write("gqd.tsv", "dataset\tn_languages\tresolved_quartets\tcontradicted_quartets\tgq_distance\n" +
                               config.name + "\t" + std::to_string(common.size()) + "\t" +
                               std::to_string(r.resolved) + "\t" + std::to_string(r.contradicted) + "\t" +
                               std::string(buf, ptr) + "\n");
    } catch (...) {
      rethrow_in_stage("gqd");
    }
  }

  std::string manifest = std::string("version\t") + COGFORGE_VERSION + "\n";
  manifest += "seed\t" + std::to_string(config.cluster.lexstat.seed) + "\n";
  manifest += "method\t" + std::string(cognate::method_name(config.cluster.method)) + "\n";
  manifest += "config_sha256\t" + sha256_hex(config_text) + "\n";
  for (const auto& n : out.names()) manifest += n + "\t" + sha256_file(out.dir() / (n + ".partial")) + "\n";
  out.write("manifest.txt", manifest);
  out.commit();
  return {out.names()};
}

}  // namespace cogforge::pipeline
