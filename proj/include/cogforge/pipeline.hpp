#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogforge/cognate.hpp"
#include "cogforge/harness.hpp"
#include "cogforge/tree.hpp"

// End-to-end run from a synset dump or a wordlist to matrices, statistics
// and tree scores.
namespace cogforge::pipeline {

struct PipelineConfig {
  std::string name = "dataset";
  // Exactly one of dump / wordlist.
  std::optional<std::filesystem::path> dump;
  std::optional<std::filesystem::path> wordlist;
  std::optional<std::filesystem::path> language_map;
  std::optional<std::filesystem::path> concept_list;
  std::optional<std::filesystem::path> g2p_dir;
  std::optional<std::filesystem::path> classes;
  std::optional<std::filesystem::path> scoring;
  std::optional<std::filesystem::path> gold_tree;
  std::optional<std::filesystem::path> inferred_tree;
  std::filesystem::path output;
  std::vector<std::string> languages;  // empty means every language available
  bool use_g2p = false;
  std::size_t k = 5000;
  bool drop_constant = false;
  tree::StarPolicy star_policy = tree::StarPolicy::exclude;
  cognate::ClusterParams cluster;

  /// Option consistency plus existence of every referenced input.
  void validate() const;
};

/// `key = value` lines; `#` and `;` start comments. Relative paths resolve
/// against `base_dir`.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct RunResult {
  std::vector<std::string> artifacts;  // file names under the output directory, manifest last
};

/// Runs every stage. Artifacts are written with a `.partial` suffix and only
/// renamed once all stages succeed; a failing stage raises an error naming
/// the stage. `config_text` is hashed into the manifest.
RunResult run_pipeline(const PipelineConfig& config, std::string_view config_text,
                       const harness::WarningSink& warn = {});

}  // namespace cogforge::pipeline
