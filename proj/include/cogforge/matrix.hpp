#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogforge/corpus.hpp"

// Binary presence/absence encoding of cognate classes plus the coverage
// statistics computed on wordlists.
namespace cogforge::matrix {

enum class Cell : char { zero = '0', one = '1', missing = '?' };

struct Column {
  std::string meaning;
  std::int64_t cogid = 0;
  bool operator==(const Column&) const = default;
};

class CharacterMatrix {
 public:
  CharacterMatrix() = default;
  CharacterMatrix(std::vector<std::string> taxa, std::vector<Column> columns,
                  std::vector<std::vector<Cell>> cells);

  const std::vector<std::string>& taxa() const { return taxa_; }
  const std::vector<Column>& columns() const { return columns_; }
  Cell at(std::size_t taxon, std::size_t column) const { return cells_[taxon][column]; }
  const std::vector<Cell>& row(std::size_t taxon) const { return cells_[taxon]; }
  std::size_t n_taxa() const { return taxa_.size(); }
  std::size_t n_columns() const { return columns_.size(); }
  std::string row_string(std::size_t taxon) const;

  /// Checks the per-concept group invariants: one '1' per taxon with data,
  /// '?' across the whole group otherwise, no all-'?' column.
  void validate_groups() const;

  bool operator==(const CharacterMatrix&) const = default;

 private:
  std::vector<std::string> taxa_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> cells_;
};

/// Columns per (concept, cogid): concepts in wordlist order, cogids ascending.
/// Taxa in wordlist doculect order.
CharacterMatrix encode_binary(const Wordlist& wordlist);

/// (taxon, concept) -> cogid, read back from the matrix and its columns.
std::map<std::pair<std::string, std::string>, std::int64_t> decode_partition(const CharacterMatrix& matrix);

struct DropReport {
  CharacterMatrix matrix;
  std::vector<Column> removed;
};

/// Removes columns whose non-'?' cells are all equal.
DropReport drop_constant_columns(const CharacterMatrix& matrix);

/// Mean over doculect pairs of shared concepts / all concepts.
double amc(const Wordlist& wordlist);

struct DatasetStats {
  std::size_t n_languages = 0;
  std::size_t n_synsets = 0;
  double languages_per_synset = 0.0;
  double synsets_per_language = 0.0;
  double amc = 0.0;
};

DatasetStats dataset_stats(const Wordlist& wordlist);
/// `#langs.  #synsets  #langs. per synset  #synsets per lang.  AMC` as TSV.
std::string format_stats(const DatasetStats& stats, std::string_view label = {});

struct SparsityGrid {
  std::vector<std::string> languages;
  std::vector<std::string> concepts;
  std::vector<std::vector<bool>> filled;  // [language][concept]

  std::size_t filled_count() const;
  std::string to_tsv() const;
  std::string to_svg(int cell_size = 4) const;
};

/// Filled cell wherever the wordlist has a row for (language, concept). Empty
/// orders default to the wordlist's own order.
SparsityGrid sparsity_grid(const Wordlist& wordlist, const std::vector<std::string>& language_order = {},
                           const std::vector<std::string>& concept_order = {});

std::string format_phylip(const CharacterMatrix& matrix);
std::string format_nexus(const CharacterMatrix& matrix);
std::string format_columns_meta(const CharacterMatrix& matrix);

void write_phylip(const CharacterMatrix& matrix, const std::filesystem::path& path);
void write_nexus(const CharacterMatrix& matrix, const std::filesystem::path& path);
void write_columns_meta(const CharacterMatrix& matrix, const std::filesystem::path& path);

/// Readers return a matrix with placeholder column metadata (empty concept,
/// cogid = column index) unless `columns` are supplied.
CharacterMatrix parse_phylip(std::string_view text, const std::vector<Column>& columns = {});
CharacterMatrix parse_nexus(std::string_view text, const std::vector<Column>& columns = {});
std::vector<Column> parse_columns_meta(std::string_view text);

}  // namespace cogforge::matrix
