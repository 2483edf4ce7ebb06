#include "cogforge/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include "cogforge/error.hpp"
#include "cogforge/text_io.hpp"

namespace cogforge::matrix {
namespace {

Cell parse_cell(char c, const std::string& source, std::size_t line) {
  switch (c) {
    case '0': return Cell::zero;
    case '1': return Cell::one;
    case '?': return Cell::missing;
    default: throw ParseError(source, line, std::string("unexpected matrix symbol '") + c + "'");
  }
}

void check_taxon_name(const std::string& name) {
  if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
    throw DataError("taxon name '" + name + "' is empty or contains whitespace");
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

CharacterMatrix::CharacterMatrix(std::vector<std::string> taxa, std::vector<Column> columns,
                                 std::vector<std::vector<Cell>> cells)
    : taxa_(std::move(taxa)), columns_(std::move(columns)), cells_(std::move(cells)) {
  if (cells_.size() != taxa_.size()) throw DataError("matrix row count differs from taxon count");
  for (const auto& r : cells_)
    if (r.size() != columns_.size()) throw DataError("matrix row length differs from column count");
  std::set<std::string> seen;
  for (const auto& t : taxa_)
    if (!seen.insert(t).second) throw DataError("duplicate taxon " + t);
}

std::string CharacterMatrix::row_string(std::size_t taxon) const {
  std::string out;
  out.reserve(columns_.size());
  for (Cell c : cells_[taxon]) out.push_back(static_cast<char>(c));
  return out;
}

void CharacterMatrix::validate_groups() const {
  std::size_t start = 0;
  while (start < columns_.size()) {
    std::size_t end = start;
    while (end < columns_.size() && columns_[end].meaning == columns_[start].meaning) ++end;
    for (std::size_t t = 0; t < taxa_.size(); ++t) {
      std::size_t ones = 0, missing = 0;
      for (std::size_t c = start; c < end; ++c) {
        ones += cells_[t][c] == Cell::one;
        missing += cells_[t][c] == Cell::missing;
      }
      bool ok = (missing == end - start && ones == 0) || (missing == 0 && ones == 1);
      if (!ok)
        throw DataError("taxon " + taxa_[t] + " violates the group invariant for concept " + columns_[start].meaning);
    }
    start = end;
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    bool all_missing = std::all_of(cells_.begin(), cells_.end(), [&](const auto& r) { return r[c] == Cell::missing; });
    if (all_missing && !taxa_.empty()) throw DataError("column " + std::to_string(c) + " is all missing");
  }
}

CharacterMatrix encode_binary(const Wordlist& wordlist) {
  const auto& taxa = wordlist.doculects();
  std::map<std::string, std::size_t> taxon_index;
  for (std::size_t i = 0; i < taxa.size(); ++i) taxon_index[taxa[i]] = i;

  std::vector<Column> columns;
  std::vector<std::vector<Cell>> cells(taxa.size());
  for (const std::string& meaning : wordlist.concepts()) {
    std::map<std::size_t, std::int64_t> taxon_cog;
    std::set<std::int64_t> cogids;
    for (std::size_t i : wordlist.rows_for_concept(meaning)) {
      const WordRow& r = wordlist.rows()[i];
      if (!r.cogid) throw DataError("row " + std::to_string(r.row_id) + " has no COGID");
      if (!taxon_cog.emplace(taxon_index.at(r.doculect), *r.cogid).second)
        throw DataError("polymorphism: " + r.doculect + " has several rows for concept " + meaning);
      cogids.insert(*r.cogid);
    }
    for (std::int64_t cog : cogids) {
      columns.push_back({meaning, cog});
      for (std::size_t t = 0; t < taxa.size(); ++t) {
        auto it = taxon_cog.find(t);
        cells[t].push_back(it == taxon_cog.end() ? Cell::missing : (it->second == cog ? Cell::one : Cell::zero));
      }
    }
  }
  return CharacterMatrix(taxa, std::move(columns), std::move(cells));
}

std::map<std::pair<std::string, std::string>, std::int64_t> decode_partition(const CharacterMatrix& matrix) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  for (std::size_t t = 0; t < matrix.n_taxa(); ++t) {
    for (std::size_t c = 0; c < matrix.n_columns(); ++c) {
      if (matrix.at(t, c) != Cell::one) continue;
      const Column& col = matrix.columns()[c];
      if (!out.emplace(std::make_pair(matrix.taxa()[t], col.meaning), col.cogid).second)
        throw DataError("taxon " + matrix.taxa()[t] + " has two classes for " + col.meaning);
    }
  }
  return out;
}

DropReport drop_constant_columns(const CharacterMatrix& matrix) {
  std::vector<std::size_t> keep;
  DropReport report;
  for (std::size_t c = 0; c < matrix.n_columns(); ++c) {
    bool seen0 = false, seen1 = false;
    for (std::size_t t = 0; t < matrix.n_taxa(); ++t) {
      seen0 |= matrix.at(t, c) == Cell::zero;
      seen1 |= matrix.at(t, c) == Cell::one;
    }
    if (seen0 && seen1)
      keep.push_back(c);
    else
      report.removed.push_back(matrix.columns()[c]);
  }
  std::vector<Column> columns;
  for (std::size_t c : keep) columns.push_back(matrix.columns()[c]);
  std::vector<std::vector<Cell>> cells(matrix.n_taxa());
  for (std::size_t t = 0; t < matrix.n_taxa(); ++t)
    for (std::size_t c : keep) cells[t].push_back(matrix.at(t, c));
  report.matrix = CharacterMatrix(matrix.taxa(), std::move(columns), std::move(cells));
  return report;
}

double amc(const Wordlist& wordlist) {
  const auto& docs = wordlist.doculects();
  if (docs.size() < 2) throw DataError("average mutual coverage needs at least two doculects");
  const auto& concepts = wordlist.concepts();
  if (concepts.empty()) throw DataError("average mutual coverage needs at least one concept");

  std::vector<std::vector<bool>> has(docs.size(), std::vector<bool>(concepts.size(), false));
  std::map<std::string, std::size_t> di, ci;
  for (std::size_t i = 0; i < docs.size(); ++i) di[docs[i]] = i;
  for (std::size_t i = 0; i < concepts.size(); ++i) ci[concepts[i]] = i;
  for (const WordRow& r : wordlist.rows()) has[di[r.doculect]][ci[r.meaning]] = true;

  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < docs.size(); ++a) {
    for (std::size_t b = a + 1; b < docs.size(); ++b) {
      std::size_t shared = 0;
      for (std::size_t c = 0; c < concepts.size(); ++c) shared += has[a][c] && has[b][c];
      total += static_cast<double>(shared) / static_cast<double>(concepts.size());
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

DatasetStats dataset_stats(const Wordlist& wordlist) {
  if (wordlist.empty()) throw DataError("statistics of an empty wordlist");
  DatasetStats s;
  s.n_languages = wordlist.doculects().size();
  s.n_synsets = wordlist.concepts().size();
  std::set<std::pair<std::string, std::string>> pairs;
  for (const WordRow& r : wordlist.rows()) pairs.emplace(r.doculect, r.meaning);
  double cells = static_cast<double>(pairs.size());
  s.languages_per_synset = cells / static_cast<double>(s.n_synsets);
  s.synsets_per_language = cells / static_cast<double>(s.n_languages);
  s.amc = amc(wordlist);
  return s;
}

std::string format_stats(const DatasetStats& stats, std::string_view label) {
  std::string out = "dataset\t#langs.\t#synsets\t#langs. per synset\t#synsets per lang.\tAMC\n";
  out += std::string(label.empty() ? "-" : label) + "\t" + std::to_string(stats.n_languages) + "\t" +
         std::to_string(stats.n_synsets) + "\t" + fmt(stats.languages_per_synset, 1) + "\t" +
         fmt(stats.synsets_per_language, 1) + "\t" + fmt(stats.amc, 3) + "\n";
  return out;
}

std::size_t SparsityGrid::filled_count() const {
  std::size_t n = 0;
  for (const auto& r : filled) n += static_cast<std::size_t>(std::count(r.begin(), r.end(), true));
  return n;
}

std::string SparsityGrid::to_tsv() const {
  std::string out = "doculect";
  for (const auto& c : concepts) out += "\t" + c;
  out += "\n";
  for (std::size_t l = 0; l < languages.size(); ++l) {
    out += languages[l];
    for (bool f : filled[l]) out += f ? "\t1" : "\t0";
    out += "\n";
  }
  return out;
}

std::string SparsityGrid::to_svg(int cell_size) const {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << concepts.size() * cell_size << "\" height=\""
      << languages.size() * cell_size << "\" shape-rendering=\"crispEdges\" style=\"background:white\">\n";
  for (std::size_t l = 0; l < languages.size(); ++l)
    for (std::size_t c = 0; c < concepts.size(); ++c)
      if (filled[l][c])
        svg << "<rect x=\"" << c * cell_size << "\" y=\"" << l * cell_size << "\" width=\"" << cell_size
            << "\" height=\"" << cell_size << "\" fill=\"black\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

SparsityGrid sparsity_grid(const Wordlist& wordlist, const std::vector<std::string>& language_order,
                           const std::vector<std::string>& concept_order) {
  SparsityGrid g;
  g.languages = language_order.empty() ? wordlist.doculects() : language_order;
  g.concepts = concept_order.empty() ? wordlist.concepts() : concept_order;
  std::map<std::string, std::size_t> li, ci;
  for (std::size_t i = 0; i < g.languages.size(); ++i) li[g.languages[i]] = i;
  for (std::size_t i = 0; i < g.concepts.size(); ++i) ci[g.concepts[i]] = i;
  for (const auto& d : wordlist.doculects())
    if (!li.count(d)) throw DataError("doculect " + d + " missing from the language order");
  for (const auto& c : wordlist.concepts())
    if (!ci.count(c)) throw DataError("concept " + c + " missing from the concept order");
  g.filled.assign(g.languages.size(), std::vector<bool>(g.concepts.size(), false));
  for (const WordRow& r : wordlist.rows()) g.filled[li[r.doculect]][ci[r.meaning]] = true;
  return g;
}

std::string format_phylip(const CharacterMatrix& matrix) {
  std::string out = std::to_string(matrix.n_taxa()) + " " + std::to_string(matrix.n_columns()) + "\n";
  for (std::size_t t = 0; t < matrix.n_taxa(); ++t) {
    check_taxon_name(matrix.taxa()[t]);
    out += matrix.taxa()[t] + " " + matrix.row_string(t) + "\n";
  }
  return out;
}

std::string format_nexus(const CharacterMatrix& matrix) {
  std::string out = "#NEXUS\nBEGIN DATA;\n";
  out += "\tDIMENSIONS NTAX=" + std::to_string(matrix.n_taxa()) + " NCHAR=" + std::to_string(matrix.n_columns()) + ";\n";
  out += "\tFORMAT DATATYPE=STANDARD SYMBOLS=\"01\" MISSING=?;\n";
  out += "\tMATRIX\n";
  for (std::size_t t = 0; t < matrix.n_taxa(); ++t) {
    check_taxon_name(matrix.taxa()[t]);
    out += "\t" + matrix.taxa()[t] + " " + matrix.row_string(t) + "\n";
  }
  out += "\t;\nEND;\n";
  return out;
}

std::string format_columns_meta(const CharacterMatrix& matrix) {
  std::string out = "COLUMN\tCONCEPT\tCOGID\n";
  for (std::size_t c = 0; c < matrix.n_columns(); ++c)
    out += std::to_string(c) + "\t" + matrix.columns()[c].meaning + "\t" +
           std::to_string(matrix.columns()[c].cogid) + "\n";
  return out;
}

void write_phylip(const CharacterMatrix& matrix, const std::filesystem::path& path) {
  text_io::write_file(path, format_phylip(matrix));
}
void write_nexus(const CharacterMatrix& matrix, const std::filesystem::path& path) {
  text_io::write_file(path, format_nexus(matrix));
}
void write_columns_meta(const CharacterMatrix& matrix, const std::filesystem::path& path) {
  text_io::write_file(path, format_columns_meta(matrix));
}

namespace {

CharacterMatrix assemble(std::vector<std::string> taxa, std::vector<std::vector<Cell>> cells, std::size_t ncols,
                         const std::vector<Column>& columns) {
  std::vector<Column> cols = columns;
  if (cols.empty())
    for (std::size_t c = 0; c < ncols; ++c) cols.push_back({"", static_cast<std::int64_t>(c)});
  if (cols.size() != ncols) throw DataError("column metadata does not match the matrix width");
  return CharacterMatrix(std::move(taxa), std::move(cols), std::move(cells));
}

std::size_t parse_size(std::string_view s, const std::string& source, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(source, line, "expected a count");
  return v;
}

}  // namespace

CharacterMatrix parse_phylip(std::string_view text, const std::vector<Column>& columns) {
  const std::string source = "<phylip>";
  auto lines = text_io::lines(text);
  if (lines.empty()) throw ParseError(source, 1, "empty file");
  std::istringstream header(lines[0]);
  std::string nt, nc;
  header >> nt >> nc;
  std::size_t ntaxa = parse_size(nt, source, 1), ncols = parse_size(nc, source, 1);
  if (lines.size() != ntaxa + 1) throw ParseError(source, lines.size(), "taxon count mismatch");
  std::vector<std::string> taxa;
  std::vector<std::vector<Cell>> cells;
  for (std::size_t i = 1; i <= ntaxa; ++i) {
    auto space = lines[i].find(' ');
    if (space == std::string::npos) throw ParseError(source, i + 1, "expected 'taxon row'");
    taxa.push_back(lines[i].substr(0, space));
    std::string_view row = text_io::trim(std::string_view(lines[i]).substr(space + 1));
    if (row.size() != ncols) throw ParseError(source, i + 1, "row length mismatch");
    std::vector<Cell> r;
    for (char c : row) r.push_back(parse_cell(c, source, i + 1));
    cells.push_back(std::move(r));
  }
  return assemble(std::move(taxa), std::move(cells), ncols, columns);
}

CharacterMatrix parse_nexus(std::string_view text, const std::vector<Column>& columns) {
  const std::string source = "<nexus>";
  auto lines = text_io::lines(text);
  std::size_t ntaxa = 0, ncols = 0;
  bool in_matrix = false;
  std::vector<std::string> taxa;
  std::vector<std::vector<Cell>> cells;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text_io::trim(lines[i]);
    if (line.empty()) continue;
    if (in_matrix) {
      if (line == ";") {
        in_matrix = false;
        continue;
      }
      auto space = line.find(' ');
      if (space == std::string_view::npos) throw ParseError(source, i + 1, "expected 'taxon row'");
      taxa.emplace_back(line.substr(0, space));
      std::string_view row = text_io::trim(line.substr(space + 1));
      std::vector<Cell> r;
      for (char c : row) r.push_back(parse_cell(c, source, i + 1));
      if (r.size() != ncols) throw ParseError(source, i + 1, "row length mismatch");
      cells.push_back(std::move(r));
      continue;
    }
    if (line.rfind("DIMENSIONS", 0) == 0) {
      auto grab = [&](std::string_view key) {
        auto p = line.find(key);
        if (p == std::string_view::npos) throw ParseError(source, i + 1, "missing " + std::string(key));
        auto start = p + key.size();
        auto end = line.find_first_of(" ;", start);
        return parse_size(line.substr(start, end - start), source, i + 1);
      };
      ntaxa = grab("NTAX=");
      ncols = grab("NCHAR=");
    } else if (line == "MATRIX") {
      in_matrix = true;
    }
  }
  if (taxa.size() != ntaxa) throw ParseError(source, lines.size(), "taxon count mismatch");
  return assemble(std::move(taxa), std::move(cells), ncols, columns);
}

std::vector<Column> parse_columns_meta(std::string_view text) {
  const std::string source = "<columns>";
  auto lines = text_io::lines(text);
  if (lines.empty() || lines[0] != "COLUMN\tCONCEPT\tCOGID") throw ParseError(source, 1, "bad header");
  std::vector<Column> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = text_io::split(lines[i], '\t');
    if (f.size() != 3) throw ParseError(source, i + 1, "expected 3 fields");
    if (parse_size(f[0], source, i + 1) != out.size()) throw ParseError(source, i + 1, "column index out of order");
    std::int64_t cog = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), cog);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) throw ParseError(source, i + 1, "bad COGID");
    out.push_back({f[1], cog});
  }
  return out;
}

}  // namespace cogforge::matrix
