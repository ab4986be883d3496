#pragma once

// CSV emission for traces. Numbers are written with 17 significant digits so
// that reading a file back recovers every double exactly; `#` lines carry
// run metadata.

#include "subharmonic/evolve.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace subharmonic {

/// Header of every trace-shaped CSV.
inline const std::vector<std::string> kTraceColumns = {"t", "n_a", "n_b", "x", "y", "norm", "q"};

struct CsvTable {
  std::vector<std::string> comments;  ///< without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;  ///< nullopt is an empty cell
};

std::string format_number(double value);

void write_csv(std::ostream& out, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);

/// Throws ValidationError on ragged rows or unparsable cells.
CsvTable read_csv(std::istream& in);

CsvTable trace_table(const ObservableTrace& trace, std::vector<std::string> comments);

/// Writes via a sibling temporary file and rename, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace subharmonic
