#pragma once

#include "macrosync/algebra.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

// CSV output with pinned formatting: %.12e numbers, LF line endings, UTF-8.
// Complex values expand into <name>_re, <name>_im column pairs. NaN cells
// serialize as the literal "nan".
namespace macrosync {

std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);

  /// Complete in-memory payload (also written to disk), used for determinism
  /// checks.
  const std::string& payload() const { return payload_; }
  void close();

 private:
  void append_line(const std::string& line);
  std::ofstream out_;
  std::string payload_;
  std::size_t columns_ = 0;
};

/// A rectangular map in long (tidy) form: one row per cell,
/// columns (row_axis_value, col_axis_value, value...).
void write_matrix_csv(const std::filesystem::path& path,
                      const std::string& row_axis_name,
                      const std::string& col_axis_name,
                      const std::vector<std::string>& value_names,
                      const std::vector<double>& row_axis,
                      const std::vector<double>& col_axis,
                      const std::vector<const std::vector<double>*>& values);

}  // namespace macrosync
