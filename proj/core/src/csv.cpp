#include "macrosync/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace macrosync {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_) {
    throw std::runtime_error("CsvWriter: cannot open " + path.string());
  }
}

void CsvWriter::append_line(const std::string& line) {
  payload_ += line;
  payload_ += '\n';
  out_ << line << '\n';
}

void CsvWriter::header(const std::vector<std::string>& names) {
  std::string line;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) line += ',';
    line += names[i];
  }
  columns_ = names.size();
  append_line(line);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (columns_ != 0 && values.size() != columns_) {
    throw std::invalid_argument("CsvWriter: row width differs from header");
  }
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_number(values[i]);
  }
  append_line(line);
}

void CsvWriter::close() {
  out_.close();
}

void write_matrix_csv(const std::filesystem::path& path,
                      const std::string& row_axis_name,
                      const std::string& col_axis_name,
                      const std::vector<std::string>& value_names,
                      const std::vector<double>& row_axis,
                      const std::vector<double>& col_axis,
                      const std::vector<const std::vector<double>*>& values) {
  const std::size_t cells = row_axis.size() * col_axis.size();
  for (const auto* v : values) {
    if (v->size() != cells) {
      throw std::invalid_argument("write_matrix_csv: value size mismatch");
    }
  }
  CsvWriter w(path);
  std::vector<std::string> names{row_axis_name, col_axis_name};
  names.insert(names.end(), value_names.begin(), value_names.end());
  w.header(names);
  std::vector<double> row(names.size());
  for (std::size_t r = 0; r < row_axis.size(); ++r) {
    for (std::size_t c = 0; c < col_axis.size(); ++c) {
      row[0] = row_axis[r];
      row[1] = col_axis[c];
      for (std::size_t k = 0; k < values.size(); ++k) {
        row[2 + k] = (*values[k])[r * col_axis.size() + c];
      }
      w.row(row);
    }
  }
  w.close();
}

}  // namespace macrosync
