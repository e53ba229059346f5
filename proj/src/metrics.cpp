#include "frlab/metrics.hpp"

#include <sstream>
#include <stdexcept>

namespace frlab {

MetricsWriter::MetricsWriter(const std::string& path, std::vector<std::string> columns,
                             bool append)
    : columns_(std::move(columns)) {
  bool write_header = true;
  if (append) {
    std::ifstream probe(path);
    write_header = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
  }
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw std::runtime_error("metrics: cannot open " + path);
  if (write_header) {
    for (size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << "\n";
  }
}

void MetricsWriter::write_row(const std::map<std::string, double>& values) {
  for (size_t i = 0; i < columns_.size(); ++i) {
    auto it = values.find(columns_[i]);
    double v = it == values.end() ? 0.0 : it->second;
    out_ << (i ? "," : "");
    out_ << v;
  }
  out_ << "\n";
  out_.flush();
}

int CsvTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  int idx = column_index(name);
  if (idx < 0) throw std::runtime_error("csv: no column named " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(cell.empty() ? 0.0 : std::stod(cell));
    if (row.size() == t.columns.size()) t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace frlab
