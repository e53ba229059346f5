#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace frlab {

/// Append-only CSV with a fixed column set; one row per training iteration.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  MetricsWriter(const std::string& path, std::vector<std::string> columns, bool append = false);

  void write_row(const std::map<std::string, double>& values);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  static CsvTable read(const std::string& path);
};

}  // namespace frlab
