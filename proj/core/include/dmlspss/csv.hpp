#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dmlspss/dataset.hpp"

namespace dmlspss {

/// Raw CSV contents: header plus string cells. RFC-4180 quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // SchemaError if absent
};

struct ColumnSchema {
  std::string outcome;
  std::string treatment;
  std::vector<std::string> covariates;  // empty means "all remaining columns"
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_table(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_csv_table(const std::filesystem::path& path, const CsvTable& table);

/// Numeric view of every column in the table.
Matrix table_to_matrix(const CsvTable& table);

Dataset dataset_from_table(const CsvTable& table, const ColumnSchema& schema);
Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema);

/// Writes y, t, covariates with a header (covariates named x1..xp when the
/// dataset carries no names).
void save_csv(const std::filesystem::path& path, const Dataset& d,
              const std::string& outcome = "y", const std::string& treatment = "t");

}  // namespace dmlspss
