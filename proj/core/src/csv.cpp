#include "dmlspss/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "dmlspss/error.hpp"

namespace dmlspss {
namespace {

std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A trailing blank line is not a record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(Errc::ParseError, "stray quote inside an unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(Errc::ParseError, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (s.empty() || ec != std::errc() || ptr != last) {
    throw Error(Errc::ParseError, "non-numeric cell \"" + raw + "\" at data row " +
                                      std::to_string(row + 1) + ", column \"" + column + "\"");
  }
  if (!std::isfinite(value)) {
    throw Error(Errc::NonFinite, "non-finite cell at data row " + std::to_string(row + 1) +
                                     ", column \"" + column + "\"");
  }
  return value;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw Error(Errc::SchemaError, "column \"" + name + "\" not found in header");
}

CsvTable parse_csv(const std::string& text) {
  auto records = parse_records(text);
  if (records.empty()) throw Error(Errc::ParseError, "missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  std::unordered_set<std::string> names;
  for (auto& h : table.header) {
    h = trim(h);
    if (!names.insert(h).second) throw Error(Errc::SchemaError, "duplicate column \"" + h + "\"");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw Error(Errc::ParseError, "data row " + std::to_string(r) + " has " +
                                        std::to_string(records[r].size()) + " cells, header has " +
                                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out.push_back(',');
      if (needs_quotes(cells[j])) {
        out.push_back('"');
        for (char c : cells[j]) {
          if (c == '"') out.push_back('"');
          out.push_back(c);
        }
        out.push_back('"');
      } else {
        out += cells[j];
      }
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  return out;
}

void write_csv_table(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << format_csv(table);
}

Matrix table_to_matrix(const CsvTable& table) {
  Matrix m(static_cast<Eigen::Index>(table.rows.size()),
           static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          parse_cell(table.rows[r][j], r, table.header[j]);
    }
  }
  return m;
}

Dataset dataset_from_table(const CsvTable& table, const ColumnSchema& schema) {
  const std::size_t y_col = table.column(schema.outcome);
  const std::size_t t_col = table.column(schema.treatment);
  if (y_col == t_col) throw Error(Errc::SchemaError, "outcome and treatment must differ");

  std::vector<std::string> covariates = schema.covariates;
  if (covariates.empty()) {
    for (const auto& h : table.header) {
      if (h != schema.outcome && h != schema.treatment) covariates.push_back(h);
    }
  }
  std::unordered_set<std::string> distinct{schema.outcome, schema.treatment};
  std::vector<std::size_t> x_cols;
  for (const auto& c : covariates) {
    if (!distinct.insert(c).second) {
      throw Error(Errc::SchemaError, "column \"" + c + "\" used more than once in schema");
    }
    x_cols.push_back(table.column(c));
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Vector y(n), t(n);
  Matrix x(n, static_cast<Eigen::Index>(x_cols.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const auto ru = static_cast<std::size_t>(r);
    y[r] = parse_cell(row[y_col], ru, schema.outcome);
    t[r] = parse_cell(row[t_col], ru, schema.treatment);
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      x(r, static_cast<Eigen::Index>(j)) = parse_cell(row[x_cols[j]], ru, covariates[j]);
    }
  }
  return Dataset::make(std::move(y), std::move(t), std::move(x), std::move(covariates));
}

Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
  return dataset_from_table(read_csv_table(path), schema);
}

void save_csv(const std::filesystem::path& path, const Dataset& d, const std::string& outcome,
              const std::string& treatment) {
  CsvTable table;
  table.header = {outcome, treatment};
  for (std::size_t j = 0; j < d.p(); ++j) {
    table.header.push_back(d.column_names.empty() ? "x" + std::to_string(j + 1)
                                                  : d.column_names[j]);
  }
  char buf[32];
  auto fmt = [&buf](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{fmt(d.y[r]), fmt(d.t[r])};
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) row.push_back(fmt(d.x(r, j)));
    table.rows.push_back(std::move(row));
  }
  write_csv_table(path, table);
}

}  // namespace dmlspss
