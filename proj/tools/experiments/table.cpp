#include "experiments/table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "experiments/errors.hpp"

namespace giantstep::experiments {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Table::RowBuilder& Table::RowBuilder::operator<<(double v) {
  cells_.push_back(format_number(v));
  return *this;
}
Table::RowBuilder& Table::RowBuilder::operator<<(int v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
Table::RowBuilder& Table::RowBuilder::operator<<(long v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
Table::RowBuilder& Table::RowBuilder::operator<<(unsigned long v) {
  cells_.push_back(std::to_string(v));
  return *this;
}
Table::RowBuilder& Table::RowBuilder::operator<<(const std::string& v) {
  cells_.push_back(v);
  return *this;
}

Table::RowBuilder::~RowBuilder() noexcept(false) {
  if (std::uncaught_exceptions() == 0) table_.append(std::move(cells_));
}

void Table::append(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw SchemaError("row has " + std::to_string(cells.size()) + " cells, table has " +
                      std::to_string(columns_.size()) + " columns");
  cells_.push_back(std::move(cells));
}

void Table::append_rows(const Table& other) {
  if (other.columns_ != columns_) throw SchemaError("append_rows: column mismatch");
  cells_.insert(cells_.end(), other.cells_.begin(), other.cells_.end());
}

bool Table::has_column(const std::string& name) const {
  for (const auto& c : columns_)
    if (c == name) return true;
  return false;
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j] == name) return j;
  throw SchemaError("missing column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& column) const {
  const std::string& s = cells_.at(row)[column_index(column)];
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw SchemaError("column '" + column + "', row " + std::to_string(row + 1) +
                      ": not a number: '" + s + "'");
  return v;
}

const std::string& Table::text(std::size_t row, const std::string& column) const {
  return cells_.at(row)[column_index(column)];
}

std::vector<double> Table::numbers(const std::string& column) const {
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t i = 0; i < rows(); ++i) out.push_back(number(i, column));
  return out;
}

Table Table::filter(const std::string& column, const std::string& value) const {
  const std::size_t j = column_index(column);
  Table out(columns_);
  for (const auto& r : cells_)
    if (r[j] == value) out.cells_.push_back(r);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) out << (j ? "," : "") << cells[j];
    out << '\n';
  };
  emit(table.columns());
  for (std::size_t i = 0; i < table.rows(); ++i) emit(table.row(i));
  if (!out) throw FileError("write failed: " + path.string());
}

Table read_csv(const std::filesystem::path& path, const std::vector<std::string>& required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("missing file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
  Table t(split(line));
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.columns().size())
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns().size()) + " cells, found " +
                        std::to_string(cells.size()));
    t.append(std::move(cells));
  }
  for (const auto& c : required)
    if (!t.has_column(c)) throw SchemaError(path.string() + ": missing column '" + c + "'");
  return t;
}

}  // namespace giantstep::experiments
