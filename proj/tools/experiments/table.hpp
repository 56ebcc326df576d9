#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace giantstep::experiments {

// Column-named table of text cells. Numbers are stored already formatted
// (%.17g) so that CSV output is byte-stable and round-trips exactly.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return cells_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return cells_[i]; }

  // Builder for one row; cells must be added in column order.
  class RowBuilder {
   public:
    RowBuilder& operator<<(double v);
    RowBuilder& operator<<(int v);
    RowBuilder& operator<<(long v);
    RowBuilder& operator<<(unsigned long v);
    RowBuilder& operator<<(const std::string& v);
    RowBuilder& operator<<(const char* v) { return *this << std::string(v); }
    ~RowBuilder() noexcept(false);

   private:
    friend class Table;
    explicit RowBuilder(Table& t) : table_(t) {}
    Table& table_;
    std::vector<std::string> cells_;
  };
  RowBuilder add_row() { return RowBuilder(*this); }
  void append(std::vector<std::string> cells);
  void append_rows(const Table& other);

  bool has_column(const std::string& name) const;
  // Throws SchemaError naming the column when absent.
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
  const std::string& text(std::size_t row, const std::string& column) const;
  std::vector<double> numbers(const std::string& column) const;

  // Rows whose `column` equals `value`.
  Table filter(const std::string& column, const std::string& value) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> cells_;
};

std::string format_number(double v);

void write_csv(const Table& table, const std::filesystem::path& path);
// Throws FileError when the file is missing and SchemaError when a row is
// ragged or a required column is absent.
Table read_csv(const std::filesystem::path& path, const std::vector<std::string>& required = {});

}  // namespace giantstep::experiments
