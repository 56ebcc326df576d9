#pragma once

#include <stdexcept>
#include <string>

namespace giantstep::experiments {

// Exit code 2: bad config, unreadable or missing files, bad CSV schema.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public InputError {
 public:
  // line is 1-based; 0 when unknown.
  ConfigError(std::string file, int line, std::string field, const std::string& message);

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  int line_;
  std::string field_;
};

class FileError : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

// Exit code 3: a numerical failure inside one experiment cell.
class CellFailure : public std::runtime_error {
 public:
  CellFailure(std::string cell, const std::string& message)
      : std::runtime_error("cell " + cell + ": " + message), cell_(std::move(cell)) {}
  const std::string& cell() const { return cell_; }

 private:
  std::string cell_;
};

}  // namespace giantstep::experiments
