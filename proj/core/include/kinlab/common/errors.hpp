#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kinlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class EnumerationBudgetExceeded : public Error {
 public:
  EnumerationBudgetExceeded(const std::string& what, double count, double budget)
      : Error(what + ": " + std::to_string(static_cast<long double>(count)) +
              " exceeds budget " + std::to_string(static_cast<long double>(budget))),
        count_(count),
        budget_(budget) {}
  double count() const noexcept { return count_; }
  double budget() const noexcept { return budget_; }

 private:
  double count_;
  double budget_;
};

// Raised for malformed configuration documents; `path` is a JSON-pointer-like
// location such as "/algorithm/psdp/n".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace kinlab
