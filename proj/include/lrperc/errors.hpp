#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lrperc {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A configured memory/size budget would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input too large for an exhaustive or brute-force routine.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root finding could not bracket the requested crossing.
class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config validation failure; `path` is a JSON pointer into the config.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Result files needed by a report are absent.
class MissingFilesError : public std::runtime_error {
 public:
  MissingFilesError(std::vector<std::string> files, const std::string& what)
      : std::runtime_error(what), files_(std::move(files)) {}
  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  std::vector<std::string> files_;
};

}  // namespace lrperc
