#pragma once

#include <stdexcept>
#include <string>

namespace eprcs {

// Base for every error the library raises deliberately. Subclasses map onto
// the CLI exit codes in experiment.hpp.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleGrid : public Error {
 public:
  using Error::Error;
};

class BadOrder : public Error {
 public:
  using Error::Error;
};

class TooManyRows : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyRecord : public Error {
 public:
  using Error::Error;
};

class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class AllZero : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::string& path)
      : Error("missing artifact: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eprcs
