#pragma once

#include <stdexcept>
#include <string>

namespace windcommit {

// Precondition or dimension violation in a library call.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or invalid configuration document; names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Day-data ingestion failure; message carries row/column location.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The solver could not produce a usable answer (or reported an error).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace windcommit
