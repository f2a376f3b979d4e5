#pragma once

#include <stdexcept>
#include <string>

namespace seqembed {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, records, query arguments).
// The CLI maps this to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid model or run configuration (shape algebra violations, bad
// hyperparameters). Exit code 3.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values reached a place that requires finite numbers. Exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqembed
