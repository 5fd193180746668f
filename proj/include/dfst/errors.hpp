#pragma once

#include <stdexcept>
#include <string>

namespace dfst {

// Maps onto the CLI exit codes: usage 1, data 2, numeric 3.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfst
