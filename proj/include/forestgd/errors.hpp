#pragma once

#include <stdexcept>
#include <string>

namespace forestgd {

/// Malformed or inconsistent input data (files, graphs, signals, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its target (non-convergence, step budget).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An oracle routine was asked to run beyond the size it supports.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forestgd
