#pragma once

#include <stdexcept>
#include <string>

namespace shapedist {

// Error categories map 1:1 onto CLI exit codes (see tools/main.cpp):
// data problems -> 3, numerical failures -> 4, infeasible configurations -> 5.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shapedist
