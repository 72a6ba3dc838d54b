#pragma once

#include <stdexcept>
#include <string>

namespace transferlab {

// Malformed documents, dimension mismatches, bad arguments.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An algebraic axiom failed to hold within tolerance; message carries the witness.
class verification_error : public std::runtime_error {
public:
  explicit verification_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal consistency violations that signal numerical breakdown
// (e.g. two provably equivalent conditions disagreeing beyond tolerance).
class structural_error : public std::runtime_error {
public:
  explicit structural_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace transferlab
