#pragma once

#include <stdexcept>
#include <string>

namespace signmimic {

// Malformed document: the message names the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed document describing an invalid graph (cycles, multiple roots).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (dimension mismatch, non-unit quaternion, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Integration produced a non-finite value.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Capture data could not be converted into a clip.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite gradients or losses during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace signmimic
