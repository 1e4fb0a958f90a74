#pragma once

#include <stdexcept>
#include <string>

namespace ivri {

/// Input outside the admissible set of an operation (bad interval, point
/// outside U, non-positive diffusion, ...). The CLI maps it to exit code 2.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical procedure failed to produce a usable result (non-finite
/// state, iteration limit hit, no orbit found). The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ivri
