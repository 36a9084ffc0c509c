#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace skiswitch {

/// Invalid scenario or experiment configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

  /// Same error, message prefixed with a location such as "file.conf:12".
  static ConfigError located(const std::string& where, const ConfigError& e) {
    return ConfigError(e.field_, where + ": " + e.what(), Raw{});
  }

 private:
  struct Raw {};
  ConfigError(std::string field, const std::string& what, Raw)
      : std::invalid_argument(what), field_(std::move(field)) {}

  std::string field_;
};

/// An argument lies outside the domain of a model function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A simulation invariant was broken (association partition, storage bounds, ...).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A UE ends up with zero rate, making the transmission delay infinite.
class UnserviceableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The exhaustive oracle refused to run because the search space is too large.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t required, std::uint64_t budget)
      : std::runtime_error("exhaustive search needs " + std::to_string(required) +
                           " evaluations, budget is " + std::to_string(budget)),
        required_(required),
        budget_(budget) {}

  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

}  // namespace skiswitch
