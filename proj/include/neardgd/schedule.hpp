#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace neardgd {

// Consensus-round schedule k -> t(k). All four kinds are nondecreasing and
// return at least one round per step.
struct Schedule {
  enum class Kind { kConstant, kLogFloor, kLinearFloor, kIdentity };

  Kind kind = Kind::kConstant;
  int rounds = 1;     // J, constant kind
  double rate = 1.0;  // q, log-floor kind
  int stride = 1;     // m, linear-floor kind

  static Schedule constant(int J) {
    if (J < 1) throw std::invalid_argument("schedule: constant rounds must be >= 1");
    return {Kind::kConstant, J, 1.0, 1};
  }
  static Schedule log_floor(double q) {
    if (!(q > 0.0)) throw std::invalid_argument("schedule: log-floor rate must be positive");
    return {Kind::kLogFloor, 1, q, 1};
  }
  static Schedule linear_floor(int m) {
    if (m < 1) throw std::invalid_argument("schedule: linear-floor stride must be >= 1");
    return {Kind::kLinearFloor, 1, 1.0, m};
  }
  static Schedule identity() { return {Kind::kIdentity, 1, 1.0, 1}; }

  int t(long k) const {
    switch (kind) {
      case Kind::kConstant:
        return rounds;
      case Kind::kLogFloor:
        return static_cast<int>(std::floor(rate * std::log(static_cast<double>(k) + 1.0))) + 1;
      case Kind::kLinearFloor:
        return static_cast<int>(k / stride) + 1;
      case Kind::kIdentity:
        return static_cast<int>(k) + 1;
    }
    throw std::logic_error("schedule: unreachable");
  }

  bool operator==(const Schedule&) const = default;
};

// Compact tag used in file names and the summary table, e.g. "const3",
// "log0.5", "lin100", "identity".
std::string schedule_slug(const Schedule& s);

// Human-readable form used in configs, e.g. "constant 3", "log-floor 0.5",
// "linear-floor 100", "identity".
std::string to_string(const Schedule& s);
Schedule parse_schedule(const std::string& text);

}  // namespace neardgd
