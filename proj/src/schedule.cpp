#include "neardgd/schedule.hpp"

#include <sstream>

#include "neardgd/format.hpp"

namespace neardgd {

std::string schedule_slug(const Schedule& s) {
  switch (s.kind) {
    case Schedule::Kind::kConstant:
      return "const" + std::to_string(s.rounds);
    case Schedule::Kind::kLogFloor:
      return "log" + format_double(s.rate);
    case Schedule::Kind::kLinearFloor:
      return "lin" + std::to_string(s.stride);
    case Schedule::Kind::kIdentity:
      return "identity";
  }
  throw std::logic_error("schedule: unreachable");
}

std::string to_string(const Schedule& s) {
  switch (s.kind) {
    case Schedule::Kind::kConstant:
      return "constant " + std::to_string(s.rounds);
    case Schedule::Kind::kLogFloor:
      return "log-floor " + format_double(s.rate);
    case Schedule::Kind::kLinearFloor:
      return "linear-floor " + std::to_string(s.stride);
    case Schedule::Kind::kIdentity:
      return "identity";
  }
  throw std::logic_error("schedule: unreachable");
}

Schedule parse_schedule(const std::string& text) {
  std::istringstream ss(text);
  std::string kind, param, extra;
  ss >> kind;
  const bool has_param = static_cast<bool>(ss >> param);
  if (ss >> extra) throw std::invalid_argument("schedule: trailing text in '" + text + "'");

  if (kind == "identity") {
    if (has_param) throw std::invalid_argument("schedule: identity takes no parameter");
    return Schedule::identity();
  }
  if (!has_param) throw std::invalid_argument("schedule: '" + kind + "' needs a parameter");
  if (kind == "constant") return Schedule::constant(static_cast<int>(parse_int(param)));
  if (kind == "log-floor") return Schedule::log_floor(parse_double(param));
  if (kind == "linear-floor") return Schedule::linear_floor(static_cast<int>(parse_int(param)));
  throw std::invalid_argument("schedule: unknown kind '" + kind + "'");
}

}  // namespace neardgd
