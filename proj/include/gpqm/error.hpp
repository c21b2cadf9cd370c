#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gpqm {

enum class ErrorKind {
  domain,
  infeasible_demand,
  saturation,
  placement_infeasible,
  delay_infeasible,
  aggregate_capacity,
  configuration,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::infeasible_demand: return "infeasible-demand";
    case ErrorKind::saturation: return "saturation";
    case ErrorKind::placement_infeasible: return "placement-infeasible";
    case ErrorKind::delay_infeasible: return "delay-infeasible";
    case ErrorKind::aggregate_capacity: return "aggregate-capacity";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so front-ends can map it
// to an exit status. Planner errors additionally carry the snapshot time.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Error(ErrorKind kind, const std::string& what, double time_s)
      : std::runtime_error(what), kind_(kind), time_s_(time_s) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<double> time_s() const noexcept { return time_s_; }

 private:
  ErrorKind kind_;
  std::optional<double> time_s_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace gpqm
