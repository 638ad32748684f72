#pragma once

#include <string>
#include <utility>

#include "json.hpp"

namespace oddvar {

enum class Status { pass, fail, indeterminate };

std::string to_string(Status s);

/// Outcome of a numerical hypothesis check. Failures carry a witness.
struct ConditionVerdict {
  std::string id;
  Status status = Status::indeterminate;
  std::string detail;
  nlohmann::json witness = nlohmann::json::object();
  std::pair<double, double> eps_range{0.0, 0.0};

  bool passed() const noexcept { return status == Status::pass; }
  nlohmann::json to_json() const;
};

}  // namespace oddvar
