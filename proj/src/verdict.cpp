#include "oddvar/verdict.hpp"

namespace oddvar {

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::indeterminate: return "indeterminate";
  }
  return "unknown";
}

nlohmann::json ConditionVerdict::to_json() const {
  return {{"id", id},
          {"status", to_string(status)},
          {"detail", detail},
          {"witness", witness},
          {"eps_range", {eps_range.first, eps_range.second}}};
}

}  // namespace oddvar
