#pragma once

#include <stdexcept>
#include <string>

namespace lcrt {

// machine-readable codes shared by the cli and the http service
inline constexpr const char* invalid_input = "INVALID_INPUT";
inline constexpr const char* constraint_violation = "CONSTRAINT_VIOLATION";
inline constexpr const char* not_positive_definite = "NOT_POSITIVE_DEFINITE";
inline constexpr const char* empty_feasible_set = "EMPTY_FEASIBLE_SET";
inline constexpr const char* infeasible_box = "INFEASIBLE_BOX";
inline constexpr const char* singular_design = "SINGULAR_DESIGN";
inline constexpr const char* no_interior_optimum = "NO_INTERIOR_OPTIMUM";
inline constexpr const char* no_admissible_root = "NO_ADMISSIBLE_ROOT";
inline constexpr const char* deadline_exceeded = "DEADLINE";
inline constexpr const char* malformed_request = "MALFORMED_REQUEST";

class error : public std::invalid_argument {
 public:
  error(std::string code, const std::string& message, std::string field = "")
      : std::invalid_argument(message), code_(std::move(code)), field_(std::move(field)) {}
  const std::string& code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  std::string code_;
  std::string field_;
};

}  // namespace lcrt
