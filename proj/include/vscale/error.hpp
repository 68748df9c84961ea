#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vscale {

enum class ErrorCode {
  empty_answer,
  missing_answer,
  empty_instance,
  zero_verifications,
  zero_length,
  empty_list,
  length_mismatch,
  single_class,
  budget_exceeds_pool,
  empty_field,
  no_verdict,
  malformed_verdict,
  missing_reference,
  endpoint_error,
  incomplete_panel,
  invalid_spec,
  space_too_large,
  empty_grid,
  invalid_argument,
  io_error,
  parse_error,
};

std::string_view to_string(ErrorCode code);

// Base exception for every failure the library reports. The code lets
// callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vscale
