#pragma once

#include <stdexcept>
#include <string>

namespace qa {

enum class errc {
  unknown_action,
  arity_mismatch,
  malformed_syntax,
  unexpected_argument,
  type_mismatch,
  empty_input,
  io_failure,
  format_error,
  validation_error,
  invalid_skeleton,
  unknown_slot_reference,
  slot_unfillable,
  exhausted_after_retries,
  empty_dataset,
  zero_vector,
  single_class,
  dimension_mismatch,
  no_template_for_skeleton,
  alignment_failure,
  empty_result,
  date_unavailable,
  number_unavailable,
  missing_argument,
};

const char* errc_name(errc code);

/// Library-wide exception; code() tells callers which failure class fired.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace qa
