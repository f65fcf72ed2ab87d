#pragma once

#include <stdexcept>
#include <string>

namespace advmetrics {

/// Error kinds raised by the toolkit. Names follow the public error
/// vocabulary used in CLI output (see errc_name).
enum class Errc {
  cycle_detected,
  multiple_roots,
  no_root,
  unmapped_label,
  unknown_node,
  zero_norm_row,
  dimension_mismatch,
  parse_error,
  empty_input,
  invalid_percentile,
  index_out_of_range,
  empty_record_set,
  invalid_k,
  too_few_points,
  missing_target,
  empty_thresholds,
  invalid_thresholds,
  no_flips,
  empty_subset_intersection,
  shape_mismatch,
  too_few_matrices,
  label_space_mismatch,
  invariant_violation,
  invalid_shape,
  diverged_loss,
  non_finite_input,
  non_finite_gradient,
  optimizer_diverged,
  zero_activation,
  io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace advmetrics
