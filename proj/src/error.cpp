#include "advmetrics/error.hpp"

namespace advmetrics {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::multiple_roots: return "MultipleRoots";
    case Errc::no_root: return "NoRoot";
    case Errc::unmapped_label: return "UnmappedLabel";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::zero_norm_row: return "ZeroNormRow";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::parse_error: return "ParseError";
    case Errc::empty_input: return "EmptyInput";
    case Errc::invalid_percentile: return "InvalidPercentile";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::empty_record_set: return "EmptyRecordSet";
    case Errc::invalid_k: return "InvalidK";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::missing_target: return "MissingTarget";
    case Errc::empty_thresholds: return "EmptyThresholds";
    case Errc::invalid_thresholds: return "InvalidThresholds";
    case Errc::no_flips: return "NoFlips";
    case Errc::empty_subset_intersection: return "EmptySubsetIntersection";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::too_few_matrices: return "TooFewMatrices";
    case Errc::label_space_mismatch: return "LabelSpaceMismatch";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::invalid_shape: return "InvalidShape";
    case Errc::diverged_loss: return "DivergedLoss";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::non_finite_gradient: return "NonFiniteGradient";
    case Errc::optimizer_diverged: return "OptimizerDiverged";
    case Errc::zero_activation: return "ZeroActivation";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace advmetrics
