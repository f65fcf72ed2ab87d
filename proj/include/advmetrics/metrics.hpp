#pragma once

#include <utility>
#include <vector>

#include "advmetrics/records.hpp"
#include "advmetrics/taxonomy.hpp"
#include "advmetrics/visual_sim.hpp"

namespace advmetrics {

/// Fraction of records whose top-1 label flipped. Throws EmptyRecordSet.
double fooling_rate(const RecordSet& rs);

/// Fraction of records whose pre-attack label was demoted below rank K.
/// fr_at_k(rs, 1) == fooling_rate(rs) exactly. Throws InvalidK.
double fr_at_k(const RecordSet& rs, int k);

/// FR@K at every K of cfg.k_grid; monotone nonincreasing in K.
std::vector<std::pair<int, double>> fr_curve(const RecordSet& rs, const MetricConfig& cfg);
std::vector<std::pair<int, double>> fr_curve_serial(const RecordSet& rs,
                                                    const MetricConfig& cfg);

/// Area under an FR@K curve: trapezoid over K, normalized by (K_max - K_min).
/// Uses compensated accumulation so a constant-c curve yields exactly c.
/// Throws TooFewPoints.
double auc(const std::vector<std::pair<int, double>>& curve);

/// Quantized inverse similarity indicators: 1 iff the pre/post pair is less
/// similar than the threshold (strict <).
int qi_wup(const PredictionRecord& r, const Taxonomy& t, double semantic_threshold);
int qi_vis(const PredictionRecord& r, const VisualSimilarityMatrix& v, double visual_threshold);

/// Targeted variants: compare the target label to the post-attack label.
/// Throws MissingTarget.
int qi_targeted(const PredictionRecord& r, const Taxonomy& t, double semantic_threshold);
int qi_targeted(const PredictionRecord& r, const VisualSimilarityMatrix& v,
                double visual_threshold);

/// Mean QI over the record set (mean semantic / visual confusion).
/// Throws EmptyRecordSet plus per-record lookup errors.
double mean_qi(const RecordSet& rs, const Taxonomy& t, double semantic_threshold);
double mean_qi(const RecordSet& rs, const VisualSimilarityMatrix& v, double visual_threshold);
double mean_qi_serial(const RecordSet& rs, const Taxonomy& t, double semantic_threshold);
double mean_qi_serial(const RecordSet& rs, const VisualSimilarityMatrix& v,
                      double visual_threshold);

/// Mean QI at each threshold; monotone nondecreasing. Thresholds must be
/// strictly increasing. Throws EmptyThresholds / InvalidThresholds.
std::vector<std::pair<double, double>> threshold_sweep(const RecordSet& rs, const Taxonomy& t,
                                                       const std::vector<double>& thresholds);
std::vector<std::pair<double, double>> threshold_sweep(const RecordSet& rs,
                                                       const VisualSimilarityMatrix& v,
                                                       const std::vector<double>& thresholds);
std::vector<std::pair<double, double>> threshold_sweep_serial(
    const RecordSet& rs, const Taxonomy& t, const std::vector<double>& thresholds);
std::vector<std::pair<double, double>> threshold_sweep_serial(
    const RecordSet& rs, const VisualSimilarityMatrix& v,
    const std::vector<double>& thresholds);

}  // namespace advmetrics
