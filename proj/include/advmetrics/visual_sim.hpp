#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advmetrics/matrix.hpp"

namespace advmetrics {

/// Per-class final-layer weight vectors; row c is the learned template of
/// class c. Row order matches the class-label order used by the records.
struct WeightTemplates {
  std::size_t class_count = 0;
  std::size_t feature_dim = 0;
  std::vector<double> weights;  // row-major, class_count x feature_dim

  std::span<const double> row(std::size_t c) const {
    return {weights.data() + c * feature_dim, feature_dim};
  }
};

/// Validates shape and nonzero row norms. Throws ZeroNormRow, DimensionMismatch.
WeightTemplates make_templates(std::size_t class_count, std::size_t feature_dim,
                               std::vector<double> weights);

/// Model-perceived class similarity: cosine of the weight templates.
struct VisualSimilarityMatrix {
  Matrix values;  // C x C, symmetric, unit diagonal, entries in [-1, 1]
  std::string source_model;
};

/// Cosine similarity of templates i and j, clamped to [-1, 1]. Throws IndexOutOfRange.
double vis_similarity(const WeightTemplates& w, std::size_t i, std::size_t j);

/// Full C x C similarity matrix (OpenMP over rows). Arithmetic matches
/// vis_similarity entry for entry.
VisualSimilarityMatrix pairwise_vis_matrix(const WeightTemplates& w,
                                           const std::string& source_model = "");
/// Serial reference: per-pair scalar recomputation.
VisualSimilarityMatrix pairwise_vis_matrix_serial(const WeightTemplates& w,
                                                  const std::string& source_model = "");

/// Off-diagonal entries of a square matrix, in row-major order. These feed
/// the percentile curve used for threshold selection.
std::vector<double> off_diagonal(const Matrix& m);

/// Nearest-rank percentile curve at integer percentiles 1..100: the value at
/// percentile p is the smallest v with at least p% of inputs <= v.
/// Throws EmptyInput.
std::vector<std::pair<int, double>> percentile_curve(std::vector<double> values);

/// Curve value at percentile p (default selector for T_v / T_s).
/// Throws InvalidPercentile.
double knee_threshold(const std::vector<std::pair<int, double>>& curve, int percentile = 95);

}  // namespace advmetrics
