#include "advmetrics/visual_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advmetrics/error.hpp"

namespace advmetrics {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double row_norm(std::span<const double> row) { return std::sqrt(dot(row, row)); }

double cosine(std::span<const double> a, double norm_a, std::span<const double> b,
              double norm_b) {
  const double v = dot(a, b) / (norm_a * norm_b);
  return std::clamp(v, -1.0, 1.0);
}

}  // namespace

WeightTemplates make_templates(std::size_t class_count, std::size_t feature_dim,
                               std::vector<double> weights) {
  if (weights.size() != class_count * feature_dim)
    raise(Errc::dimension_mismatch, "expected " + std::to_string(class_count * feature_dim) +
                                        " weights, got " + std::to_string(weights.size()));
  WeightTemplates w{class_count, feature_dim, std::move(weights)};
  for (std::size_t c = 0; c < class_count; ++c) {
    if (row_norm(w.row(c)) == 0.0)
      raise(Errc::zero_norm_row, "template row " + std::to_string(c) + " has zero norm");
  }
  return w;
}

double vis_similarity(const WeightTemplates& w, std::size_t i, std::size_t j) {
  if (i >= w.class_count || j >= w.class_count)
    raise(Errc::index_out_of_range, "class index out of range (C=" +
                                        std::to_string(w.class_count) + ")");
  if (i == j) return 1.0;
  return cosine(w.row(i), row_norm(w.row(i)), w.row(j), row_norm(w.row(j)));
}

VisualSimilarityMatrix pairwise_vis_matrix(const WeightTemplates& w,
                                           const std::string& source_model) {
  const std::size_t c = w.class_count;
  std::vector<double> norms(c);
  for (std::size_t i = 0; i < c; ++i) norms[i] = row_norm(w.row(i));

  Matrix m(c, c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(c); ++i) {
    m.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < c; ++j) {
      const double v = cosine(w.row(i), norms[i], w.row(j), norms[j]);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return {std::move(m), source_model};
}

VisualSimilarityMatrix pairwise_vis_matrix_serial(const WeightTemplates& w,
                                                  const std::string& source_model) {
  const std::size_t c = w.class_count;
  Matrix m(c, c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) = vis_similarity(w, i, j);
  return {std::move(m), source_model};
}

std::vector<double> off_diagonal(const Matrix& m) {
  std::vector<double> out;
  out.reserve(m.rows * m.cols - std::min(m.rows, m.cols));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (i != j) out.push_back(m.at(i, j));
  return out;
}

std::vector<std::pair<int, double>> percentile_curve(std::vector<double> values) {
  if (values.empty()) raise(Errc::empty_input, "percentile curve over empty value set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<std::pair<int, double>> curve;
  curve.reserve(100);
  for (int p = 1; p <= 100; ++p) {
    // Nearest rank: ceil(p*n/100), computed in integers.
    const std::size_t rank = (static_cast<std::size_t>(p) * n + 99) / 100;
    curve.emplace_back(p, values[rank - 1]);
  }
  return curve;
}

double knee_threshold(const std::vector<std::pair<int, double>>& curve, int percentile) {
  if (percentile < 1 || percentile > 100)
    raise(Errc::invalid_percentile, "percentile must be in [1, 100], got " +
                                        std::to_string(percentile));
  for (const auto& [p, v] : curve)
    if (p == percentile) return v;
  raise(Errc::invalid_percentile,
        "curve has no entry for percentile " + std::to_string(percentile));
}

}  // namespace advmetrics
