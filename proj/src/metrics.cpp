#include "advmetrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "advmetrics/error.hpp"

namespace advmetrics {

namespace {

void require_nonempty(const RecordSet& rs) {
  if (rs.empty()) raise(Errc::empty_record_set, "no records");
}

long long count_rank_above(const RecordSet& rs, int k) {
  long long n = 0;
  const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(rs.records.size());
#pragma omp parallel for reduction(+ : n) schedule(static)
  for (std::ptrdiff_t i = 0; i < size; ++i) n += rs.records[i].pre_label_rank > k;
  return n;
}

// Label lookups are validated up front so the parallel folds below never throw.
void require_wup_labels(const RecordSet& rs, const Taxonomy& t) {
  for (const auto& r : rs.records) {
    if (!t.has_label(r.pre_label))
      raise(Errc::unmapped_label, "pre_label " + std::to_string(r.pre_label));
    if (!t.has_label(r.post_label()))
      raise(Errc::unmapped_label, "post-attack label " + std::to_string(r.post_label()));
  }
}

void require_vis_labels(const RecordSet& rs, const VisualSimilarityMatrix& v) {
  const int c = static_cast<int>(v.values.rows);
  for (const auto& r : rs.records) {
    if (r.pre_label >= c || r.post_label() >= c)
      raise(Errc::index_out_of_range, "record " + std::to_string(r.id) +
                                          " references class >= " + std::to_string(c));
  }
}

void require_thresholds(const std::vector<double>& thresholds) {
  if (thresholds.empty()) raise(Errc::empty_thresholds, "no thresholds given");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      raise(Errc::invalid_thresholds, "thresholds must be strictly increasing");
}

// Mean of indicator(similarity < threshold): integer count then one division,
// so the result is independent of record order and thread count.
template <typename SimilarityFn>
double mean_indicator(const RecordSet& rs, double threshold, SimilarityFn&& similarity) {
  long long n = 0;
  const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(rs.records.size());
#pragma omp parallel for reduction(+ : n) schedule(static)
  for (std::ptrdiff_t i = 0; i < size; ++i) n += similarity(rs.records[i]) < threshold;
  return static_cast<double>(n) / static_cast<double>(rs.size());
}

template <typename SimilarityFn>
std::vector<std::pair<double, double>> sweep_indicator(const RecordSet& rs,
                                                       const std::vector<double>& thresholds,
                                                       SimilarityFn&& similarity) {
  const std::size_t m = thresholds.size();
  std::vector<long long> counts(m, 0);
  const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(rs.records.size());
#pragma omp parallel
  {
    std::vector<long long> local(m, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      const double s = similarity(rs.records[i]);
      for (std::size_t j = 0; j < m; ++j) local[j] += s < thresholds[j];
    }
#pragma omp critical
    for (std::size_t j = 0; j < m; ++j) counts[j] += local[j];
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j)
    out.emplace_back(thresholds[j],
                     static_cast<double>(counts[j]) / static_cast<double>(rs.size()));
  return out;
}

}  // namespace

double fooling_rate(const RecordSet& rs) {
  require_nonempty(rs);
  return static_cast<double>(count_rank_above(rs, 1)) / static_cast<double>(rs.size());
}

double fr_at_k(const RecordSet& rs, int k) {
  require_nonempty(rs);
  if (k < 1 || k >= rs.class_count)
    raise(Errc::invalid_k, "K must satisfy 1 <= K < C, got " + std::to_string(k));
  return static_cast<double>(count_rank_above(rs, k)) / static_cast<double>(rs.size());
}

std::vector<std::pair<int, double>> fr_curve(const RecordSet& rs, const MetricConfig& cfg) {
  require_nonempty(rs);
  cfg.validate(rs.class_count);
  std::vector<std::pair<int, double>> curve;
  curve.reserve(cfg.k_grid.size());
  for (int k : cfg.k_grid) curve.emplace_back(k, fr_at_k(rs, k));
  return curve;
}

std::vector<std::pair<int, double>> fr_curve_serial(const RecordSet& rs,
                                                    const MetricConfig& cfg) {
  require_nonempty(rs);
  cfg.validate(rs.class_count);
  std::vector<std::pair<int, double>> curve;
  for (int k : cfg.k_grid) {
    long long n = 0;
    for (const auto& r : rs.records) n += r.pre_label_rank > k;
    curve.emplace_back(k, static_cast<double>(n) / static_cast<double>(rs.size()));
  }
  return curve;
}

double auc(const std::vector<std::pair<int, double>>& curve) {
  if (curve.size() < 2)
    raise(Errc::too_few_points, "AuC needs >= 2 curve points, got " +
                                    std::to_string(curve.size()));
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].first <= curve[i - 1].first)
      raise(Errc::invalid_k, "curve K values must be strictly increasing");

  // Trapezoid with exact product accumulation (twoProd via fma + twoSum)
  // and a corrected final division; guarantees auc(constant c) == c.
  double sum_hi = 0.0;
  double sum_lo = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double avg = 0.5 * (curve[i].second + curve[i + 1].second);
    const double dk = static_cast<double>(curve[i + 1].first - curve[i].first);
    const double p = avg * dk;
    const double p_err = std::fma(avg, dk, -p);
    const double t = sum_hi + p;
    const double virt = t - sum_hi;
    const double sum_err = (sum_hi - (t - virt)) + (p - virt);
    sum_hi = t;
    sum_lo += sum_err + p_err;
  }
  const double width = static_cast<double>(curve.back().first - curve.front().first);
  const double q = sum_hi / width;
  const double residual = std::fma(-q, width, sum_hi) + sum_lo;
  return std::clamp(q + residual / width, 0.0, 1.0);
}

int qi_wup(const PredictionRecord& r, const Taxonomy& t, double semantic_threshold) {
  return t.wup_similarity(r.pre_label, r.post_label()) < semantic_threshold ? 1 : 0;
}

int qi_vis(const PredictionRecord& r, const VisualSimilarityMatrix& v,
           double visual_threshold) {
  const std::size_t c = v.values.rows;
  if (static_cast<std::size_t>(r.pre_label) >= c ||
      static_cast<std::size_t>(r.post_label()) >= c)
    raise(Errc::index_out_of_range, "record " + std::to_string(r.id) + " references class >= " +
                                        std::to_string(c));
  return v.values.at(r.pre_label, r.post_label()) < visual_threshold ? 1 : 0;
}

int qi_targeted(const PredictionRecord& r, const Taxonomy& t, double semantic_threshold) {
  if (!r.target_label)
    raise(Errc::missing_target, "record " + std::to_string(r.id) + " has no target label");
  return t.wup_similarity(*r.target_label, r.post_label()) < semantic_threshold ? 1 : 0;
}

int qi_targeted(const PredictionRecord& r, const VisualSimilarityMatrix& v,
                double visual_threshold) {
  if (!r.target_label)
    raise(Errc::missing_target, "record " + std::to_string(r.id) + " has no target label");
  const std::size_t c = v.values.rows;
  if (static_cast<std::size_t>(*r.target_label) >= c ||
      static_cast<std::size_t>(r.post_label()) >= c)
    raise(Errc::index_out_of_range, "record " + std::to_string(r.id) + " references class >= " +
                                        std::to_string(c));
  return v.values.at(*r.target_label, r.post_label()) < visual_threshold ? 1 : 0;
}

double mean_qi(const RecordSet& rs, const Taxonomy& t, double semantic_threshold) {
  require_nonempty(rs);
  require_wup_labels(rs, t);
  return mean_indicator(rs, semantic_threshold, [&](const PredictionRecord& r) {
    return t.wup_similarity(r.pre_label, r.post_label());
  });
}

double mean_qi(const RecordSet& rs, const VisualSimilarityMatrix& v, double visual_threshold) {
  require_nonempty(rs);
  require_vis_labels(rs, v);
  return mean_indicator(rs, visual_threshold, [&](const PredictionRecord& r) {
    return v.values.at(r.pre_label, r.post_label());
  });
}

double mean_qi_serial(const RecordSet& rs, const Taxonomy& t, double semantic_threshold) {
  require_nonempty(rs);
  long long n = 0;
  for (const auto& r : rs.records) n += qi_wup(r, t, semantic_threshold);
  return static_cast<double>(n) / static_cast<double>(rs.size());
}

double mean_qi_serial(const RecordSet& rs, const VisualSimilarityMatrix& v,
                      double visual_threshold) {
  require_nonempty(rs);
  long long n = 0;
  for (const auto& r : rs.records) n += qi_vis(r, v, visual_threshold);
  return static_cast<double>(n) / static_cast<double>(rs.size());
}

std::vector<std::pair<double, double>> threshold_sweep(const RecordSet& rs, const Taxonomy& t,
                                                       const std::vector<double>& thresholds) {
  require_nonempty(rs);
  require_thresholds(thresholds);
  require_wup_labels(rs, t);
  return sweep_indicator(rs, thresholds, [&](const PredictionRecord& r) {
    return t.wup_similarity(r.pre_label, r.post_label());
  });
}

std::vector<std::pair<double, double>> threshold_sweep(const RecordSet& rs,
                                                       const VisualSimilarityMatrix& v,
                                                       const std::vector<double>& thresholds) {
  require_nonempty(rs);
  require_thresholds(thresholds);
  require_vis_labels(rs, v);
  return sweep_indicator(rs, thresholds, [&](const PredictionRecord& r) {
    return v.values.at(r.pre_label, r.post_label());
  });
}

std::vector<std::pair<double, double>> threshold_sweep_serial(
    const RecordSet& rs, const Taxonomy& t, const std::vector<double>& thresholds) {
  require_nonempty(rs);
  require_thresholds(thresholds);
  std::vector<std::pair<double, double>> out;
  for (double thr : thresholds) out.emplace_back(thr, mean_qi_serial(rs, t, thr));
  return out;
}

std::vector<std::pair<double, double>> threshold_sweep_serial(
    const RecordSet& rs, const VisualSimilarityMatrix& v,
    const std::vector<double>& thresholds) {
  require_nonempty(rs);
  require_thresholds(thresholds);
  std::vector<std::pair<double, double>> out;
  for (double thr : thresholds) out.emplace_back(thr, mean_qi_serial(rs, v, thr));
  return out;
}

}  // namespace advmetrics
