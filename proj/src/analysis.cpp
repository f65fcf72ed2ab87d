#include "advmetrics/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "advmetrics/error.hpp"

namespace advmetrics {

CategorySubset make_subset(std::string name, std::vector<int> members, int class_count) {
  if (members.empty()) raise(Errc::invalid_shape, "subset '" + name + "' is empty");
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (int c : members)
    if (c < 0 || c >= class_count)
      raise(Errc::invalid_shape, "subset '" + name + "' references class " + std::to_string(c) +
                                     " outside 0.." + std::to_string(class_count - 1));
  return {std::move(name), std::move(members)};
}

double dominant_label_coverage(const RecordSet& rs) {
  if (rs.empty()) raise(Errc::empty_record_set, "no records");
  std::unordered_set<int> sinks;
  for (const auto& r : rs.records)
    if (r.flipped()) sinks.insert(r.post_label());
  if (sinks.empty()) raise(Errc::no_flips, "no flipped records to analyze");
  return static_cast<double>(sinks.size()) / static_cast<double>(rs.class_count);
}

double fine_grained_confusion(const RecordSet& rs, const CategorySubset& subset) {
  const auto in_subset = [&subset](int c) {
    return std::binary_search(subset.members.begin(), subset.members.end(), c);
  };
  long long flipped_in = 0;
  long long stayed_in = 0;
  bool any_pre_in = false;
  for (const auto& r : rs.records) {
    if (!in_subset(r.pre_label)) continue;
    any_pre_in = true;
    if (!r.flipped()) continue;
    ++flipped_in;
    stayed_in += in_subset(r.post_label());
  }
  if (!any_pre_in)
    raise(Errc::empty_subset_intersection,
          "no record has a pre-attack label in subset '" + subset.name + "'");
  if (flipped_in == 0) return 0.0;
  return static_cast<double>(stayed_in) / static_cast<double>(flipped_in);
}

CrossModelVariance cross_model_similarity_variance(
    std::span<const VisualSimilarityMatrix> matrices) {
  if (matrices.size() < 2)
    raise(Errc::too_few_matrices, "need >= 2 matrices, got " + std::to_string(matrices.size()));
  const Matrix& first = matrices.front().values;
  for (const auto& m : matrices)
    if (!m.values.same_shape(first))
      raise(Errc::shape_mismatch, "similarity matrices differ in shape");

  const std::size_t n = matrices.size();
  CrossModelVariance out;
  out.per_pair = Matrix(first.rows, first.cols);
  for (std::size_t i = 0; i < first.rows; ++i) {
    for (std::size_t j = 0; j < first.cols; ++j) {
      double mean = 0.0;
      for (const auto& m : matrices) mean += m.values.at(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const auto& m : matrices) {
        const double d = m.values.at(i, j) - mean;
        var += d * d;
      }
      out.per_pair.at(i, j) = var / static_cast<double>(n);
    }
  }

  const std::vector<double> off = off_diagonal(out.per_pair);
  if (!off.empty()) {
    double mean = 0.0;
    for (double v : off) mean += v;
    mean /= static_cast<double>(off.size());
    double var = 0.0;
    for (double v : off) var += (v - mean) * (v - mean);
    out.mean = mean;
    out.stddev = std::sqrt(var / static_cast<double>(off.size()));
  }
  return out;
}

ComparisonReport comparison_report(
    const std::vector<std::pair<std::string, const RecordSet*>>& runs, const MetricConfig& cfg,
    const Taxonomy& t, const VisualSimilarityMatrix& v,
    const std::vector<CategorySubset>& subsets) {
  ComparisonReport report;
  report.config = cfg;
  if (runs.empty()) return report;

  const int c = runs.front().second->class_count;
  if (static_cast<std::size_t>(c) != v.values.rows)
    raise(Errc::label_space_mismatch, "similarity matrix is " + std::to_string(v.values.rows) +
                                          " classes, records have " + std::to_string(c));
  for (const auto& [name, rs] : runs)
    if (rs->class_count != c)
      raise(Errc::label_space_mismatch, "run '" + name + "' has class count " +
                                            std::to_string(rs->class_count) + " != " +
                                            std::to_string(c));

  for (const auto& [name, rs] : runs) {
    ReportRow row;
    row.attack = name;
    row.model = rs->model;
    row.record_count = rs->size();
    row.fr = fooling_rate(*rs);
    row.curve = fr_curve(*rs, cfg);
    row.auc_value = auc(row.curve);
    row.mean_qi_wup = mean_qi(*rs, t, cfg.semantic_threshold);
    row.mean_qi_vis = mean_qi(*rs, v, cfg.visual_threshold);
    try {
      row.dominant_coverage = dominant_label_coverage(*rs);
    } catch (const Error& e) {
      if (e.code() != Errc::no_flips) throw;
    }
    for (const auto& s : subsets) {
      std::optional<double> cell;
      try {
        cell = fine_grained_confusion(*rs, s);
      } catch (const Error& e) {
        if (e.code() != Errc::empty_subset_intersection) throw;
      }
      row.fine_grained.emplace_back(s.name, cell);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace advmetrics
