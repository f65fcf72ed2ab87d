#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advmetrics/matrix.hpp"
#include "advmetrics/metrics.hpp"
#include "advmetrics/records.hpp"
#include "advmetrics/taxonomy.hpp"
#include "advmetrics/visual_sim.hpp"

namespace advmetrics {

/// Named group of class ids (e.g. the fine-grained breed categories).
struct CategorySubset {
  std::string name;
  std::vector<int> members;  // sorted, unique
};

/// Validates nonempty members, all < class_count. Throws InvalidShape.
CategorySubset make_subset(std::string name, std::vector<int> members, int class_count);

/// Distinct post-attack top-1 labels over flipped records, divided by C.
/// Lives in [1/C, 1]. Throws EmptyRecordSet, NoFlips.
double dominant_label_coverage(const RecordSet& rs);

/// Among flipped records whose pre-attack label is in the subset, the
/// fraction whose post-attack label is also in the subset. 0 when subset
/// members never flipped. Throws EmptySubsetIntersection when no record's
/// pre-attack label is in the subset.
double fine_grained_confusion(const RecordSet& rs, const CategorySubset& subset);

struct CrossModelVariance {
  Matrix per_pair;  // element-wise population variance across models
  double mean = 0;  // over off-diagonal entries of per_pair
  double stddev = 0;
};

/// Element-wise population variance of class similarities across models.
/// Throws TooFewMatrices, ShapeMismatch.
CrossModelVariance cross_model_similarity_variance(
    std::span<const VisualSimilarityMatrix> matrices);

struct ReportRow {
  std::string attack;
  std::string model;
  std::size_t record_count = 0;
  double fr = 0;
  std::vector<std::pair<int, double>> curve;
  double auc_value = 0;
  double mean_qi_wup = 0;
  double mean_qi_vis = 0;
  std::optional<double> dominant_coverage;  // absent when nothing flipped
  // subset name -> intra-subset confusion; absent when the subset never
  // intersects the record set's pre-attack labels
  std::vector<std::pair<std::string, std::optional<double>>> fine_grained;
};

struct ComparisonReport {
  MetricConfig config;
  std::vector<ReportRow> rows;
};

/// Joins every metric into one table, one row per (attack, record set).
/// All record sets must share the class count. Throws LabelSpaceMismatch.
ComparisonReport comparison_report(
    const std::vector<std::pair<std::string, const RecordSet*>>& runs, const MetricConfig& cfg,
    const Taxonomy& t, const VisualSimilarityMatrix& v,
    const std::vector<CategorySubset>& subsets);

}  // namespace advmetrics
