#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace advmetrics {

/// One evaluated sample: the model's (correct) prediction on the clean
/// input, the full post-attack ranking, and the exact post-attack rank of
/// the pre-attack label.
struct PredictionRecord {
  std::int64_t id = 0;
  int pre_label = 0;
  std::vector<int> post_ranking;  // permutation of 0..C-1, best first
  int pre_label_rank = 0;         // 1-based position of pre_label in post_ranking
  std::optional<int> target_label;

  bool flipped() const { return pre_label_rank > 1; }
  int post_label() const { return post_ranking.front(); }
};

struct RecordSet {
  std::vector<PredictionRecord> records;
  int class_count = 0;
  std::string attack;
  std::string model;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Checks every PredictionRecord invariant (ranking is a permutation,
/// rank consistency, unique ids, shared C). Throws InvariantViolation.
void validate_record_set(const RecordSet& rs);

/// Thresholds and K grid for the aggregate metrics.
struct MetricConfig {
  double semantic_threshold = 0.7;                     // T_s
  double visual_threshold = 0.1;                       // T_v
  std::vector<int> k_grid = {1, 2, 5, 10, 20, 50, 100};

  /// k_grid strictly increasing, entries >= 1, max < class_count.
  /// Throws InvalidK.
  void validate(int class_count) const;

  /// Default config with the K grid clipped to entries < class_count.
  static MetricConfig defaults_for(int class_count);
};

}  // namespace advmetrics
