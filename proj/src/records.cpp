#include "advmetrics/records.hpp"

#include <algorithm>
#include <unordered_set>

#include "advmetrics/error.hpp"

namespace advmetrics {

void validate_record_set(const RecordSet& rs) {
  if (rs.class_count < 2)
    raise(Errc::invariant_violation, "record set needs class_count >= 2");
  std::unordered_set<std::int64_t> ids;
  std::vector<char> seen(rs.class_count);
  for (const auto& r : rs.records) {
    const std::string where = "record " + std::to_string(r.id);
    if (!ids.insert(r.id).second) raise(Errc::invariant_violation, where + ": duplicate id");
    if (static_cast<int>(r.post_ranking.size()) != rs.class_count)
      raise(Errc::invariant_violation, where + ": ranking length != class count");
    std::fill(seen.begin(), seen.end(), 0);
    for (int c : r.post_ranking) {
      if (c < 0 || c >= rs.class_count)
        raise(Errc::invariant_violation, where + ": class id out of range in ranking");
      if (seen[c]++) raise(Errc::invariant_violation, where + ": ranking is not a permutation");
    }
    if (r.pre_label < 0 || r.pre_label >= rs.class_count)
      raise(Errc::invariant_violation, where + ": pre_label out of range");
    if (r.pre_label_rank < 1 || r.pre_label_rank > rs.class_count)
      raise(Errc::invariant_violation, where + ": pre_label_rank out of range");
    if (r.post_ranking[r.pre_label_rank - 1] != r.pre_label)
      raise(Errc::invariant_violation, where + ": pre_label_rank inconsistent with ranking");
    if (r.target_label && (*r.target_label < 0 || *r.target_label >= rs.class_count))
      raise(Errc::invariant_violation, where + ": target_label out of range");
  }
}

void MetricConfig::validate(int class_count) const {
  if (k_grid.empty()) raise(Errc::invalid_k, "empty K grid");
  int prev = 0;
  for (int k : k_grid) {
    if (k < 1) raise(Errc::invalid_k, "K must be >= 1, got " + std::to_string(k));
    if (k <= prev) raise(Errc::invalid_k, "K grid must be strictly increasing");
    prev = k;
  }
  if (prev >= class_count)
    raise(Errc::invalid_k, "max K " + std::to_string(prev) + " must be < class count " +
                               std::to_string(class_count));
}

MetricConfig MetricConfig::defaults_for(int class_count) {
  MetricConfig cfg;
  std::erase_if(cfg.k_grid, [class_count](int k) { return k >= class_count; });
  cfg.validate(class_count);
  return cfg;
}

}  // namespace advmetrics
