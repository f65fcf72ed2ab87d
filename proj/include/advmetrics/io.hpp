#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advmetrics/analysis.hpp"
#include "advmetrics/attack_runner.hpp"
#include "advmetrics/matrix.hpp"
#include "advmetrics/mlp.hpp"
#include "advmetrics/records.hpp"
#include "advmetrics/synthetic.hpp"
#include "advmetrics/taxonomy.hpp"
#include "advmetrics/visual_sim.hpp"

#include <json.hpp>

namespace advmetrics {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance stamped into every emitted file (comment line for text/CSV,
/// sidecar <file>.meta.json for record files, fields in JSON reports).
struct RunMeta {
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  std::string attack;
  std::string model;
};

// --- taxonomy file: `child<TAB>parent` lines, then a `#labels` sentinel and
// --- `label_id<TAB>node_id` lines. `#` comments and blank lines ignored.
Taxonomy read_taxonomy_file(const std::string& path);
void write_taxonomy_file(const std::string& path, const Taxonomy& t,
                         const RunMeta* meta = nullptr);

// --- weight templates: CSV with header `class_id,w_0,...,w_{D-1}`,
// --- class_id dense 0..C-1 in order.
WeightTemplates read_templates_csv(const std::string& path);
void write_templates_csv(const std::string& path, const WeightTemplates& w,
                         const RunMeta* meta = nullptr);

// --- square matrix: CSV of C rows x C columns, 9 significant digits.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m, const RunMeta* meta = nullptr);

// --- records: JSON Lines, one object per record with keys id, pre_label,
// --- post_ranking, pre_label_rank, target_label (optional). A sidecar
// --- <path>.meta.json carries seed/version/attack/model.
RecordSet parse_records(const std::string& path, RunMeta* meta_out = nullptr);
void write_records(const std::string& path, const RecordSet& rs, const RunMeta& meta);

// --- model: versioned textual layer dump (layer sizes, row-major weights,
// --- biases), full precision.
ToyClassifier read_model_file(const std::string& path);
void write_model_file(const std::string& path, const ToyClassifier& m,
                      const RunMeta* meta = nullptr);

// --- task: CSV `label,x_0,...,x_{D-1}` plus the taxonomy file.
SyntheticTask read_task(const std::string& csv_path, const std::string& taxonomy_path);
void write_task_csv(const std::string& path, const SyntheticTask& task,
                    const RunMeta* meta = nullptr);

// --- subsets: JSON object {name: [class ids]}.
std::vector<CategorySubset> read_subsets_json(const std::string& path, int class_count);

// --- attack configuration: flat key=value file with [section] headers.
// --- Section name is the run name; `type` selects the attack (defaults to
// --- the section name). A [global] section may set `seed`.
struct AttackConfigFile {
  std::optional<std::uint64_t> seed;
  struct Section {
    std::string name;
    std::string type;
    std::map<std::string, std::string> values;
  };
  std::vector<Section> sections;
};
AttackConfigFile read_attack_config(const std::string& path);

/// Turns parsed sections into runnable specs: task-derived defaults first,
/// then per-key overrides. Throws ParseError on unknown types/keys.
std::vector<AttackSpec> build_attack_specs(const AttackConfigFile& file,
                                           const SyntheticTask& task,
                                           std::uint64_t default_seed);

// --- report serialization shared by the CLI and tests.
nlohmann::json report_to_json(const ComparisonReport& report, const RunMeta& meta);
std::string report_to_csv(const ComparisonReport& report);

// --- curve CSV exports.
void write_fr_curve_csv(const std::string& path,
                        const std::vector<std::pair<int, double>>& curve,
                        const RunMeta* meta = nullptr);
void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& sweep,
                     const RunMeta* meta = nullptr);
void write_percentile_csv(const std::string& path,
                          const std::vector<std::pair<int, double>>& curve,
                          const RunMeta* meta = nullptr);

}  // namespace advmetrics
