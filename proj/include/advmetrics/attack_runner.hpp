#pragma once

#include <optional>
#include <string>
#include <vector>

#include "advmetrics/attacks.hpp"
#include "advmetrics/records.hpp"

namespace advmetrics {

enum class AttackKind { identity, fgsm, ifgsm_ll, pgd, deepfool, cw, uap, gduap };

const char* attack_kind_name(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(const std::string& name);

struct AttackSpec {
  AttackKind kind = AttackKind::identity;
  std::string name;  // run name; defaults to the kind name
  AttackConfig config;
};

/// Named attack configuration plus the record set it produced.
struct AttackRun {
  std::string name;
  AttackSpec spec;
  RecordSet records;
  int sample_errors = 0;  // per-sample attack errors (recorded, not fatal)
};

/// Runs one attack over every correctly classified task sample and emits
/// PredictionRecords with the full post-attack ranking. Universal attacks
/// build their single v first, then apply it per sample. Per-sample work is
/// OpenMP-parallel when `parallel` is set; output is identical either way.
AttackRun evaluate_attack(const ToyClassifier& m, const SyntheticTask& task,
                          const AttackSpec& spec, const std::string& model_name = "toy-mlp",
                          bool parallel = true);

/// The paper's seven attacks with task-derived defaults (epsilon from the
/// task, alpha = epsilon/4, T = 10, CW box = task feature range).
std::vector<AttackSpec> default_attack_suite(const SyntheticTask& task, std::uint64_t seed);

}  // namespace advmetrics
