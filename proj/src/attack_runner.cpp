#include "advmetrics/attack_runner.hpp"

#include <algorithm>
#include <cmath>

#include "advmetrics/error.hpp"
#include "advmetrics/seeding.hpp"

namespace advmetrics {

const char* attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::identity: return "identity";
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::ifgsm_ll: return "ifgsm_ll";
    case AttackKind::pgd: return "pgd";
    case AttackKind::deepfool: return "deepfool";
    case AttackKind::cw: return "cw";
    case AttackKind::uap: return "uap";
    case AttackKind::gduap: return "gduap";
  }
  return "unknown";
}

std::optional<AttackKind> parse_attack_kind(const std::string& name) {
  for (AttackKind k : {AttackKind::identity, AttackKind::fgsm, AttackKind::ifgsm_ll,
                       AttackKind::pgd, AttackKind::deepfool, AttackKind::cw, AttackKind::uap,
                       AttackKind::gduap}) {
    if (name == attack_kind_name(k)) return k;
  }
  return std::nullopt;
}

AttackRun evaluate_attack(const ToyClassifier& m, const SyntheticTask& task,
                          const AttackSpec& spec, const std::string& model_name,
                          bool parallel) {
  if (task.samples.empty()) raise(Errc::invalid_shape, "task has no samples");
  const AttackConfig& cfg = spec.config;
  const int d = task.feature_dim;

  // Evaluation protocol: only samples the model classifies correctly.
  std::vector<std::size_t> eval_indices;
  for (std::size_t i = 0; i < task.samples.size(); ++i)
    if (m.predict(task.samples[i].features) == task.samples[i].label)
      eval_indices.push_back(i);

  // Universal attacks craft their single perturbation up front.
  std::vector<double> universal_v;
  if (spec.kind == AttackKind::uap) {
    universal_v =
        uap(m, task, cfg.epsilon, cfg.uap_th, cfg.uap_max_epochs, cfg.seed).perturbation.values;
  } else if (spec.kind == AttackKind::gduap) {
    universal_v = gduap(m, cfg.epsilon, cfg.gduap_iterations, cfg.seed, cfg.gduap_restarts)
                      .perturbation.values;
  }

  const std::size_t n = eval_indices.size();
  std::vector<PredictionRecord> records(n);
  std::vector<char> claimed_success(n, 0);
  int errors = 0;

  const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) reduction(+ : errors) if (parallel)
  for (std::ptrdiff_t i = 0; i < pn; ++i) {
    const std::size_t idx = eval_indices[i];
    const LabeledSample& s = task.samples[idx];
    std::vector<double> v(d, 0.0);
    try {
      switch (spec.kind) {
        case AttackKind::identity:
          break;
        case AttackKind::fgsm:
          v = fgsm(m, s.features, s.label, cfg.epsilon).values;
          break;
        case AttackKind::ifgsm_ll:
          v = ifgsm_ll(m, s.features, cfg.epsilon, cfg.alpha, cfg.iterations).values;
          break;
        case AttackKind::pgd:
          v = pgd(m, s.features, s.label, cfg.epsilon, cfg.alpha, cfg.iterations).values;
          break;
        case AttackKind::deepfool: {
          AttackResult r = deepfool(m, s.features, cfg.deepfool_max_iter, cfg.overshoot);
          v = std::move(r.perturbation.values);
          claimed_success[i] = r.success;
          break;
        }
        case AttackKind::cw: {
          AttackResult r = cw(m, s.features, cfg);
          v = std::move(r.perturbation.values);
          claimed_success[i] = r.success;
          break;
        }
        case AttackKind::uap:
        case AttackKind::gduap:
          v = universal_v;
          break;
      }
    } catch (const std::exception&) {
      std::fill(v.begin(), v.end(), 0.0);  // record the clean prediction instead
      ++errors;
    }

    std::vector<double> x_adv(d);
    for (int k = 0; k < d; ++k) x_adv[k] = s.features[k] + v[k];

    PredictionRecord rec;
    rec.id = static_cast<std::int64_t>(idx);
    rec.pre_label = s.label;
    rec.post_ranking = m.ranking(x_adv);
    rec.pre_label_rank =
        static_cast<int>(std::find(rec.post_ranking.begin(), rec.post_ranking.end(),
                                   rec.pre_label) -
                         rec.post_ranking.begin()) +
        1;
    records[i] = std::move(rec);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (claimed_success[i] && records[i].pre_label_rank == 1)
      raise(Errc::invariant_violation, "attack claimed success but record " +
                                           std::to_string(records[i].id) +
                                           " kept its top-1 label");
  }

  AttackRun run;
  run.name = spec.name.empty() ? attack_kind_name(spec.kind) : spec.name;
  run.spec = spec;
  run.records = RecordSet{std::move(records), task.class_count, run.name, model_name};
  run.sample_errors = errors;
  validate_record_set(run.records);
  return run;
}

std::vector<AttackSpec> default_attack_suite(const SyntheticTask& task, std::uint64_t seed) {
  AttackConfig base;
  base.epsilon = task.default_epsilon;
  base.alpha = task.default_epsilon / 4.0;
  base.iterations = 10;
  base.cw_box = std::make_pair(task.feature_min, task.feature_max);
  base.cw_iterations = 150;
  base.seed = seed;

  std::vector<AttackSpec> suite;
  for (AttackKind k : {AttackKind::fgsm, AttackKind::ifgsm_ll, AttackKind::pgd,
                       AttackKind::deepfool, AttackKind::cw, AttackKind::uap,
                       AttackKind::gduap}) {
    AttackSpec spec;
    spec.kind = k;
    spec.name = attack_kind_name(k);
    spec.config = base;
    spec.config.seed = mix_seed(seed, static_cast<std::uint64_t>(k));
    suite.push_back(std::move(spec));
  }
  return suite;
}

}  // namespace advmetrics
