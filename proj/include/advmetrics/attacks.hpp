#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "advmetrics/mlp.hpp"
#include "advmetrics/synthetic.hpp"

namespace advmetrics {

enum class PerturbationKind { per_sample, universal };

struct Perturbation {
  std::vector<double> values;
  PerturbationKind kind = PerturbationKind::per_sample;

  double linf_norm() const;
  double l2_norm() const;
};

/// Knobs shared by the attack family. Budget attacks use epsilon/alpha/
/// iterations; the per-attack extras are ignored by the others.
struct AttackConfig {
  double epsilon = 0.0;  // l-inf budget, feature units
  double alpha = 0.0;    // per-step size of iterative sign attacks
  int iterations = 10;   // T

  // DeepFool
  double overshoot = 0.02;
  int deepfool_max_iter = 50;

  // CW
  double cw_c = 1.0;
  double cw_kappa = 0.0;
  int cw_binary_search_steps = 5;
  int cw_iterations = 200;
  double cw_step = 0.0;  // 0 -> 0.1 * epsilon
  std::optional<std::pair<double, double>> cw_box;  // feature-range clamp

  // UAP
  double uap_th = 0.2;      // stop once fooling rate >= 1 - th
  int uap_max_epochs = 10;

  // GD-UAP
  int gduap_iterations = 200;
  int gduap_restarts = 8;

  std::uint64_t seed = 0;
};

struct AttackResult {
  Perturbation perturbation;
  bool success = false;  // verified label flip
  int iterations = 0;
};

struct UniversalResult {
  Perturbation perturbation;
  bool reached_target = false;
  double fooling_rate = 0.0;
  int epochs = 0;
};

struct GduapResult {
  Perturbation perturbation;
  double objective = 0.0;
  std::vector<double> accepted_objectives;  // strictly increasing trajectory
};

/// v = epsilon * sign(dJ/dx), with sign(0) = 0. Throws NonFiniteGradient.
Perturbation fgsm(const ToyClassifier& m, std::span<const double> x, int label, double epsilon);

/// Iterative least-likely descent: pick the lowest-probability label on the
/// clean input, then step against its loss gradient, re-projecting into the
/// epsilon ball. Requires alpha <= epsilon.
Perturbation ifgsm_ll(const ToyClassifier& m, std::span<const double> x, double epsilon,
                      double alpha, int iterations);

/// Projected gradient ascent on the loss inside the epsilon ball.
Perturbation pgd(const ToyClassifier& m, std::span<const double> x, int label, double epsilon,
                 double alpha, int iterations);

/// Greedy linearized minimal perturbation; final v is scaled by
/// (1 + overshoot). success=false returns the best-effort v.
AttackResult deepfool(const ToyClassifier& m, std::span<const double> x, int max_iter = 50,
                      double overshoot = 0.02);

/// Minimizes ||v||_2^2 + c * max(Z_pre - max_other, -kappa) by gradient
/// descent, with optional binary search over c; keeps the smallest-norm
/// successful v seen. Uses cfg.cw_* fields and cfg.cw_box if set.
/// source_label defaults to the model's prediction on x.
AttackResult cw(const ToyClassifier& m, std::span<const double> x, const AttackConfig& cfg,
                std::optional<int> source_label = std::nullopt);

/// Universal perturbation: accumulates per-sample DeepFool perturbations for
/// samples the current v does not fool, projecting into the epsilon ball;
/// stops once fooling rate >= 1 - th.
UniversalResult uap(const ToyClassifier& m, const SyntheticTask& task, double epsilon, double th,
                    int max_epochs, std::uint64_t seed);

/// Data-free universal perturbation: projected gradient ascent with
/// backtracking on sum_i log ||l_i(v)||_2, from small random inits; the best
/// of `restarts` runs wins. Throws ZeroActivation if no usable init is found.
GduapResult gduap(const ToyClassifier& m, double epsilon, int iterations,
                  std::uint64_t seed, int restarts = 8);

}  // namespace advmetrics
