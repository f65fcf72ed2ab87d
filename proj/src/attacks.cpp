#include "advmetrics/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "advmetrics/error.hpp"
#include "advmetrics/seeding.hpp"

namespace advmetrics {

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_finite_gradient(std::span<const double> g) {
  for (double v : g)
    if (!std::isfinite(v)) raise(Errc::non_finite_gradient, "gradient has a non-finite value");
}

void project_linf(std::span<double> v, double epsilon) {
  for (double& x : v) x = std::clamp(x, -epsilon, epsilon);
}

std::vector<double> add(std::span<const double> x, std::span<const double> v) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + v[i];
  return out;
}

double vec_l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double Perturbation::linf_norm() const {
  double n = 0.0;
  for (double v : values) n = std::max(n, std::abs(v));
  return n;
}

double Perturbation::l2_norm() const { return vec_l2(values); }

Perturbation fgsm(const ToyClassifier& m, std::span<const double> x, int label,
                  double epsilon) {
  if (epsilon <= 0.0) raise(Errc::invalid_shape, "fgsm needs epsilon > 0");
  const std::vector<double> g = m.input_gradient(x, label);
  require_finite_gradient(g);
  Perturbation p;
  p.values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) p.values[i] = epsilon * sign_of(g[i]);
  return p;
}

Perturbation ifgsm_ll(const ToyClassifier& m, std::span<const double> x, double epsilon,
                      double alpha, int iterations) {
  if (epsilon <= 0.0 || alpha <= 0.0 || alpha > epsilon)
    raise(Errc::invalid_shape, "ifgsm_ll needs 0 < alpha <= epsilon");
  if (iterations < 1) raise(Errc::invalid_shape, "ifgsm_ll needs iterations >= 1");

  // Least-likely label on the clean input, ties by ascending class id.
  const std::vector<double> z = m.logits(x);
  const int target =
      static_cast<int>(std::min_element(z.begin(), z.end()) - z.begin());

  // Iterate in perturbation space so the ball projection is exact.
  std::vector<double> v(x.size(), 0.0);
  std::vector<double> cur(x.size());
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t i = 0; i < v.size(); ++i) cur[i] = x[i] + v[i];
    const std::vector<double> g = m.input_gradient(cur, target);
    require_finite_gradient(g);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::clamp(v[i] - alpha * sign_of(g[i]), -epsilon, epsilon);
  }
  return {std::move(v), PerturbationKind::per_sample};
}

Perturbation pgd(const ToyClassifier& m, std::span<const double> x, int label, double epsilon,
                 double alpha, int iterations) {
  if (epsilon <= 0.0 || alpha <= 0.0 || alpha > epsilon)
    raise(Errc::invalid_shape, "pgd needs 0 < alpha <= epsilon");
  if (iterations < 1) raise(Errc::invalid_shape, "pgd needs iterations >= 1");

  std::vector<double> v(x.size(), 0.0);
  std::vector<double> cur(x.size());
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t i = 0; i < v.size(); ++i) cur[i] = x[i] + v[i];
    const std::vector<double> g = m.input_gradient(cur, label);
    require_finite_gradient(g);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::clamp(v[i] + alpha * sign_of(g[i]), -epsilon, epsilon);
  }
  return {std::move(v), PerturbationKind::per_sample};
}

AttackResult deepfool(const ToyClassifier& m, std::span<const double> x, int max_iter,
                      double overshoot) {
  if (max_iter < 1) raise(Errc::invalid_shape, "deepfool needs max_iter >= 1");
  const int d = m.input_dim();
  const int c = m.class_count();
  const int pre = m.predict(x);

  std::vector<double> r_total(d, 0.0);
  std::vector<double> x_adv(x.begin(), x.end());
  auto apply_overshoot = [&]() {
    for (int k = 0; k < d; ++k) x_adv[k] = x[k] + (1.0 + overshoot) * r_total[k];
  };

  bool flipped = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    apply_overshoot();
    if (m.predict(x_adv) != pre) {
      flipped = true;
      break;
    }
    const std::vector<double> z = m.logits(x_adv);
    const Matrix jac = m.logit_jacobian(x_adv);

    double best_dist = std::numeric_limits<double>::infinity();
    double best_f = 0.0;
    double best_norm_sq = 0.0;
    std::vector<double> best_w;
    for (int k = 0; k < c; ++k) {
      if (k == pre) continue;
      std::vector<double> w(d);
      double norm_sq = 0.0;
      for (int col = 0; col < d; ++col) {
        w[col] = jac.at(k, col) - jac.at(pre, col);
        norm_sq += w[col] * w[col];
      }
      if (norm_sq < 1e-24) continue;
      const double f = z[k] - z[pre];
      const double dist = std::abs(f) / std::sqrt(norm_sq);
      if (dist < best_dist) {
        best_dist = dist;
        best_f = f;
        best_norm_sq = norm_sq;
        best_w = std::move(w);
      }
    }
    if (best_w.empty() || best_dist == 0.0) break;  // no usable direction / zero margin

    const double scale = std::abs(best_f) / best_norm_sq;
    for (int k = 0; k < d; ++k) r_total[k] += scale * best_w[k];
  }
  if (!flipped) {
    apply_overshoot();
    flipped = m.predict(x_adv) != pre;
  }

  AttackResult out;
  out.perturbation.values.resize(d);
  for (int k = 0; k < d; ++k) out.perturbation.values[k] = (1.0 + overshoot) * r_total[k];
  out.success = flipped;
  out.iterations = iter;
  return out;
}

AttackResult cw(const ToyClassifier& m, std::span<const double> x, const AttackConfig& cfg,
                std::optional<int> source_label) {
  if (cfg.cw_c <= 0.0 && cfg.cw_binary_search_steps < 1)
    raise(Errc::invalid_shape, "cw needs c > 0 or binary_search_steps >= 1");
  if (cfg.cw_iterations < 1) raise(Errc::invalid_shape, "cw needs iterations >= 1");
  const double step =
      cfg.cw_step > 0.0 ? cfg.cw_step : (cfg.epsilon > 0.0 ? 0.1 * cfg.epsilon : 0.01);

  const int d = m.input_dim();
  const int c_classes = m.class_count();
  const int pre = source_label.value_or(m.predict(x));

  auto clamp_box = [&cfg](std::vector<double>& xs) {
    if (!cfg.cw_box) return;
    for (double& v : xs) v = std::clamp(v, cfg.cw_box->first, cfg.cw_box->second);
  };

  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<double> best_v;
  std::vector<double> last_v(d, 0.0);
  int total_iters = 0;

  const int bs_steps = std::max(1, cfg.cw_binary_search_steps);
  double c_lo = 0.0;
  double c_hi = std::numeric_limits<double>::infinity();
  double c_cur = cfg.cw_c > 0.0 ? cfg.cw_c : 1.0;

  for (int bs = 0; bs < bs_steps; ++bs) {
    std::vector<double> v(d, 0.0);
    bool success_this_c = false;
    for (int it = 0; it < cfg.cw_iterations; ++it, ++total_iters) {
      std::vector<double> x_adv = add(x, v);
      clamp_box(x_adv);
      for (int k = 0; k < d; ++k) v[k] = x_adv[k] - x[k];

      const std::vector<double> z = m.logits(x_adv);
      int runner_up = pre == 0 ? 1 : 0;
      for (int k = 0; k < c_classes; ++k) {
        if (k != pre && z[k] > z[runner_up]) runner_up = k;
      }
      const double margin = z[pre] - z[runner_up];

      const int top = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
      if (top != pre) {
        success_this_c = true;
        const double norm = vec_l2(v);
        if (norm < best_norm) {
          best_norm = norm;
          best_v = v;
        }
      }

      std::vector<double> grad(d);
      if (margin > -cfg.cw_kappa) {
        const std::vector<double> gm = m.logit_diff_input_gradient(x_adv, pre, runner_up);
        for (int k = 0; k < d; ++k) grad[k] = 2.0 * v[k] + c_cur * gm[k];
      } else {
        for (int k = 0; k < d; ++k) grad[k] = 2.0 * v[k];
      }
      for (int k = 0; k < d; ++k) {
        v[k] -= step * grad[k];
        if (!std::isfinite(v[k])) raise(Errc::optimizer_diverged, "cw iterate went non-finite");
      }
    }
    last_v = v;
    if (success_this_c) {
      c_hi = c_cur;
      c_cur = 0.5 * (c_lo + c_hi);
    } else {
      c_lo = c_cur;
      c_cur = std::isinf(c_hi) ? c_cur * 10.0 : 0.5 * (c_lo + c_hi);
    }
  }

  AttackResult out;
  out.iterations = total_iters;
  if (!best_v.empty()) {
    out.perturbation.values = std::move(best_v);
    out.success = true;
  } else {
    out.perturbation.values = std::move(last_v);  // best effort, flagged unsuccessful
    out.success = false;
  }
  return out;
}

UniversalResult uap(const ToyClassifier& m, const SyntheticTask& task, double epsilon,
                    double th, int max_epochs, std::uint64_t seed) {
  if (task.samples.empty()) raise(Errc::invalid_shape, "uap needs a nonempty task");
  if (epsilon <= 0.0) raise(Errc::invalid_shape, "uap needs epsilon > 0");
  if (max_epochs < 1) raise(Errc::invalid_shape, "uap needs max_epochs >= 1");
  if (th < 0.0 || th >= 1.0) raise(Errc::invalid_shape, "uap needs th in [0, 1)");

  const std::size_t n = task.samples.size();
  std::vector<int> clean_pred(n);
  const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < pn; ++i) clean_pred[i] = m.predict(task.samples[i].features);

  std::vector<double> v(task.feature_dim, 0.0);
  auto measure_rate = [&]() {
    long long fooled = 0;
#pragma omp parallel for reduction(+ : fooled) schedule(static)
    for (std::ptrdiff_t i = 0; i < pn; ++i)
      fooled += m.predict(add(task.samples[i].features, v)) != clean_pred[i];
    return static_cast<double>(fooled) / static_cast<double>(n);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double rate = 0.0;
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const std::vector<double> x_adv = add(task.samples[i].features, v);
      if (m.predict(x_adv) != clean_pred[i]) continue;
      const AttackResult df = deepfool(m, x_adv);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += df.perturbation.values[k];
      project_linf(v, epsilon);
    }
    rate = measure_rate();
    if (rate >= 1.0 - th) {
      UniversalResult out;
      out.perturbation = {std::move(v), PerturbationKind::universal};
      out.reached_target = true;
      out.fooling_rate = rate;
      out.epochs = epoch;
      return out;
    }
  }
  UniversalResult out;
  out.perturbation = {std::move(v), PerturbationKind::universal};
  out.reached_target = false;  // target not reached; caller gets the achieved rate
  out.fooling_rate = rate;
  out.epochs = max_epochs;
  return out;
}

GduapResult gduap(const ToyClassifier& m, double epsilon, int iterations, std::uint64_t seed,
                  int restarts) {
  if (epsilon <= 0.0) raise(Errc::invalid_shape, "gduap needs epsilon > 0");
  if (iterations < 1 || restarts < 1)
    raise(Errc::invalid_shape, "gduap needs iterations >= 1 and restarts >= 1");

  const int d = m.input_dim();
  GduapResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool any_init = false;

  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(mix_seed(seed, 0x6d00 + static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> init(-epsilon / 10.0, epsilon / 10.0);

    std::vector<double> v(d);
    double obj = 0.0;
    bool have_init = false;
    for (int attempt = 0; attempt < 5 && !have_init; ++attempt) {
      for (double& x : v) x = init(rng);
      try {
        obj = m.activation_objective(v);
        have_init = true;
      } catch (const Error& e) {
        if (e.code() != Errc::zero_activation) throw;
      }
    }
    if (!have_init) continue;
    any_init = true;

    std::vector<double> accepted{obj};
    double step = 0.1 * epsilon;
    for (int it = 0; it < iterations; ++it) {
      const auto [cur_obj, grad] = m.activation_objective_gradient(v);
      bool moved = false;
      while (step > 1e-12 * epsilon) {
        std::vector<double> v_new(d);
        for (int k = 0; k < d; ++k)
          v_new[k] = std::clamp(v[k] + step * grad[k], -epsilon, epsilon);
        double obj_new;
        try {
          obj_new = m.activation_objective(v_new);
        } catch (const Error& e) {
          if (e.code() != Errc::zero_activation) throw;
          step *= 0.5;
          continue;
        }
        if (obj_new > obj) {
          v = std::move(v_new);
          obj = obj_new;
          accepted.push_back(obj);
          step = std::min(step * 2.0, epsilon);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }

    if (obj > best.objective) {
      best.objective = obj;
      best.perturbation = {std::move(v), PerturbationKind::universal};
      best.accepted_objectives = std::move(accepted);
    }
  }

  if (!any_init)
    raise(Errc::zero_activation, "no random init produced nonzero layer responses");
  return best;
}

}  // namespace advmetrics
