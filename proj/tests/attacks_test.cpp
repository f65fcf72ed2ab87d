#include "advmetrics/attacks.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "advmetrics/attack_runner.hpp"
#include "advmetrics/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace advmetrics;

namespace {

ToyClassifier identity_softmax() {
  Layer l;
  l.in = 2;
  l.out = 2;
  l.weights = {1, 0, 0, 1};
  l.biases = {0, 0};
  return ToyClassifier::from_layers({l});
}

// Two-class affine model whose margin is f(x) = w.x + b (class 0 vs 1).
ToyClassifier margin_model(double w0, double w1, double b) {
  Layer l;
  l.in = 2;
  l.out = 2;
  l.weights = {w0, w1, 0, 0};
  l.biases = {b, 0};
  return ToyClassifier::from_layers({l});
}

struct TrainedToy {
  SyntheticTask task;
  ToyClassifier model;
};

TrainedToy trained_toy(std::uint64_t seed = 3) {
  TrainedToy t{generate_task(seed, 8, 16, {2, 2}), ToyClassifier(16, {32}, 8, seed + 1)};
  train_model(t.model, t.task, 80, 0.05, seed + 2);
  return t;
}

}  // namespace

TEST_CASE("fgsm moves epsilon along the gradient sign") {
  const ToyClassifier m = identity_softmax();
  const Perturbation p = fgsm(m, std::vector<double>{1.0, 0.0}, 0, 0.1);
  CHECK(p.values[0] == doctest::Approx(-0.1));
  CHECK(p.values[1] == doctest::Approx(0.1));
  CHECK(p.linf_norm() == doctest::Approx(0.1));
}

TEST_CASE("fgsm keeps sign(0) = 0") {
  Layer l;
  l.in = 2;
  l.out = 2;
  l.weights = {0.5, 1.0, 0.5, 1.0};  // identical rows -> zero gradient
  l.biases = {0, 0};
  const ToyClassifier m = ToyClassifier::from_layers({l});
  const Perturbation p = fgsm(m, std::vector<double>{0.2, -0.3}, 0, 0.5);
  CHECK(p.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("ifgsm_ll with one step equals negated fgsm toward the least-likely label") {
  const TrainedToy toy = trained_toy();
  const auto& x = toy.task.samples[5].features;
  const double eps = toy.task.default_epsilon;

  const std::vector<double> z = toy.model.logits(x);
  const int ll = static_cast<int>(std::min_element(z.begin(), z.end()) - z.begin());

  const Perturbation one = ifgsm_ll(toy.model, x, eps, eps, 1);
  const Perturbation ref = fgsm(toy.model, x, ll, eps);
  for (std::size_t i = 0; i < one.values.size(); ++i)
    CHECK(one.values[i] == doctest::Approx(-ref.values[i]).epsilon(1e-12));
  CHECK(one.linf_norm() <= eps + 1e-9);
  CHECK_RAISES(Errc::invalid_shape, ifgsm_ll(toy.model, x, eps, 2 * eps, 1));
}

TEST_CASE("pgd with a single full step equals fgsm") {
  const TrainedToy toy = trained_toy();
  const auto& s = toy.task.samples[11];
  const double eps = toy.task.default_epsilon;
  const Perturbation p = pgd(toy.model, s.features, s.label, eps, eps, 1);
  const Perturbation f = fgsm(toy.model, s.features, s.label, eps);
  CHECK(p.values == f.values);
}

TEST_CASE("pgd stays in the ball and reaches at least fgsm's loss") {
  const TrainedToy toy = trained_toy();
  const double eps = toy.task.default_epsilon;
  int pgd_wins = 0, total = 0;
  for (std::size_t i = 0; i < toy.task.samples.size(); i += 4) {
    const auto& s = toy.task.samples[i];
    if (toy.model.predict(s.features) != s.label) continue;
    const Perturbation walk = pgd(toy.model, s.features, s.label, eps, eps / 4, 10);
    CHECK(walk.linf_norm() <= eps + 1e-9);
    std::vector<double> x_pgd(s.features), x_fgsm(s.features);
    const Perturbation f = fgsm(toy.model, s.features, s.label, eps);
    for (std::size_t k = 0; k < x_pgd.size(); ++k) {
      x_pgd[k] += walk.values[k];
      x_fgsm[k] += f.values[k];
    }
    pgd_wins += toy.model.loss(x_pgd, s.label) >= toy.model.loss(x_fgsm, s.label);
    ++total;
  }
  REQUIRE(total >= 20);
  CHECK(static_cast<double>(pgd_wins) / total >= 0.9);
}

TEST_CASE("deepfool matches the affine binary closed form") {
  const ToyClassifier m = margin_model(3.0, 4.0, 0.0);
  const std::vector<double> x{1.0, 0.0};  // f(x) = 3, predicted class 0
  const AttackResult r = deepfool(m, x, 50, 0.02);
  CHECK(r.success);
  CHECK(r.iterations == 1);
  const double pre0 = r.perturbation.values[0] / 1.02;
  const double pre1 = r.perturbation.values[1] / 1.02;
  CHECK(pre0 == doctest::Approx(-0.36).epsilon(1e-9));  // -f(x)*w/||w||^2
  CHECK(pre1 == doctest::Approx(-0.48).epsilon(1e-9));
}

TEST_CASE("deepfool on the boundary returns a tiny perturbation") {
  const ToyClassifier m = margin_model(3.0, 4.0, 0.0);
  const AttackResult r = deepfool(m, std::vector<double>{0.0, 0.0}, 50, 0.02);
  CHECK(r.perturbation.linf_norm() <= 1e-12);
}

TEST_CASE("deepfool flips nearly every trained-toy sample with small rank damage") {
  const TrainedToy toy = trained_toy();
  int flips = 0, total = 0, shallow = 0;
  for (std::size_t i = 0; i < toy.task.samples.size(); i += 3) {
    const auto& s = toy.task.samples[i];
    if (toy.model.predict(s.features) != s.label) continue;
    const AttackResult r = deepfool(toy.model, s.features);
    ++total;
    if (!r.success) continue;
    ++flips;
    std::vector<double> x_adv(s.features);
    for (std::size_t k = 0; k < x_adv.size(); ++k) x_adv[k] += r.perturbation.values[k];
    const auto ranking = toy.model.ranking(x_adv);
    const int rank = static_cast<int>(std::find(ranking.begin(), ranking.end(), s.label) -
                                      ranking.begin()) +
                     1;
    shallow += rank <= 3;
  }
  REQUIRE(total >= 20);
  CHECK(static_cast<double>(flips) / total >= 0.95);
  CHECK(static_cast<double>(shallow) / flips >= 0.95);
}

TEST_CASE("cw returns zero for an already-adversarial input") {
  const ToyClassifier m = margin_model(1.0, 0.0, 0.0);
  AttackConfig cfg;
  cfg.cw_iterations = 50;
  cfg.cw_binary_search_steps = 2;
  cfg.cw_step = 0.01;
  // source label 1 while the model already predicts 0
  const AttackResult r = cw(m, std::vector<double>{1.0, 0.0}, cfg, 1);
  CHECK(r.success);
  CHECK(r.perturbation.l2_norm() == 0.0);
}

TEST_CASE("cw finds a near-minimal perturbation on a 2-D linear task") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> dist(0.0, 1.0);
  const ToyClassifier m = margin_model(1.5, -0.8, 0.3);
  std::vector<double> x{1.2, 0.4};
  const int pre = m.predict(x);

  AttackConfig cfg;
  cfg.cw_c = 1.0;
  cfg.cw_binary_search_steps = 8;
  cfg.cw_iterations = 400;
  cfg.cw_step = 0.02;
  const AttackResult r = cw(m, x, cfg);
  REQUIRE(r.success);

  const double margin = std::abs(1.5 * x[0] - 0.8 * x[1] + 0.3);
  const double radius = 2.0 * margin / std::hypot(1.5, -0.8);
  const double grid = oracles::cw_grid_min_norm(m, x, pre, radius);
  CHECK(r.perturbation.l2_norm() <= grid * 1.05);
  CHECK(r.perturbation.l2_norm() >= grid * 0.5);
  (void)dist;
  (void)rng;
}

TEST_CASE("cw mean norm grows with the optimizer step size") {
  const TrainedToy toy = trained_toy();
  AttackConfig small, large;
  for (AttackConfig* c : {&small, &large}) {
    c->cw_c = 5.0;
    c->cw_binary_search_steps = 1;
    c->cw_iterations = 120;
    c->cw_box = std::make_pair(toy.task.feature_min, toy.task.feature_max);
  }
  small.cw_step = 0.02;
  large.cw_step = 1.0;

  double small_norm = 0.0, large_norm = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < toy.task.samples.size(); i += 8) {
    const auto& s = toy.task.samples[i];
    if (toy.model.predict(s.features) != s.label) continue;
    small_norm += cw(toy.model, s.features, small).perturbation.l2_norm();
    large_norm += cw(toy.model, s.features, large).perturbation.l2_norm();
    ++n;
  }
  REQUIRE(n >= 10);
  CHECK(large_norm / n > small_norm / n);
}

TEST_CASE("uap on a single-sample task is the projected deepfool step") {
  const TrainedToy toy = trained_toy();
  SyntheticTask single = toy.task;
  single.samples = {toy.task.samples[2]};

  const double eps = 0.5;
  const AttackResult df = deepfool(toy.model, single.samples[0].features);
  const UniversalResult u = uap(toy.model, single, eps, 0.2, 3, 9);
  REQUIRE(u.perturbation.values.size() == df.perturbation.values.size());
  for (std::size_t k = 0; k < u.perturbation.values.size(); ++k)
    CHECK(u.perturbation.values[k] ==
          doctest::Approx(std::clamp(df.perturbation.values[k], -eps, eps)).epsilon(1e-12));
  CHECK(u.perturbation.kind == PerturbationKind::universal);
}

TEST_CASE("uap reaches a useful fooling rate within budget") {
  const TrainedToy toy = trained_toy();

  std::vector<double> df_norms;
  for (std::size_t i = 0; i < toy.task.samples.size(); i += 5)
    df_norms.push_back(deepfool(toy.model, toy.task.samples[i].features).perturbation.l2_norm());
  std::sort(df_norms.begin(), df_norms.end());
  const double eps = 3.0 * df_norms[df_norms.size() / 2];

  const UniversalResult u = uap(toy.model, toy.task, eps, 0.2, 10, 5);
  CHECK(u.perturbation.linf_norm() <= eps + 1e-9);
  CHECK(u.fooling_rate >= 0.6);
}

TEST_CASE("gduap respects the budget and its accepted objectives increase") {
  const TrainedToy toy = trained_toy();
  const double eps = toy.task.default_epsilon;
  const GduapResult g = gduap(toy.model, eps, 100, 17, 4);
  CHECK(g.perturbation.linf_norm() <= eps + 1e-9);
  REQUIRE(g.accepted_objectives.size() >= 2);
  for (std::size_t i = 1; i < g.accepted_objectives.size(); ++i)
    CHECK(g.accepted_objectives[i] > g.accepted_objectives[i - 1]);
  CHECK(g.objective == g.accepted_objectives.back());
}

TEST_CASE("gduap approaches the vertex optimum for a single affine layer") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  Layer l;
  l.in = 10;
  l.out = 6;
  l.weights.resize(60);
  for (auto& w : l.weights) w = dist(rng);
  l.biases.assign(6, 0.0);
  const ToyClassifier m = ToyClassifier::from_layers({l});

  const double eps = 0.8;
  const GduapResult g = gduap(m, eps, 300, 23, 8);
  std::vector<double> out(6, 0.0);
  const auto responses = m.layer_responses(g.perturbation.values);
  double norm = 0.0;
  for (double v : responses[0]) norm += v * v;
  norm = std::sqrt(norm);
  CHECK(norm >= 0.95 * oracles::gduap_vertex_max(l, eps));
}

TEST_CASE("budget respect across the sign-attack family") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_real_distribution<double> eps_dist(0.05, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const ToyClassifier m(6, {9}, 4, rng());
    std::vector<double> x(6);
    for (auto& v : x) v = dist(rng);
    const double eps = eps_dist(rng);
    CHECK(fgsm(m, x, 1, eps).linf_norm() <= eps + 1e-9);
    CHECK(ifgsm_ll(m, x, eps, eps / 3, 7).linf_norm() <= eps + 1e-9);
    CHECK(pgd(m, x, 2, eps, eps / 3, 7).linf_norm() <= eps + 1e-9);
  }
}

TEST_CASE("evaluate_attack implements the record protocol") {
  const TrainedToy toy = trained_toy();
  long long correct = 0;
  for (const auto& s : toy.task.samples)
    correct += toy.model.predict(s.features) == s.label;

  AttackSpec identity;
  identity.kind = AttackKind::identity;
  identity.name = "identity";
  const AttackRun run = evaluate_attack(toy.model, toy.task, identity);
  CHECK(run.records.size() == static_cast<std::size_t>(correct));
  CHECK(fooling_rate(run.records) == 0.0);
  CHECK(run.records.attack == "identity");
  CHECK(run.sample_errors == 0);

  AttackSpec strong;
  strong.kind = AttackKind::pgd;
  strong.name = "pgd";
  strong.config.epsilon = toy.task.default_epsilon;
  strong.config.alpha = toy.task.default_epsilon / 4;
  strong.config.iterations = 10;
  const AttackRun hit = evaluate_attack(toy.model, toy.task, strong);
  CHECK(fooling_rate(hit.records) >= 0.9);
  validate_record_set(hit.records);
}

TEST_CASE("evaluate_attack output is independent of thread count") {
  const TrainedToy toy = trained_toy();
  AttackSpec spec;
  spec.kind = AttackKind::deepfool;
  spec.name = "deepfool";
  const AttackRun parallel = evaluate_attack(toy.model, toy.task, spec, "toy", true);
  const AttackRun serial = evaluate_attack(toy.model, toy.task, spec, "toy", false);
  REQUIRE(parallel.records.size() == serial.records.size());
  for (std::size_t i = 0; i < parallel.records.size(); ++i) {
    CHECK(parallel.records.records[i].id == serial.records.records[i].id);
    CHECK(parallel.records.records[i].post_ranking == serial.records.records[i].post_ranking);
    CHECK(parallel.records.records[i].pre_label_rank == serial.records.records[i].pre_label_rank);
  }
}

TEST_CASE("default suite covers the seven attacks with task defaults") {
  const SyntheticTask task = generate_task(2, 8, 16, {2, 2});
  const auto suite = default_attack_suite(task, 5);
  REQUIRE(suite.size() == 7);
  CHECK(suite[0].kind == AttackKind::fgsm);
  CHECK(suite[3].kind == AttackKind::deepfool);
  for (const auto& spec : suite) {
    CHECK(spec.config.epsilon == task.default_epsilon);
    CHECK(spec.name == attack_kind_name(spec.kind));
  }
}
