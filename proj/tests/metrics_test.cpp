#include "advmetrics/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace advmetrics;

namespace {

// One record with the pre-attack label at the given 1-based rank.
PredictionRecord rank_record(std::int64_t id, int class_count, int rank) {
  PredictionRecord r;
  r.id = id;
  r.post_ranking.resize(class_count);
  for (int c = 0; c < class_count; ++c) r.post_ranking[c] = c;
  r.pre_label = r.post_ranking[rank - 1];
  r.pre_label_rank = rank;
  return r;
}

RecordSet ranks_to_set(int class_count, const std::vector<int>& ranks) {
  RecordSet rs;
  rs.class_count = class_count;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    rs.records.push_back(rank_record(static_cast<std::int64_t>(i), class_count, ranks[i]));
  validate_record_set(rs);
  return rs;
}

Taxonomy toy_tree() {
  return load_taxonomy(
      {{"dog", "animal"}, {"cat", "animal"}, {"car", "vehicle"}, {"animal", "root"},
       {"vehicle", "root"}},
      {{0, "dog"}, {1, "cat"}, {2, "car"}});
}

// Record over C=3 with a chosen pre label and top-1 post label.
PredictionRecord pre_post_record(std::int64_t id, int pre, int post) {
  PredictionRecord r;
  r.id = id;
  r.pre_label = pre;
  r.post_ranking = {post};
  for (int c = 0; c < 3; ++c)
    if (c != post) r.post_ranking.push_back(c);
  r.pre_label_rank = static_cast<int>(std::find(r.post_ranking.begin(), r.post_ranking.end(),
                                                pre) -
                                      r.post_ranking.begin()) +
                     1;
  return r;
}

}  // namespace

TEST_CASE("fooling_rate counts flips") {
  CHECK(fooling_rate(ranks_to_set(100, {1, 3, 50})) == doctest::Approx(2.0 / 3.0));
  CHECK(fooling_rate(ranks_to_set(10, {1, 1, 1})) == 0.0);
  CHECK(fooling_rate(ranks_to_set(10, {2, 5, 10})) == 1.0);
  CHECK_RAISES(Errc::empty_record_set, fooling_rate(RecordSet{{}, 10, "", ""}));
}

TEST_CASE("fr_at_k demotion counts") {
  const RecordSet rs = ranks_to_set(100, {1, 3, 50});
  CHECK(fr_at_k(rs, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(fr_at_k(rs, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(fr_at_k(rs, 3) == doctest::Approx(1.0 / 3.0));
  CHECK(fr_at_k(rs, 50) == 0.0);
  CHECK(fr_at_k(rs, 1) == fooling_rate(rs));
  CHECK_RAISES(Errc::invalid_k, fr_at_k(rs, 0));
  CHECK_RAISES(Errc::invalid_k, fr_at_k(rs, 100));

  const RecordSet maxed = ranks_to_set(8, {8, 8, 8});
  CHECK(fr_at_k(maxed, 7) == 1.0);
}

TEST_CASE("fr_curve over the default grid") {
  const RecordSet rs = ranks_to_set(101, {1, 3, 50});
  const MetricConfig cfg;
  const auto curve = fr_curve(rs, cfg);
  const std::vector<std::pair<int, double>> expected{
      {1, 2.0 / 3.0}, {2, 2.0 / 3.0}, {5, 1.0 / 3.0},  {10, 1.0 / 3.0},
      {20, 1.0 / 3.0}, {50, 0.0},     {100, 0.0}};
  CHECK(curve == expected);
  CHECK(curve == fr_curve_serial(rs, cfg));

  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second);

  const auto zeros = fr_curve(ranks_to_set(101, {1, 1}), cfg);
  for (const auto& [k, v] : zeros) CHECK(v == 0.0);
}

TEST_CASE("MetricConfig validation and clipped defaults") {
  const MetricConfig cfg;
  CHECK_RAISES(Errc::invalid_k, cfg.validate(16));
  CHECK(MetricConfig::defaults_for(16).k_grid == std::vector<int>{1, 2, 5, 10});
  MetricConfig bad;
  bad.k_grid = {1, 1, 2};
  CHECK_RAISES(Errc::invalid_k, bad.validate(100));
}

TEST_CASE("auc of the derived example curve") {
  const std::vector<std::pair<int, double>> curve{
      {1, 2.0 / 3.0}, {2, 2.0 / 3.0}, {5, 1.0 / 3.0},  {10, 1.0 / 3.0},
      {20, 1.0 / 3.0}, {50, 0.0},     {100, 0.0}};
  // Hand trapezoid: 2/3*1 + 1/2*3 + 1/3*5 + 1/3*10 + 1/6*30 + 0 = 73/6; /99.
  CHECK(auc(curve) == doctest::Approx(73.0 / 594.0).epsilon(1e-12));

  double plain = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i)
    plain += 0.5 * (curve[i].second + curve[i + 1].second) *
             (curve[i + 1].first - curve[i].first);
  plain /= curve.back().first - curve.front().first;
  CHECK(auc(curve) == doctest::Approx(plain).epsilon(1e-14));
}

TEST_CASE("auc of constant curves is exact") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> denom(3, 997);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = denom(rng);
    std::uniform_int_distribution<int> numer(0, n);
    const double c = static_cast<double>(numer(rng)) / n;  // count/N style values
    std::vector<std::pair<int, double>> curve;
    int k = 1;
    std::uniform_int_distribution<int> gap(1, 37);
    std::uniform_int_distribution<int> len(2, 12);
    const int points = len(rng);
    for (int i = 0; i < points; ++i) {
      curve.emplace_back(k, c);
      k += gap(rng);
    }
    CHECK(auc(curve) == c);
  }
  CHECK(auc({{1, 1.0}, {2, 1.0}, {5, 1.0}}) == 1.0);
  CHECK(auc({{1, 0.0}, {2, 0.0}}) == 0.0);
  CHECK_RAISES(Errc::too_few_points, auc({{1, 0.5}}));
}

TEST_CASE("qi_wup on the toy tree") {
  const Taxonomy t = toy_tree();
  CHECK(qi_wup(pre_post_record(0, 0, 0), t, 1.0) == 0);         // unflipped
  CHECK(qi_wup(pre_post_record(1, 0, 2), t, 0.7) == 1);         // dog->car, 1/3 < 0.7
  CHECK(qi_wup(pre_post_record(2, 0, 1), t, 0.5) == 0);         // dog->cat, 2/3 >= 0.5
}

TEST_CASE("qi_vis thresholds strictly") {
  const WeightTemplates w = make_templates(3, 2, {1, 0, 1, 1, 0, 1});
  const VisualSimilarityMatrix v = pairwise_vis_matrix(w);
  CHECK(qi_vis(pre_post_record(0, 1, 1), v, 1.0) == 0);   // Vis(i,i)=1
  CHECK(qi_vis(pre_post_record(1, 0, 2), v, 0.1) == 1);   // orthogonal
  CHECK(qi_vis(pre_post_record(2, 0, 1), v, 0.1) == 0);   // 0.707 >= 0.1
}

TEST_CASE("qi_targeted compares the target label") {
  const Taxonomy t = toy_tree();
  PredictionRecord hit = pre_post_record(0, 2, 0);  // post top-1 = dog
  hit.target_label = 0;
  CHECK(qi_targeted(hit, t, 0.9) == 0);  // wup(dog,dog)=1

  PredictionRecord near = pre_post_record(1, 2, 1);  // post top-1 = cat
  near.target_label = 0;                             // target dog, wup 2/3
  CHECK(qi_targeted(near, t, 0.7) == 1);
  CHECK(qi_targeted(near, t, 0.6) == 0);

  PredictionRecord missing = pre_post_record(2, 0, 1);
  CHECK_RAISES(Errc::missing_target, qi_targeted(missing, t, 0.7));
}

TEST_CASE("mean_qi averages per-record indicators") {
  const Taxonomy t = toy_tree();
  RecordSet rs;
  rs.class_count = 3;
  rs.records = {pre_post_record(0, 0, 2),   // 1/3 < 0.5 -> 1
                pre_post_record(1, 0, 1),   // 2/3 >= 0.5 -> 0
                pre_post_record(2, 1, 2)};  // 1/3 < 0.5 -> 1
  CHECK(mean_qi(rs, t, 0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(mean_qi(rs, t, 0.5) == mean_qi_serial(rs, t, 0.5));

  RecordSet clean;
  clean.class_count = 3;
  clean.records = {pre_post_record(0, 0, 0), pre_post_record(1, 1, 1)};
  CHECK(mean_qi(clean, t, 0.9) == 0.0);

  RecordSet flipped;
  flipped.class_count = 3;
  flipped.records = {pre_post_record(0, 0, 1), pre_post_record(1, 0, 2)};
  CHECK(mean_qi(flipped, t, 1.1) == 1.0);  // threshold above max similarity
}

TEST_CASE("threshold_sweep counts below each threshold") {
  // Chain taxonomy with Wup(0,1)=0.3 (depths 10, lcs depth 3) and
  // Wup(2,3)=0.8 (depths 5, lcs depth 4).
  std::vector<std::pair<std::string, std::string>> edges;
  auto chain = [&edges](const std::string& from, const std::string& prefix, int n) {
    std::string prev = from;
    for (int i = 0; i < n; ++i) {
      std::string cur = prefix + std::to_string(i);
      edges.emplace_back(cur, prev);
      prev = cur;
    }
    return prev;
  };
  const std::string c3 = chain("root", "t", 2);       // depth 3
  const std::string la = chain(c3, "a", 7);           // depth 10
  const std::string lb = chain(c3, "b", 7);           // depth 10
  const std::string c4 = chain(c3, "u", 1);           // depth 4
  const std::string lc = chain(c4, "c", 1);           // depth 5
  const std::string ld = chain(c4, "d", 1);           // depth 5
  const Taxonomy t = load_taxonomy(edges, {{0, la}, {1, lb}, {2, lc}, {3, ld}});
  CHECK(t.wup_similarity(0, 1) == doctest::Approx(0.3));
  CHECK(t.wup_similarity(2, 3) == doctest::Approx(0.8));

  RecordSet rs;
  rs.class_count = 4;
  PredictionRecord r1;
  r1.id = 0;
  r1.pre_label = 0;
  r1.post_ranking = {1, 0, 2, 3};
  r1.pre_label_rank = 2;
  PredictionRecord r2;
  r2.id = 1;
  r2.pre_label = 2;
  r2.post_ranking = {3, 2, 0, 1};
  r2.pre_label_rank = 2;
  rs.records = {r1, r2};

  const auto sweep = threshold_sweep(rs, t, {0.5, 0.7, 0.9});
  const std::vector<std::pair<double, double>> expected{{0.5, 0.5}, {0.7, 0.5}, {0.9, 1.0}};
  CHECK(sweep == expected);
  CHECK(sweep == threshold_sweep_serial(rs, t, {0.5, 0.7, 0.9}));

  const auto lows = threshold_sweep(rs, t, {0.1, 0.2});
  for (const auto& [thr, v] : lows) CHECK(v == 0.0);
  const auto highs = threshold_sweep(rs, t, {0.95, 1.5});
  for (const auto& [thr, v] : highs) CHECK(v == 1.0);

  CHECK_RAISES(Errc::empty_thresholds, threshold_sweep(rs, t, {}));
  CHECK_RAISES(Errc::invalid_thresholds, threshold_sweep(rs, t, {0.5, 0.5}));
}

TEST_CASE("metric identities on randomized record sets") {
  std::mt19937_64 rng(41);
  const WeightTemplates w = [] {
    std::mt19937_64 wr(77);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> vals(12 * 5);
    for (auto& v : vals) v = dist(wr);
    return make_templates(12, 5, std::move(vals));
  }();
  const VisualSimilarityMatrix vis = pairwise_vis_matrix(w);

  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_dist(1, 60);
    RecordSet rs = oracles::random_record_set(rng, 12, n_dist(rng));

    CHECK(fr_at_k(rs, 1) == fooling_rate(rs));
    for (int k = 1; k < 12; ++k) {
      CHECK(fr_at_k(rs, k) == oracles::fr_at_k_rescan(rs, k));
      if (k > 1) CHECK(fr_at_k(rs, k) <= fr_at_k(rs, k - 1));
    }

    const auto sweep = threshold_sweep(rs, vis, {-0.5, 0.0, 0.3, 0.8, 1.01});
    for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].second >= sweep[i - 1].second);

    // permutation invariance
    RecordSet shuffled = rs;
    std::shuffle(shuffled.records.begin(), shuffled.records.end(), rng);
    CHECK(fooling_rate(shuffled) == fooling_rate(rs));
    CHECK(mean_qi(shuffled, vis, 0.1) == mean_qi(rs, vis, 0.1));
    CHECK(fr_curve(shuffled, MetricConfig::defaults_for(12)) ==
          fr_curve(rs, MetricConfig::defaults_for(12)));
  }
}

TEST_CASE("parallel folds are thread-stable") {
  std::mt19937_64 rng(53);
  const RecordSet rs = oracles::random_record_set(rng, 20, 500);
  const WeightTemplates w = [] {
    std::mt19937_64 wr(5);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> vals(20 * 6);
    for (auto& v : vals) v = dist(wr);
    return make_templates(20, 6, std::move(vals));
  }();
  const VisualSimilarityMatrix vis = pairwise_vis_matrix(w);

  const double base = mean_qi(rs, vis, 0.1);
  const auto base_sweep = threshold_sweep(rs, vis, {0.0, 0.1, 0.2});
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  CHECK(mean_qi(rs, vis, 0.1) == base);
  CHECK(threshold_sweep(rs, vis, {0.0, 0.1, 0.2}) == base_sweep);
  omp_set_num_threads(saved);
  CHECK(mean_qi_serial(rs, vis, 0.1) == base);
}
