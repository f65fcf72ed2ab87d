#include "advmetrics/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "advmetrics/error.hpp"
#include "advmetrics/seeding.hpp"

namespace advmetrics {

std::vector<int> default_branching(int classes) {
  std::vector<int> branching;
  int group = classes;
  while (group > 4) {
    int factor = 2;
    while (group % factor != 0) ++factor;
    if (factor == group) break;  // prime group stays one level
    branching.push_back(factor);
    group /= factor;
  }
  return branching;
}

SyntheticTask generate_task(std::uint64_t seed, int classes, int dim,
                            std::vector<int> branching, int samples_per_class) {
  if (classes < 4 || dim < 2)
    raise(Errc::invalid_shape, "need classes >= 4 and dim >= 2");
  if (samples_per_class < 20)
    raise(Errc::invalid_shape, "need >= 20 samples per class");
  long long groups = 1;
  for (int f : branching) {
    if (f < 2) raise(Errc::invalid_shape, "branching fan-outs must be >= 2");
    groups *= f;
  }
  if (groups > classes || classes % groups != 0)
    raise(Errc::invalid_shape, "branching product " + std::to_string(groups) +
                                   " must divide class count " + std::to_string(classes));
  const int leaves_per_group = static_cast<int>(classes / groups);
  if (groups > 1 && leaves_per_group < 2)
    raise(Errc::invalid_shape, "each super-class needs >= 2 leaf classes");

  SyntheticTask task;
  task.class_count = classes;
  task.feature_dim = dim;
  task.seed = seed;
  task.branching = branching;
  task.samples_per_class = samples_per_class;

  // Hierarchical cluster means: each level scatters around its parent with a
  // geometrically shrinking spread, so sibling leaves end up closest.
  constexpr double kTopSigma = 20.0;
  constexpr double kLevelDecay = 0.4;
  constexpr double kSampleSigma = 0.7;

  std::vector<int> fanouts = branching;
  fanouts.push_back(leaves_per_group);

  std::mt19937_64 rng(mix_seed(seed, 1));
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::pair<int, std::string>> labels;
  std::vector<std::vector<double>> level_means{std::vector<double>(dim, 0.0)};
  std::vector<std::string> level_names{"root"};

  double sigma = kTopSigma;
  std::vector<std::vector<double>> true_leaf_means;
  for (std::size_t level = 0; level < fanouts.size(); ++level) {
    const bool leaf_level = level + 1 == fanouts.size();
    std::vector<std::vector<double>> next_means;
    std::vector<std::string> next_names;
    int index = 0;
    for (std::size_t p = 0; p < level_means.size(); ++p) {
      for (int c = 0; c < fanouts[level]; ++c, ++index) {
        std::vector<double> mean(dim);
        for (int k = 0; k < dim; ++k) mean[k] = level_means[p][k] + sigma * unit(rng);
        std::string name = leaf_level ? "class_" + std::to_string(index)
                                      : "g" + std::to_string(level + 1) + "_" +
                                            std::to_string(index);
        edges.emplace_back(name, level_names[p]);
        if (leaf_level) labels.emplace_back(index, name);
        next_means.push_back(std::move(mean));
        next_names.push_back(std::move(name));
      }
    }
    if (leaf_level) true_leaf_means = next_means;
    level_means = std::move(next_means);
    level_names = std::move(next_names);
    sigma *= kLevelDecay;
  }

  task.taxonomy = load_taxonomy(edges, labels);

  task.samples.reserve(static_cast<std::size_t>(classes) * samples_per_class);
  for (int c = 0; c < classes; ++c) {
    std::mt19937_64 class_rng(mix_seed(seed, 1000 + static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> noise(0.0, kSampleSigma);
    for (int s = 0; s < samples_per_class; ++s) {
      LabeledSample sample;
      sample.label = c;
      sample.features.resize(dim);
      for (int k = 0; k < dim; ++k) sample.features[k] = true_leaf_means[c][k] + noise(class_rng);
      task.samples.push_back(std::move(sample));
    }
  }

  refresh_task_stats(task);
  return task;
}

void refresh_task_stats(SyntheticTask& task) {
  const int c = task.class_count;
  const int d = task.feature_dim;
  task.class_means.assign(c, std::vector<double>(d, 0.0));
  std::vector<int> counts(c, 0);
  task.feature_min = task.samples.empty() ? 0.0 : task.samples.front().features.front();
  task.feature_max = task.feature_min;
  for (const auto& s : task.samples) {
    ++counts[s.label];
    for (int k = 0; k < d; ++k) {
      task.class_means[s.label][k] += s.features[k];
      task.feature_min = std::min(task.feature_min, s.features[k]);
      task.feature_max = std::max(task.feature_max, s.features[k]);
    }
  }
  for (int i = 0; i < c; ++i) {
    if (counts[i] == 0) raise(Errc::invalid_shape, "class " + std::to_string(i) + " has no samples");
    for (int k = 0; k < d; ++k) task.class_means[i][k] /= counts[i];
  }

  // Default attack budget: half the median nearest inter-class-mean distance,
  // so difficulty is comparable across seeds.
  std::vector<double> nearest(c);
  for (int i = 0; i < c; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j) {
      if (i == j) continue;
      double dist = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = task.class_means[i][k] - task.class_means[j][k];
        dist += diff * diff;
      }
      best = std::min(best, std::sqrt(dist));
    }
    nearest[i] = best;
  }
  std::sort(nearest.begin(), nearest.end());
  const double median = c % 2 == 1 ? nearest[c / 2]
                                   : 0.5 * (nearest[c / 2 - 1] + nearest[c / 2]);
  task.default_epsilon = 0.5 * median;
}

}  // namespace advmetrics
