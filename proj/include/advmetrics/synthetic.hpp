#pragma once

#include <cstdint>
#include <vector>

#include "advmetrics/taxonomy.hpp"

namespace advmetrics {

struct LabeledSample {
  std::vector<double> features;
  int label = 0;
};

/// Gaussian-cluster classification task with a matching class hierarchy.
/// Cluster means are drawn hierarchically (branch -> super-class -> leaf),
/// so sibling leaf classes sit closer together than non-siblings.
struct SyntheticTask {
  int class_count = 0;
  int feature_dim = 0;
  std::vector<LabeledSample> samples;
  Taxonomy taxonomy;
  std::vector<std::vector<double>> class_means;  // empirical per-class means
  double default_epsilon = 0;  // 0.5 x median nearest inter-class-mean distance
  double feature_min = 0;
  double feature_max = 0;
  std::uint64_t seed = 0;
  std::vector<int> branching;
  int samples_per_class = 0;
};

/// Internal fan-outs root->...->super-class level; the leaf fan-out is
/// classes / product(branching). E.g. classes=16, branching={2,2} gives
/// root -> 2 -> 4 super-classes -> 16 leaves.
std::vector<int> default_branching(int classes);

/// Throws InvalidShape on bad dimensions. Deterministic under seed.
SyntheticTask generate_task(std::uint64_t seed, int classes, int dim,
                            std::vector<int> branching, int samples_per_class = 20);

/// Recomputes the derived fields (empirical means, default epsilon, feature
/// range) from samples; used after loading a task from disk.
void refresh_task_stats(SyntheticTask& task);

}  // namespace advmetrics
