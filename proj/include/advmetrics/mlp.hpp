#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "advmetrics/matrix.hpp"
#include "advmetrics/visual_sim.hpp"

namespace advmetrics {

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> biases;   // out
};

/// Small MLP (affine + ReLU stack, linear final layer) trained with softmax
/// cross-entropy. Forward passes, the loss, and all gradients are exact and
/// deterministic; ranking ties break by ascending class id.
class ToyClassifier {
 public:
  ToyClassifier(int input_dim, const std::vector<int>& hidden_dims, int class_count,
                std::uint64_t seed);
  static ToyClassifier from_layers(std::vector<Layer> layers);

  int input_dim() const { return layers_.front().in; }
  int class_count() const { return layers_.back().out; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> probabilities(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  /// Full ranking of class ids, highest logit first, ties by ascending id.
  std::vector<int> ranking(std::span<const double> x) const;

  /// Softmax cross-entropy J(x, label), via log-sum-exp.
  double loss(std::span<const double> x, int label) const;

  /// Exact d J(x, label) / d x. Throws NonFiniteInput.
  std::vector<double> input_gradient(std::span<const double> x, int label) const;

  /// d logits / d x as a C x D matrix (row k = gradient of logit k).
  Matrix logit_jacobian(std::span<const double> x) const;

  /// d (logit_a - logit_b) / d x in a single backward pass.
  std::vector<double> logit_diff_input_gradient(std::span<const double> x, int a, int b) const;

  /// Per-layer responses on input v: post-ReLU output of each hidden layer
  /// and the final logits.
  std::vector<std::vector<double>> layer_responses(std::span<const double> v) const;

  /// Activation objective sum_i log ||l_i(v)||_2 and its input gradient.
  /// Throws ZeroActivation when any layer response has zero norm.
  double activation_objective(std::span<const double> v) const;
  std::pair<double, std::vector<double>> activation_objective_gradient(
      std::span<const double> v) const;

  /// Final-layer weight rows as class templates.
  WeightTemplates weight_templates() const;

  /// Adds d J(x,label) / d params into grads (same layout as layers()).
  /// Returns the sample loss.
  double accumulate_param_gradients(std::span<const double> x, int label,
                                    std::vector<Layer>& grads) const;

 private:
  ToyClassifier() = default;
  struct Forward {
    std::vector<std::vector<double>> pre;   // z per layer
    std::vector<std::vector<double>> post;  // activation output per layer
  };
  Forward forward(std::span<const double> x) const;

  std::vector<Layer> layers_;
};

struct SyntheticTask;

struct TrainResult {
  double train_accuracy = 0;
  double final_loss = 0;
  int epochs = 0;
};

/// Mini-batch SGD on softmax cross-entropy. Deterministic under seed.
/// Throws DivergedLoss on non-finite loss.
TrainResult train_model(ToyClassifier& model, const SyntheticTask& task, int epochs,
                        double learning_rate, std::uint64_t seed, int batch_size = 32);

/// Fraction of task samples the model classifies correctly.
double train_accuracy(const ToyClassifier& model, const SyntheticTask& task);

}  // namespace advmetrics
