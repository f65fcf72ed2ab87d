#include "advmetrics/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "advmetrics/error.hpp"
#include "advmetrics/seeding.hpp"
#include "advmetrics/synthetic.hpp"

namespace advmetrics {

namespace {

void affine(const Layer& l, std::span<const double> in, std::vector<double>& out) {
  out.assign(l.out, 0.0);
  for (int r = 0; r < l.out; ++r) {
    double s = l.biases[r];
    const double* w = l.weights.data() + static_cast<std::size_t>(r) * l.in;
    for (int c = 0; c < l.in; ++c) s += w[c] * in[c];
    out[r] = s;
  }
}

// g_in = W^T g_out
void affine_transpose(const Layer& l, std::span<const double> g_out, std::vector<double>& g_in) {
  g_in.assign(l.in, 0.0);
  for (int r = 0; r < l.out; ++r) {
    const double* w = l.weights.data() + static_cast<std::size_t>(r) * l.in;
    const double g = g_out[r];
    for (int c = 0; c < l.in; ++c) g_in[c] += w[c] * g;
  }
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) raise(Errc::non_finite_input, "input contains a non-finite value");
}

}  // namespace

ToyClassifier::ToyClassifier(int input_dim, const std::vector<int>& hidden_dims, int class_count,
                             std::uint64_t seed) {
  if (input_dim < 1 || class_count < 2)
    raise(Errc::invalid_shape, "classifier needs input_dim >= 1 and class_count >= 2");
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden_dims) {
    if (h < 1) raise(Errc::invalid_shape, "hidden width must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(class_count);

  std::mt19937_64 rng(mix_seed(seed, 0x1717));
  for (std::size_t i = 1; i < dims.size(); ++i) {
    Layer l;
    l.in = dims[i - 1];
    l.out = dims[i];
    const bool last = i + 1 == dims.size();
    const double scale = std::sqrt((last ? 1.0 : 2.0) / l.in);  // He for ReLU layers
    std::normal_distribution<double> dist(0.0, scale);
    l.weights.resize(static_cast<std::size_t>(l.in) * l.out);
    for (auto& w : l.weights) w = dist(rng);
    l.biases.assign(l.out, 0.0);
    layers_.push_back(std::move(l));
  }
}

ToyClassifier ToyClassifier::from_layers(std::vector<Layer> layers) {
  if (layers.empty()) raise(Errc::invalid_shape, "classifier needs >= 1 layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.in < 1 || l.out < 1 ||
        l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.biases.size() != static_cast<std::size_t>(l.out))
      raise(Errc::invalid_shape, "layer " + std::to_string(i) + " has inconsistent shape");
    if (i > 0 && layers[i - 1].out != l.in)
      raise(Errc::invalid_shape, "layer " + std::to_string(i) + " input does not chain");
  }
  ToyClassifier m;
  m.layers_ = std::move(layers);
  return m;
}

ToyClassifier::Forward ToyClassifier::forward(std::span<const double> x) const {
  Forward f;
  f.pre.resize(layers_.size());
  f.post.resize(layers_.size());
  std::span<const double> cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    affine(layers_[i], cur, f.pre[i]);
    if (i + 1 < layers_.size()) {
      f.post[i] = f.pre[i];
      for (double& v : f.post[i]) v = std::max(v, 0.0);
    } else {
      f.post[i] = f.pre[i];  // linear logits
    }
    cur = f.post[i];
  }
  return f;
}

std::vector<double> ToyClassifier::logits(std::span<const double> x) const {
  return forward(x).post.back();
}

std::vector<double> ToyClassifier::probabilities(std::span<const double> x) const {
  std::vector<double> z = logits(x);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

int ToyClassifier::predict(std::span<const double> x) const {
  const std::vector<double> z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::vector<int> ToyClassifier::ranking(std::span<const double> x) const {
  const std::vector<double> z = logits(x);
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&z](int a, int b) { return z[a] > z[b]; });
  return order;
}

double ToyClassifier::loss(std::span<const double> x, int label) const {
  const std::vector<double> z = logits(x);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  return zmax + std::log(sum) - z[label];
}

std::vector<double> ToyClassifier::input_gradient(std::span<const double> x, int label) const {
  require_finite(x);
  const Forward f = forward(x);

  // dJ/dlogits = softmax - onehot
  std::vector<double> g = f.post.back();
  const double zmax = *std::max_element(g.begin(), g.end());
  double sum = 0.0;
  for (double& v : g) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : g) v /= sum;
  g[label] -= 1.0;

  std::vector<double> g_in;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    affine_transpose(layers_[i], g, g_in);
    if (i > 0) {
      for (int c = 0; c < layers_[i].in; ++c)
        if (f.pre[i - 1][c] <= 0.0) g_in[c] = 0.0;
    }
    g.swap(g_in);
  }
  return g;
}

Matrix ToyClassifier::logit_jacobian(std::span<const double> x) const {
  require_finite(x);
  const Forward f = forward(x);
  const int c = class_count();
  const int d = input_dim();
  Matrix jac(c, d);
  std::vector<double> g, g_in;
  for (int k = 0; k < c; ++k) {
    g.assign(c, 0.0);
    g[k] = 1.0;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      affine_transpose(layers_[i], g, g_in);
      if (i > 0) {
        for (int col = 0; col < layers_[i].in; ++col)
          if (f.pre[i - 1][col] <= 0.0) g_in[col] = 0.0;
      }
      g.swap(g_in);
    }
    for (int col = 0; col < d; ++col) jac.at(k, col) = g[col];
  }
  return jac;
}

std::vector<double> ToyClassifier::logit_diff_input_gradient(std::span<const double> x, int a,
                                                             int b) const {
  require_finite(x);
  const Forward f = forward(x);
  std::vector<double> g(class_count(), 0.0);
  g[a] += 1.0;
  g[b] -= 1.0;
  std::vector<double> g_in;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    affine_transpose(layers_[i], g, g_in);
    if (i > 0) {
      for (int col = 0; col < layers_[i].in; ++col)
        if (f.pre[i - 1][col] <= 0.0) g_in[col] = 0.0;
    }
    g.swap(g_in);
  }
  return g;
}

std::vector<std::vector<double>> ToyClassifier::layer_responses(
    std::span<const double> v) const {
  return forward(v).post;
}

double ToyClassifier::activation_objective(std::span<const double> v) const {
  require_finite(v);
  double obj = 0.0;
  for (const auto& response : forward(v).post) {
    const double n = l2_norm(response);
    if (n == 0.0) raise(Errc::zero_activation, "a layer response has zero norm");
    obj += std::log(n);
  }
  return obj;
}

std::pair<double, std::vector<double>> ToyClassifier::activation_objective_gradient(
    std::span<const double> v) const {
  require_finite(v);
  const Forward f = forward(v);
  const std::size_t n_layers = layers_.size();

  double obj = 0.0;
  std::vector<double> sq_norms(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    const double n = l2_norm(f.post[i]);
    if (n == 0.0) raise(Errc::zero_activation, "a layer response has zero norm");
    sq_norms[i] = n * n;
    obj += std::log(n);
  }

  // d/dh_i of log ||h_i|| is h_i / ||h_i||^2; accumulate top-down.
  std::vector<double> g(f.post.back().size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = f.post.back()[k] / sq_norms.back();
  std::vector<double> g_in;
  for (std::size_t i = n_layers; i-- > 0;) {
    if (i + 1 < n_layers) {
      for (int c = 0; c < layers_[i].out; ++c)
        if (f.pre[i][c] <= 0.0) g[c] = 0.0;
    }
    affine_transpose(layers_[i], g, g_in);
    g.swap(g_in);
    if (i > 0) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += f.post[i - 1][k] / sq_norms[i - 1];
    }
  }
  return {obj, std::move(g)};
}

WeightTemplates ToyClassifier::weight_templates() const {
  const Layer& last = layers_.back();
  return make_templates(last.out, last.in, last.weights);
}

double ToyClassifier::accumulate_param_gradients(std::span<const double> x, int label,
                                                 std::vector<Layer>& grads) const {
  const Forward f = forward(x);

  std::vector<double> g = f.post.back();
  const double zmax = *std::max_element(g.begin(), g.end());
  double sum = 0.0;
  for (double& v : g) {
    v = std::exp(v - zmax);
    sum += v;
  }
  const double sample_loss = zmax + std::log(sum) - f.post.back()[label];
  for (double& v : g) v /= sum;
  g[label] -= 1.0;

  std::vector<double> g_in;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    std::span<const double> input =
        i == 0 ? x : std::span<const double>(f.post[i - 1]);
    Layer& gl = grads[i];
    for (int r = 0; r < layers_[i].out; ++r) {
      gl.biases[r] += g[r];
      double* gw = gl.weights.data() + static_cast<std::size_t>(r) * layers_[i].in;
      for (int c = 0; c < layers_[i].in; ++c) gw[c] += g[r] * input[c];
    }
    affine_transpose(layers_[i], g, g_in);
    if (i > 0) {
      for (int c = 0; c < layers_[i].in; ++c)
        if (f.pre[i - 1][c] <= 0.0) g_in[c] = 0.0;
    }
    g.swap(g_in);
  }
  return sample_loss;
}

TrainResult train_model(ToyClassifier& model, const SyntheticTask& task, int epochs,
                        double learning_rate, std::uint64_t seed, int batch_size) {
  if (task.samples.empty()) raise(Errc::invalid_shape, "task has no samples");
  if (batch_size < 1) raise(Errc::invalid_shape, "batch size must be >= 1");

  std::vector<Layer> grads = model.layers();
  auto zero_grads = [&grads]() {
    for (auto& l : grads) {
      std::fill(l.weights.begin(), l.weights.end(), 0.0);
      std::fill(l.biases.begin(), l.biases.end(), 0.0);
    }
  };

  std::mt19937_64 rng(mix_seed(seed, 0x7281));
  std::vector<std::size_t> order(task.samples.size());
  std::iota(order.begin(), order.end(), 0);

  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      zero_grads();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = task.samples[order[i]];
        batch_loss += model.accumulate_param_gradients(s.features, s.label, grads);
      }
      if (!std::isfinite(batch_loss))
        raise(Errc::diverged_loss, "non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += batch_loss;
      const double scale = learning_rate / static_cast<double>(end - start);
      auto& layers = model.mutable_layers();
      for (std::size_t li = 0; li < layers.size(); ++li) {
        for (std::size_t k = 0; k < layers[li].weights.size(); ++k)
          layers[li].weights[k] -= scale * grads[li].weights[k];
        for (std::size_t k = 0; k < layers[li].biases.size(); ++k)
          layers[li].biases[k] -= scale * grads[li].biases[k];
      }
    }
  }
  return {train_accuracy(model, task), epoch_loss / static_cast<double>(task.samples.size()),
          epochs};
}

double train_accuracy(const ToyClassifier& model, const SyntheticTask& task) {
  if (task.samples.empty()) return 0.0;
  long long correct = 0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(task.samples.size());
#pragma omp parallel for reduction(+ : correct) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    correct += model.predict(task.samples[i].features) == task.samples[i].label;
  return static_cast<double>(correct) / static_cast<double>(task.samples.size());
}

}  // namespace advmetrics
