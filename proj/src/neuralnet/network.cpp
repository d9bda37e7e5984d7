// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "reviewranker/kernels.hpp"
#include "reviewranker/neuralnet.hpp"

namespace reviewranker::nn {

ModelParams::ModelParams(std::vector<std::size_t> layer_sizes)
    : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) throw DimensionError("a network needs at least two layer sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    if (layer_sizes_[l] == 0 || layer_sizes_[l + 1] == 0) {
      throw DimensionError("layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += layer_sizes_[l] * layer_sizes_[l + 1] + layer_sizes_[l + 1];
  }
  values_.assign(total, 0.0);
}

std::span<double> ModelParams::weights(std::size_t layer) {
  return std::span<double>(values_).subspan(offsets_.at(layer),
                                            layer_sizes_[layer] * layer_sizes_[layer + 1]);
}

std::span<const double> ModelParams::weights(std::size_t layer) const {
  return std::span<const double>(values_).subspan(offsets_.at(layer),
                                                  layer_sizes_[layer] * layer_sizes_[layer + 1]);
}

std::span<const double> ModelParams::weight_row(std::size_t layer, std::size_t input) const {
  const std::size_t cols = layer_sizes_[layer + 1];
  return weights(layer).subspan(input * cols, cols);
}

std::span<double> ModelParams::weight_row(std::size_t layer, std::size_t input) {
  const std::size_t cols = layer_sizes_[layer + 1];
  return weights(layer).subspan(input * cols, cols);
}

std::span<double> ModelParams::biases(std::size_t layer) {
  return std::span<double>(values_).subspan(
      offsets_.at(layer) + layer_sizes_[layer] * layer_sizes_[layer + 1], layer_sizes_[layer + 1]);
}

std::span<const double> ModelParams::biases(std::size_t layer) const {
  return std::span<const double>(values_).subspan(
      offsets_.at(layer) + layer_sizes_[layer] * layer_sizes_[layer + 1], layer_sizes_[layer + 1]);
}

bool ModelParams::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ModelParams::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void TrainConfig::validate() const {
  for (auto h : hidden_sizes) {
    if (h == 0) throw std::invalid_argument("hidden layer sizes must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout_rate must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState s;
  s.first_moment.assign(params.values().size(), 0.0);
  s.second_moment.assign(params.values().size(), 0.0);
  return s;
}

std::size_t ProbabilityDistribution::argmax() const noexcept {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

ModelParams init_params(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  ModelParams params(std::vector<std::size_t>(layer_sizes.begin(), layer_sizes.end()));
  Rng rng(seed);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer_sizes[l]));
    for (double& w : params.weights(l)) w = rng.uniform(-limit, limit);
  }
  return params;
}

namespace {

// Per-sample intermediate values kept for the backward pass.
struct Cache {
  std::vector<std::vector<double>> relu;  // hidden outputs before dropout
  std::vector<std::vector<double>> mask;  // 0 or 1/(1-p); empty when no dropout
  std::vector<std::vector<double>> act;   // hidden outputs after dropout
  std::vector<double> probs;
};

void softmax_in_place(std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// z = b + sum_i x[i] * W[i, :], skipping zero inputs (bag-of-words input is
// mostly zeros, as are ReLU outputs).
void affine(const ModelParams& params, std::size_t layer, std::span<const double> x,
            std::vector<double>& z) {
  auto b = params.biases(layer);
  z.assign(b.begin(), b.end());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      auto row = params.weight_row(layer, i);
      k.axpy(x[i], row.data(), z.data(), z.size());
    }
  }
}

void forward_cached(const ModelParams& params, std::span<const double> x, Mode mode,
                    double dropout_rate, Rng& rng, Cache& cache) {
  if (x.size() != params.input_size()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(params.input_size()));
  }
  const std::size_t layers = params.num_layers();
  cache.relu.resize(layers - 1);
  cache.mask.resize(layers - 1);
  cache.act.resize(layers - 1);

  std::span<const double> input = x;
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    auto& r = cache.relu[l];
    affine(params, l, input, r);
    for (double& v : r) v = v > 0.0 ? v : 0.0;

    auto& a = cache.act[l];
    auto& m = cache.mask[l];
    const bool feeds_hidden = l + 2 < layers;
    if (mode == Mode::Train && dropout_rate > 0.0 && feeds_hidden) {
      const double keep_scale = 1.0 / (1.0 - dropout_rate);
      m.resize(r.size());
      a.resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) {
        m[i] = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
        a[i] = r[i] * m[i];
      }
    } else {
      m.clear();
      a = r;
    }
    input = a;
  }
  affine(params, layers - 1, input, cache.probs);
  softmax_in_place(cache.probs);
}

}  // namespace

ProbabilityDistribution forward(const ModelParams& params, std::span<const double> x, Mode mode,
                                double dropout_rate, Rng& rng) {
  Cache cache;
  forward_cached(params, x, mode, dropout_rate, rng, cache);
  return ProbabilityDistribution{std::move(cache.probs)};
}

ProbabilityDistribution predict_proba(const ModelParams& params, std::span<const double> x) {
  Rng unused(0);
  return forward(params, x, Mode::Infer, 0.0, unused);
}

double cross_entropy_loss(const ProbabilityDistribution& probs, std::size_t label) {
  if (label >= probs.size()) throw DimensionError("label out of range");
  return -std::log(std::max(probs.probs[label], 1e-12));
}

double accumulate_gradients(const ModelParams& params, std::span<const double> x,
                            std::size_t label, Mode mode, double dropout_rate, Rng& rng,
                            Gradients& grads) {
  if (!grads.same_shape(params)) throw DimensionError("gradient buffer shape mismatch");
  if (label >= params.output_size()) throw DimensionError("label out of range");
  Cache cache;
  forward_cached(params, x, mode, dropout_rate, rng, cache);
  const double loss = -std::log(std::max(cache.probs[label], 1e-12));

  // Softmax followed by cross-entropy: dL/dz = p - onehot(label).
  std::vector<double> delta = cache.probs;
  delta[label] -= 1.0;
  std::vector<double> prev_delta;
  const auto& k = kernels::active();

  for (std::size_t l = params.num_layers(); l-- > 0;) {
    std::span<const double> input = l == 0 ? x : std::span<const double>(cache.act[l - 1]);
    auto db = grads.biases(l);
    for (std::size_t j = 0; j < delta.size(); ++j) db[j] += delta[j];
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input[i] != 0.0) {
        auto row = grads.weight_row(l, i);
        k.axpy(input[i], delta.data(), row.data(), row.size());
      }
    }
    if (l == 0) break;

    const auto& r = cache.relu[l - 1];
    const auto& m = cache.mask[l - 1];
    prev_delta.assign(input.size(), 0.0);
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (r[i] <= 0.0) continue;
      const double gate = m.empty() ? 1.0 : m[i];
      if (gate == 0.0) continue;
      auto row = params.weight_row(l, i);
      prev_delta[i] = gate * k.dot(row.data(), delta.data(), delta.size());
    }
    delta.swap(prev_delta);
  }
  return loss;
}

BackwardResult backward(const ModelParams& params, std::span<const double> x, std::size_t label,
                        Mode mode, double dropout_rate, Rng& rng) {
  BackwardResult out{Gradients(params.layer_sizes()), 0.0, {}};
  // Re-running forward with a copy of the generator yields the same mask the
  // gradient pass draws, so the reported probabilities match it.
  Rng probe = rng;
  out.probs = forward(params, x, mode, dropout_rate, probe);
  out.loss = accumulate_gradients(params, x, label, mode, dropout_rate, rng, out.gradients);
  return out;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
  if (!grads.same_shape(params) || state.first_moment.size() != params.values().size() ||
      state.second_moment.size() != params.values().size()) {
    throw DimensionError("adam_step: shape mismatch");
  }
  ++state.step;
  const auto coeffs = kernels::AdamCoefficients::at_step(config.learning_rate, config.beta1,
                                                          config.beta2, config.epsilon, state.step);
  kernels::adam_update(params.values(), grads.values(), state.first_moment, state.second_moment,
                       coeffs);
}

ModelParams train(const Dataset& data, const TrainConfig& config, const EpochObserver& observer) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty data set");
  if (data.labels.size() != data.inputs.size()) {
    throw std::invalid_argument("train: inputs and labels differ in length");
  }
  if (data.num_classes < 2) throw std::invalid_argument("train: need at least two classes");
  const std::size_t input_size = data.inputs.front().size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.inputs[i].size() != input_size) {
      throw DimensionError("train: inconsistent input lengths");
    }
    if (data.labels[i] >= data.num_classes) {
      throw std::invalid_argument("train: label out of range");
    }
  }

  std::vector<std::size_t> sizes;
  sizes.push_back(input_size);
  sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  sizes.push_back(data.num_classes);
  ModelParams params = init_params(sizes, config.seed);
  if (config.epochs == 0) return params;

  AdamState state = AdamState::for_params(params);
  Gradients grads(sizes);
  Rng rng(mix_seed(config.seed));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      grads.fill(0.0);
      for (std::size_t s = start; s < stop; ++s) {
        const std::size_t idx = order[s];
        epoch_loss += accumulate_gradients(params, data.inputs[idx], data.labels[idx], Mode::Train,
                                           config.dropout_rate, rng, grads);
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (double& g : grads.values()) g *= inv;
      adam_step(params, grads, state, config);
    }
    if (observer) observer(epoch, epoch_loss / static_cast<double>(data.size()));
  }
  return params;
}

double accuracy(const ModelParams& params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_proba(params, data.inputs[i]).argmax() == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace reviewranker::nn
