// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fully connected classifier: ReLU hidden layers, softmax output, inverted
// dropout between consecutive hidden layers, categorical cross-entropy and
// Adam. Everything is 64-bit.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reviewranker/random.hpp"

namespace reviewranker::nn {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Weights and biases of every layer in one contiguous buffer. Layer l maps
/// layer_sizes[l] inputs to layer_sizes[l+1] outputs; its weight matrix is
/// stored row-major as inputs x outputs, followed by its bias vector.
class ModelParams {
 public:
  ModelParams() = default;
  /// All-zero parameters. Throws DimensionError for fewer than two layers or
  /// a zero size.
  explicit ModelParams(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return layer_sizes_; }
  std::size_t num_layers() const noexcept { return offsets_.size(); }
  std::size_t input_size() const { return layer_sizes_.front(); }
  std::size_t output_size() const { return layer_sizes_.back(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  /// Row `input` of layer `layer`'s weight matrix (one weight per output).
  std::span<const double> weight_row(std::size_t layer, std::size_t input) const;
  std::span<double> weight_row(std::size_t layer, std::size_t input);
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ModelParams& other) const noexcept {
    return layer_sizes_ == other.layer_sizes_;
  }
  bool all_finite() const noexcept;
  void fill(double value);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  std::vector<std::size_t> offsets_;  // start of layer l's weights
  std::vector<double> values_;
};

using Gradients = ModelParams;

struct TrainConfig {
  std::vector<std::size_t> hidden_sizes{64, 32};
  double dropout_rate = 0.2;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long long step = 0;

  static AdamState for_params(const ModelParams& params);
};

struct ProbabilityDistribution {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const { return probs.at(i); }
  std::size_t argmax() const noexcept;
};

enum class Mode { Train, Infer };

/// Fan-in scaled uniform (He) initialization, zero biases. Deterministic in
/// `seed`.
ModelParams init_params(std::span<const std::size_t> layer_sizes, std::uint64_t seed);

/// In Train mode a fresh dropout mask is drawn from `rng` for every hidden
/// layer that feeds another hidden layer. Infer mode never touches `rng`.
ProbabilityDistribution forward(const ModelParams& params, std::span<const double> x, Mode mode,
                                double dropout_rate, Rng& rng);

ProbabilityDistribution predict_proba(const ModelParams& params, std::span<const double> x);

/// -log(max(p[label], 1e-12)).
double cross_entropy_loss(const ProbabilityDistribution& probs, std::size_t label);

struct BackwardResult {
  Gradients gradients;
  double loss = 0.0;
  ProbabilityDistribution probs;
};

/// Gradients of cross_entropy_loss(forward(x), label) for one sample. The
/// forward pass runs inside, so the dropout mask it draws is the one
/// differentiated.
BackwardResult backward(const ModelParams& params, std::span<const double> x, std::size_t label,
                        Mode mode, double dropout_rate, Rng& rng);

/// Same as backward() but adds into `grads` (which must match `params`) and
/// returns the loss.
double accumulate_gradients(const ModelParams& params, std::span<const double> x,
                            std::size_t label, Mode mode, double dropout_rate, Rng& rng,
                            Gradients& grads);

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

/// Non-owning view of a training set.
struct Dataset {
  std::vector<std::span<const double>> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return inputs.size(); }
};

/// Called once per epoch with the epoch index (from 0) and mean sample loss.
using EpochObserver = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch Adam for config.epochs epochs, reshuffling every epoch. The
/// network is [input, hidden_sizes..., num_classes]. Throws
/// std::invalid_argument on empty or inconsistent data.
ModelParams train(const Dataset& data, const TrainConfig& config,
                  const EpochObserver& observer = {});

/// Fraction of samples whose argmax prediction equals the label.
double accuracy(const ModelParams& params, const Dataset& data);

/// JSON checkpoint: {"format": "reviewranker.model", "version": 1,
/// "layer_sizes": [...], "values": [...]}, values in storage order. Doubles
/// are written in shortest round-trip form, so load(save(p)) == p.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_string(const ModelParams& params);
ModelParams checkpoint_from_string(const std::string& text);

}  // namespace reviewranker::nn
