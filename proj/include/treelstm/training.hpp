#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "treelstm/embeddings.hpp"
#include "treelstm/model.hpp"
#include "treelstm/tensor.hpp"
#include "treelstm/treebank.hpp"

namespace treelstm {

struct TrainConfig {
  std::size_t d = 50;
  ActivationKind activation = ActivationKind::Tanh;
  double learning_rate = 0.05;
  double lambda = 1e-3;
  std::size_t batch_size = 5;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  TaskKind task = TaskKind::FineGrained;
  ModelKind model_kind = ModelKind::LstmRnn;
  bool embeddings_trainable = true;

  // Throws ConfigError on out-of-range values.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

// dJ/dtheta. Embedding gradients are sparse: only rows used by the batch.
struct GradientSet {
  Weights weights;
  std::map<std::size_t, Vector> embedding_rows;
};

GradientSet zero_gradients(const ModelParams& params);

// Negative log likelihood over every labeled node, averaged over sentences,
// plus (lambda/2)|theta|^2. The penalty covers every dense tensor and, when
// the embeddings are trainable, the embedding rows the batch uses.
double objective(std::span<const Tree> batch, const ModelParams& params, double lambda);

struct LossAndGradient {
  double loss = 0.0;
  GradientSet gradients;
};

// Exact gradient of objective() by backpropagation through structure.
LossAndGradient backward(std::span<const Tree> batch, const ModelParams& params, double lambda);

// Central differences of `f` with respect to each entry of `theta`, which f
// must read through. Entries are restored afterwards.
std::vector<double> central_difference(std::span<double> theta, const std::function<double()>& f,
                                       double h);

// Central-difference gradient of objective() for every dense parameter and
// every embedding row the batch uses. O(|theta|) objective evaluations.
GradientSet finite_difference_gradient(std::span<const Tree> batch, const ModelParams& params,
                                       double lambda, double h);

struct AdaGradState {
  Weights accumulators;
  Matrix embedding_accumulators;
  double epsilon = 1e-8;

  static AdaGradState for_params(const ModelParams& params);
};

// accumulator += g^2; theta -= lr * g / (sqrt(accumulator) + epsilon).
void adagrad_step(ModelParams& params, const GradientSet& grads, AdaGradState& state, double lr);

// Weight matrices uniform in [-1/sqrt(n), 1/sqrt(n)] with n the matrix's
// column count; biases zero. The lexicon is adopted as is, with its
// trainable flag taken from the config.
ModelParams init_params(const TrainConfig& config, std::size_t d_w, Lexicon lexicon);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  ModelParams best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_dev_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch AdaGrad training with per-epoch dev-set model selection (root
// accuracy; ties keep the earliest epoch).
TrainResult train(const TrainConfig& config, const Dataset& dataset, Lexicon lexicon,
                  const EpochCallback& on_epoch = {});

}  // namespace treelstm
