#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "treelstm/model.hpp"
#include "treelstm/training.hpp"

namespace treelstm {

// |a - n| / max(|a|, |n|, 1e-8) computed on the tensor's Euclidean norms.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

// Random binary tree over `leaves` tokens drawn from `tokens`; every node is
// labeled for the fine-grained task. For the binary task some inner nodes are
// left unlabeled, mirroring removed neutral phrases.
Tree random_tree(std::size_t leaves, std::span<const std::string> tokens, TaskKind task,
                 std::mt19937_64& rng);

// Small random model: weights per init_params, biases and embeddings drawn
// uniformly from [-0.5, 0.5] so every term is exercised.
ModelParams random_model(const ModelShape& shape, std::span<const std::string> tokens,
                         std::uint64_t seed);

struct GradCheckOptions {
  std::vector<ModelKind> kinds{ModelKind::Rnn, ModelKind::LstmRnn};
  std::vector<ActivationKind> activations{ActivationKind::Sigmoid, ActivationKind::Tanh,
                                          ActivationKind::Softsign};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> lambdas{0.0, 1e-3};
  std::vector<TaskKind> tasks{TaskKind::FineGrained};
  std::size_t d = 4;
  std::size_t d_w = 3;
  std::size_t min_leaves = 3;
  std::size_t max_leaves = 6;
  std::size_t trees_per_case = 1;
  double step = 1e-5;
  double threshold = 1e-4;
  // Test hook: corrupts the analytic gradient of this tensor before comparison.
  std::optional<std::string> fault_tensor;
};

struct TensorCheck {
  std::string tensor;
  double relative_error = 0.0;
};

struct GradCheckCase {
  ModelKind kind = ModelKind::LstmRnn;
  ActivationKind activation = ActivationKind::Tanh;
  TaskKind task = TaskKind::FineGrained;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::size_t leaves = 0;
  std::vector<TensorCheck> tensors;
  double worst = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  std::map<std::string, double> worst_by_tensor;
  double worst = 0.0;
  double threshold = 0.0;

  bool passed() const { return worst < threshold; }
  std::vector<std::string> failing_tensors() const;
};

GradCheckReport run_gradient_check(const GradCheckOptions& options);

}  // namespace treelstm
