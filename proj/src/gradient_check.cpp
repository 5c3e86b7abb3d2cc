#include "treelstm/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "treelstm/errors.hpp"

namespace treelstm {

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw DimensionError("relative_error: tensors of different sizes");
  }
  double diff = 0.0, a = 0.0, n = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
    a += analytic[k] * analytic[k];
    n += numeric[k] * numeric[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(a), std::sqrt(n), 1e-8});
}

namespace {

Tree build_random(std::size_t leaves, std::span<const std::string> tokens, TaskKind task,
                  bool is_root, std::mt19937_64& rng) {
  const int classes = static_cast<int>(num_classes(task));
  std::uniform_int_distribution<int> label_dist(0, classes - 1);
  std::optional<int> label = label_dist(rng);
  if (task == TaskKind::Binary && !is_root && std::bernoulli_distribution(0.3)(rng)) {
    label.reset();
  }
  if (leaves == 1) {
    std::uniform_int_distribution<std::size_t> token_dist(0, tokens.size() - 1);
    return Tree::leaf(label, tokens[token_dist(rng)]);
  }
  std::uniform_int_distribution<std::size_t> split_dist(1, leaves - 1);
  const std::size_t left = split_dist(rng);
  Tree l = build_random(left, tokens, task, false, rng);
  Tree r = build_random(leaves - left, tokens, task, false, rng);
  return Tree::join(label, l, r);
}

}  // namespace

Tree random_tree(std::size_t leaves, std::span<const std::string> tokens, TaskKind task,
                 std::mt19937_64& rng) {
  if (leaves == 0 || tokens.empty()) throw ConfigError("random_tree: need leaves and tokens");
  return build_random(leaves, tokens, task, true, rng);
}

ModelParams random_model(const ModelShape& shape, std::span<const std::string> tokens,
                         std::uint64_t seed) {
  TrainConfig config;
  config.d = shape.d;
  config.activation = shape.activation;
  config.task = shape.task;
  config.model_kind = shape.kind;
  config.seed = seed;
  config.embeddings_trainable = true;
  Lexicon lex;
  lex.vocab = Vocabulary(std::vector<std::string>(tokens.begin(), tokens.end()));
  lex.table.vectors = Matrix(lex.vocab.size(), shape.d_w);
  ModelParams params = init_params(config, shape.d_w, std::move(lex));

  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (double& v : params.lexicon.table.vectors.values()) v = dist(rng);
  for_each_tensor(params.weights, [&](std::string_view name, std::span<double> values) {
    const bool bias = name.starts_with("b") || name.starts_with("softmax_b");
    if (!bias) return;
    for (double& v : values) v = dist(rng);
  });
  return params;
}

std::vector<std::string> GradCheckReport::failing_tensors() const {
  std::vector<std::string> out;
  for (const auto& [name, err] : worst_by_tensor) {
    if (!(err < threshold)) out.push_back(name);
  }
  return out;
}

GradCheckReport run_gradient_check(const GradCheckOptions& options) {
  if (options.min_leaves == 0 || options.max_leaves < options.min_leaves) {
    throw ConfigError("gradient check: invalid leaf range");
  }
  const std::vector<std::string> tokens{"w0", "w1", "w2", "w3", "w4", "w5"};
  GradCheckReport report;
  report.threshold = options.threshold;

  for (TaskKind task : options.tasks) {
    for (ModelKind kind : options.kinds) {
      for (ActivationKind activation : options.activations) {
        for (std::uint64_t seed : options.seeds) {
          for (double lambda : options.lambdas) {
            const ModelShape shape{kind, activation, task, options.d, options.d_w};
            const ModelParams params = random_model(shape, tokens, seed);
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<std::size_t> leaf_dist(options.min_leaves,
                                                                 options.max_leaves);
            std::vector<Tree> batch;
            std::size_t leaves = 0;
            for (std::size_t t = 0; t < std::max<std::size_t>(options.trees_per_case, 1); ++t) {
              const std::size_t n = leaf_dist(rng);
              leaves += n;
              batch.push_back(random_tree(n, tokens, task, rng));
            }

            LossAndGradient analytic = backward(batch, params, lambda);
            const GradientSet numeric =
                finite_difference_gradient(batch, params, lambda, options.step);

            GradCheckCase result{kind, activation, task, seed, lambda, leaves, {}, 0.0};
            std::vector<std::string> names;
            std::vector<std::span<double>> a_spans;
            std::vector<std::span<const double>> n_spans;
            for_each_tensor(analytic.gradients.weights,
                            [&](std::string_view name, std::span<double> values) {
                              names.emplace_back(name);
                              a_spans.push_back(values);
                            });
            for_each_tensor(numeric.weights, [&](std::string_view, std::span<const double> v) {
              n_spans.push_back(v);
            });

            // Embedding rows, flattened in row order.
            std::vector<double> a_emb, n_emb;
            for (const auto& [row, grad] : numeric.embedding_rows) {
              n_emb.insert(n_emb.end(), grad.begin(), grad.end());
              auto it = analytic.gradients.embedding_rows.find(row);
              if (it == analytic.gradients.embedding_rows.end()) {
                a_emb.insert(a_emb.end(), grad.size(), 0.0);
              } else {
                a_emb.insert(a_emb.end(), it->second.begin(), it->second.end());
              }
            }
            names.emplace_back("embeddings");
            a_spans.push_back(a_emb);
            n_spans.push_back(n_emb);

            for (std::size_t t = 0; t < names.size(); ++t) {
              if (options.fault_tensor && *options.fault_tensor == names[t]) {
                for (double& v : a_spans[t]) v = 1.1 * v + 1e-3;
              }
              const double err = relative_error(a_spans[t], n_spans[t]);
              result.tensors.push_back({names[t], err});
              result.worst = std::max(result.worst, err);
              auto& worst = report.worst_by_tensor[names[t]];
              worst = std::max(worst, err);
            }
            report.worst = std::max(report.worst, result.worst);
            report.cases.push_back(std::move(result));
          }
        }
      }
    }
  }
  return report;
}

}  // namespace treelstm
