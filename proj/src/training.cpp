#include "treelstm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "treelstm/errors.hpp"
#include "treelstm/evaluation.hpp"

namespace treelstm {

void TrainConfig::validate() const {
  if (d == 0) throw ConfigError("d must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a positive number");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a non-negative number");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

GradientSet zero_gradients(const ModelParams& params) {
  return GradientSet{zero_weights(params.shape), {}};
}

namespace {

double squared_norm(const Weights& w) {
  double total = 0.0;
  for_each_tensor(w, [&](std::string_view, std::span<const double> values) {
    for (double v : values) total += v * v;
  });
  return total;
}

std::set<std::size_t> batch_rows(std::span<const Tree> batch, const Vocabulary& vocab) {
  std::set<std::size_t> rows;
  for (const Tree& tree : batch) {
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) rows.insert(vocab.resolve(node.token));
    }
  }
  return rows;
}

double embedding_penalty(std::span<const Tree> batch, const ModelParams& params) {
  if (!params.lexicon.table.trainable) return 0.0;
  double total = 0.0;
  for (std::size_t row : batch_rows(batch, params.lexicon.vocab)) {
    for (double v : params.lexicon.table.vectors.row(row)) total += v * v;
  }
  return total;
}

double tree_nll(const Tree& tree, const ForwardResult& fwd) {
  double nll = 0.0;
  const auto& nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].label) continue;
    nll -= std::log(fwd.states[i].class_distribution[static_cast<std::size_t>(*nodes[i].label)]);
  }
  return nll;
}

// Adds one sentence's loss gradient (scaled by `scale`) into grads and
// returns its unscaled negative log likelihood.
double backprop_tree(const Tree& tree, const ModelParams& params, double scale,
                     GradientSet& grads) {
  const ForwardResult fwd = forward(tree, params);
  const auto& nodes = tree.nodes();
  const auto& states = fwd.states;
  const ModelShape& shape = params.shape;
  const SoftmaxParams& sm = params.weights.softmax;
  SoftmaxParams& gsm = grads.weights.softmax;

  std::vector<Vector> dh(nodes.size());
  std::vector<Vector> dc(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    dh[i] = Vector(states[i].h.size());
    if (!nodes[i].is_leaf()) dc[i] = Vector(shape.d);
  }

  for (std::size_t i = nodes.size(); i-- > 0;) {
    const TreeNode& node = nodes[i];
    const NodeState& state = states[i];
    if (node.label) {
      Vector dlogits = state.class_distribution;
      dlogits[static_cast<std::size_t>(*node.label)] -= 1.0;
      dlogits *= scale;
      if (state.is_leaf) {
        add_outer(gsm.w_leaf, dlogits.values(), state.h.values());
        gsm.b_leaf += dlogits;
        matvec_transposed_accumulate(sm.w_leaf, dlogits.values(), dh[i].values());
      } else {
        add_outer(gsm.w_inner, dlogits.values(), state.h.values());
        gsm.b_inner += dlogits;
        matvec_transposed_accumulate(sm.w_inner, dlogits.values(), dh[i].values());
      }
    }

    if (node.is_leaf()) {
      if (params.lexicon.table.trainable) {
        auto [it, inserted] = grads.embedding_rows.try_emplace(fwd.embedding_rows[i], shape.d_w);
        it->second += dh[i];
      }
      continue;
    }

    const auto left = static_cast<std::size_t>(node.left);
    const auto right = static_cast<std::size_t>(node.right);
    ChildGradients out{dh[left].values(), dc[left].values(), dh[right].values(),
                       dc[right].values()};
    if (shape.kind == ModelKind::Rnn) {
      rnn_compose_backward(states[left], states[right], state, dh[i].values(),
                           params.weights.rnn(), shape.activation, grads.weights.rnn(), out);
    } else {
      lstm_compose_backward(states[left], states[right], state, dh[i].values(), dc[i].values(),
                            params.weights.lstm(), shape.activation, grads.weights.lstm(), out);
    }
  }
  return tree_nll(tree, fwd);
}

// Visits every weight matrix (never biases) in canonical order.
template <class F>
void for_each_matrix(Weights& w, F&& f) {
  auto link = [&](LinkWeights& l) {
    f(l.leaf);
    f(l.inner);
  };
  if (auto* rnn = std::get_if<RnnParams>(&w.composition)) {
    link(rnn->w1);
    link(rnn->w2);
  } else {
    auto& p = std::get<LstmParams>(w.composition);
    for (LinkWeights* l : {&p.w_i1, &p.w_i2, &p.w_f1, &p.w_f2, &p.w_c1, &p.w_c2, &p.w_o1, &p.w_o2}) {
      link(*l);
    }
    for (Matrix* m : {&p.w_ci1, &p.w_ci2, &p.w_cf1, &p.w_cf2, &p.w_co}) f(*m);
  }
  f(w.softmax.w_leaf);
  f(w.softmax.w_inner);
}

std::vector<std::span<double>> tensor_spans(Weights& w) {
  std::vector<std::span<double>> spans;
  for_each_tensor(w, [&](std::string_view, std::span<double> values) { spans.push_back(values); });
  return spans;
}

std::vector<std::span<const double>> tensor_spans(const Weights& w) {
  std::vector<std::span<const double>> spans;
  for_each_tensor(w, [&](std::string_view, std::span<const double> values) {
    spans.push_back(values);
  });
  return spans;
}

}  // namespace

double objective(std::span<const Tree> batch, const ModelParams& params, double lambda) {
  if (batch.empty()) throw ConfigError("objective: empty batch");
  double nll = 0.0;
  for (const Tree& tree : batch) nll += tree_nll(tree, forward(tree, params));
  const double penalty = squared_norm(params.weights) + embedding_penalty(batch, params);
  return nll / static_cast<double>(batch.size()) + 0.5 * lambda * penalty;
}

LossAndGradient backward(std::span<const Tree> batch, const ModelParams& params, double lambda) {
  if (batch.empty()) throw ConfigError("backward: empty batch");
  LossAndGradient result{0.0, zero_gradients(params)};
  GradientSet& grads = result.gradients;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double nll = 0.0;
  for (const Tree& tree : batch) nll += backprop_tree(tree, params, scale, grads);
  const double penalty = squared_norm(params.weights) + embedding_penalty(batch, params);
  result.loss = nll / static_cast<double>(batch.size()) + 0.5 * lambda * penalty;

  if (lambda != 0.0) {
    auto g = tensor_spans(grads.weights);
    auto theta = tensor_spans(params.weights);
    for (std::size_t t = 0; t < g.size(); ++t) {
      for (std::size_t k = 0; k < g[t].size(); ++k) g[t][k] += lambda * theta[t][k];
    }
    if (params.lexicon.table.trainable) {
      for (std::size_t row : batch_rows(batch, params.lexicon.vocab)) {
        auto [it, inserted] = grads.embedding_rows.try_emplace(row, params.shape.d_w);
        const auto values = params.lexicon.table.vectors.row(row);
        for (std::size_t k = 0; k < values.size(); ++k) it->second[k] += lambda * values[k];
      }
    }
  }
  return result;
}

std::vector<double> central_difference(std::span<double> theta, const std::function<double()>& f,
                                       double h) {
  if (!(h > 0.0)) throw ConfigError("finite difference step must be positive");
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + h;
    const double up = f();
    theta[k] = saved - h;
    const double down = f();
    theta[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradientSet finite_difference_gradient(std::span<const Tree> batch, const ModelParams& params,
                                       double lambda, double h) {
  if (!(h > 0.0)) throw ConfigError("finite difference step must be positive");
  ModelParams probe = params;
  GradientSet grads = zero_gradients(params);
  const auto f = [&] { return objective(batch, probe, lambda); };

  auto theta = tensor_spans(probe.weights);
  auto out = tensor_spans(grads.weights);
  for (std::size_t t = 0; t < theta.size(); ++t) {
    const auto g = central_difference(theta[t], f, h);
    std::copy(g.begin(), g.end(), out[t].begin());
  }
  if (params.lexicon.table.trainable) {
    for (std::size_t row : batch_rows(batch, params.lexicon.vocab)) {
      const auto g = central_difference(probe.lexicon.table.vectors.row(row), f, h);
      grads.embedding_rows.emplace(row, Vector(g));
    }
  }
  return grads;
}

AdaGradState AdaGradState::for_params(const ModelParams& params) {
  AdaGradState state;
  state.accumulators = zero_weights(params.shape);
  state.embedding_accumulators =
      Matrix(params.lexicon.table.vectors.rows(), params.lexicon.table.vectors.cols());
  return state;
}

namespace {

void adagrad_update(std::span<double> theta, std::span<const double> grad, std::span<double> accum,
                    double lr, double epsilon) {
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double g = grad[k];
    if (g == 0.0) continue;
    accum[k] += g * g;
    theta[k] -= lr * g / (std::sqrt(accum[k]) + epsilon);
    // Entries driven only by the L2 term shrink geometrically; subnormals stall matvec.
    if (std::fpclassify(theta[k]) == FP_SUBNORMAL) theta[k] = 0.0;
  }
}

}  // namespace

void adagrad_step(ModelParams& params, const GradientSet& grads, AdaGradState& state, double lr) {
  auto theta = tensor_spans(params.weights);
  auto g = tensor_spans(grads.weights);
  auto accum = tensor_spans(state.accumulators);
  if (theta.size() != g.size() || theta.size() != accum.size()) {
    throw DimensionError("adagrad_step: gradient set does not match the parameter set");
  }
  for (std::size_t t = 0; t < theta.size(); ++t) {
    if (theta[t].size() != g[t].size() || theta[t].size() != accum[t].size()) {
      throw DimensionError("adagrad_step: tensor " + std::to_string(t) + " shape mismatch");
    }
    adagrad_update(theta[t], g[t], accum[t], lr, state.epsilon);
  }
  if (!params.lexicon.table.trainable) return;
  auto& table = params.lexicon.table.vectors;
  for (const auto& [row, grad] : grads.embedding_rows) {
    adagrad_update(table.row(row), grad.values(), state.embedding_accumulators.row(row), lr,
                   state.epsilon);
  }
}

ModelParams init_params(const TrainConfig& config, std::size_t d_w, Lexicon lexicon) {
  ModelParams params;
  params.shape = ModelShape{config.model_kind, config.activation, config.task, config.d, d_w};
  params.weights = zero_weights(params.shape);
  params.lexicon = std::move(lexicon);
  params.lexicon.table.trainable = config.embeddings_trainable;
  if (params.lexicon.table.dim() != d_w) {
    throw DimensionError("embedding table has dimension " +
                         std::to_string(params.lexicon.table.dim()) + ", expected " +
                         std::to_string(d_w));
  }
  std::mt19937_64 rng(config.seed);
  for_each_matrix(params.weights, [&](Matrix& m) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : m.values()) v = dist(rng);
  });
  return params;
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, Lexicon lexicon,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.task != config.task) throw ConfigError("dataset task does not match config task");
  const std::size_t d_w = lexicon.table.dim();

  TrainResult result;
  ModelParams params = init_params(config, d_w, std::move(lexicon));
  result.best = params;
  if (config.epochs == 0) return result;

  AdaGradState state = AdaGradState::for_params(params);
  // Separate stream from weight initialization.
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Tree> order = dataset.train;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      const std::span<const Tree> batch(order.data() + first, count);
      LossAndGradient step = backward(batch, params, config.lambda);
      if (!std::isfinite(step.loss)) throw DivergenceError(epoch, batches);
      adagrad_step(params, step.gradients, state, config.learning_rate);
      loss_sum += step.loss;
      ++batches;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    record.dev_accuracy = evaluate(params, dataset.dev).root_accuracy();
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    if (!have_best || record.dev_accuracy > result.best_dev_accuracy) {
      have_best = true;
      result.best = params;
      result.best_epoch = epoch;
      result.best_dev_accuracy = record.dev_accuracy;
    }
    if (on_epoch) on_epoch(record);
  }
  return result;
}

}  // namespace treelstm
