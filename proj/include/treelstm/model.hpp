#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "treelstm/embeddings.hpp"
#include "treelstm/tensor.hpp"
#include "treelstm/treebank.hpp"

namespace treelstm {

enum class ModelKind { Rnn, LstmRnn };

std::string_view to_string(ModelKind kind);
// Accepts "rnn" or "lstm".
ModelKind parse_model_kind(std::string_view name);

// Untied weight pair: leaf children use a d x d_w matrix, inner children a
// d x d matrix.
struct LinkWeights {
  Matrix leaf;
  Matrix inner;

  const Matrix& for_child(bool child_is_leaf) const { return child_is_leaf ? leaf : inner; }
  Matrix& for_child(bool child_is_leaf) { return child_is_leaf ? leaf : inner; }

  bool operator==(const LinkWeights&) const = default;
};

struct RnnParams {
  LinkWeights w1;  // left child
  LinkWeights w2;  // right child
  Vector b;

  bool operator==(const RnnParams&) const = default;
};

// Tree LSTM with one input gate and one forget gate per child. The *1/*2
// matrices are shared between the two gates of a pair with the children
// swapped, so i2(x, y) == i1(y, x).
struct LstmParams {
  LinkWeights w_i1, w_i2;
  LinkWeights w_f1, w_f2;
  LinkWeights w_c1, w_c2;
  LinkWeights w_o1, w_o2;
  Matrix w_ci1, w_ci2;  // memory peepholes, d x d
  Matrix w_cf1, w_cf2;
  Matrix w_co;
  Vector b_i, b_f, b_c, b_o;

  bool operator==(const LstmParams&) const = default;
};

struct SoftmaxParams {
  Matrix w_leaf;  // |C| x d_w
  Vector b_leaf;
  Matrix w_inner;  // |C| x d
  Vector b_inner;

  bool operator==(const SoftmaxParams&) const = default;
};

struct ModelShape {
  ModelKind kind = ModelKind::LstmRnn;
  ActivationKind activation = ActivationKind::Tanh;
  TaskKind task = TaskKind::FineGrained;
  std::size_t d = 50;
  std::size_t d_w = 100;

  std::size_t classes() const { return num_classes(task); }

  bool operator==(const ModelShape&) const = default;
};

// Every dense tensor of the parameter set (everything but the embedding
// table). Also used as the gradient buffer.
struct Weights {
  std::variant<RnnParams, LstmParams> composition;
  SoftmaxParams softmax;

  const RnnParams& rnn() const { return std::get<RnnParams>(composition); }
  RnnParams& rnn() { return std::get<RnnParams>(composition); }
  const LstmParams& lstm() const { return std::get<LstmParams>(composition); }
  LstmParams& lstm() { return std::get<LstmParams>(composition); }

  bool operator==(const Weights&) const = default;
};

// All-zero tensors with the shapes implied by `shape`.
Weights zero_weights(const ModelShape& shape);

namespace detail {

template <class LinkT, class F>
void visit_link(LinkT& link, std::string_view leaf_name, std::string_view inner_name, F& f) {
  f(leaf_name, link.leaf.values());
  f(inner_name, link.inner.values());
}

}  // namespace detail

// Calls f(name, span) for every tensor in a fixed canonical order. The order
// is part of the model file format.
template <class WeightsT, class F>
void for_each_tensor(WeightsT& w, F&& f) {
  using detail::visit_link;
  if (w.composition.index() == 0) {
    auto& p = std::get<0>(w.composition);
    visit_link(p.w1, "W1_leaf", "W1_inner", f);
    visit_link(p.w2, "W2_leaf", "W2_inner", f);
    f("b", p.b.values());
  } else {
    auto& p = std::get<1>(w.composition);
    visit_link(p.w_i1, "W_i1_leaf", "W_i1_inner", f);
    visit_link(p.w_i2, "W_i2_leaf", "W_i2_inner", f);
    visit_link(p.w_f1, "W_f1_leaf", "W_f1_inner", f);
    visit_link(p.w_f2, "W_f2_leaf", "W_f2_inner", f);
    visit_link(p.w_c1, "W_c1_leaf", "W_c1_inner", f);
    visit_link(p.w_c2, "W_c2_leaf", "W_c2_inner", f);
    visit_link(p.w_o1, "W_o1_leaf", "W_o1_inner", f);
    visit_link(p.w_o2, "W_o2_leaf", "W_o2_inner", f);
    f("W_ci1", p.w_ci1.values());
    f("W_ci2", p.w_ci2.values());
    f("W_cf1", p.w_cf1.values());
    f("W_cf2", p.w_cf2.values());
    f("W_co", p.w_co.values());
    f("b_i", p.b_i.values());
    f("b_f", p.b_f.values());
    f("b_c", p.b_c.values());
    f("b_o", p.b_o.values());
  }
  f("softmax_W_leaf", w.softmax.w_leaf.values());
  f("softmax_b_leaf", w.softmax.b_leaf.values());
  f("softmax_W_inner", w.softmax.w_inner.values());
  f("softmax_b_inner", w.softmax.b_inner.values());
}

// The complete parameter set: dense weights plus the word embeddings.
struct ModelParams {
  ModelShape shape;
  Weights weights;
  Lexicon lexicon;

  bool operator==(const ModelParams&) const = default;
};

// Per-node forward cache.
struct NodeState {
  bool is_leaf = true;
  Vector h;  // d_w at leaves, d at inner nodes
  Vector c;  // d; exactly zero at leaves

  // Inner nodes only. `pre` is the RNN pre-activation or the LSTM candidate
  // argument W_c1 x * i1 + W_c2 y * i2 + b_c.
  Vector pre;
  Vector i1, i2, f1, f2, o;
  Vector cand_x, cand_y;  // W_c1 x and W_c2 y before input gating
  Vector g_c;             // g(c)

  Vector class_distribution;  // empty when the node is unlabeled
};

// Counts scalar multiplications performed by composition matvecs.
struct MultiplyCounter {
  std::uint64_t multiplies = 0;
};

NodeState leaf_state(const Vector& embedding, std::size_t d);

NodeState rnn_compose(const NodeState& x, const NodeState& y, const RnnParams& params,
                      ActivationKind g, MultiplyCounter* counter = nullptr);

NodeState lstm_compose(const NodeState& x, const NodeState& y, const LstmParams& params,
                       ActivationKind g, MultiplyCounter* counter = nullptr);

// Gradients flowing out of one composition step, accumulated into the child
// buffers. Child memory buffers may be empty for leaf children.
struct ChildGradients {
  std::span<double> dh_x;
  std::span<double> dc_x;
  std::span<double> dh_y;
  std::span<double> dc_y;
};

void rnn_compose_backward(const NodeState& x, const NodeState& y, const NodeState& parent,
                          std::span<const double> dh, const RnnParams& params, ActivationKind g,
                          RnnParams& grads, ChildGradients out);

void lstm_compose_backward(const NodeState& x, const NodeState& y, const NodeState& parent,
                           std::span<const double> dh, std::span<const double> dc,
                           const LstmParams& params, ActivationKind g, LstmParams& grads,
                           ChildGradients out);

Vector classify(const Vector& h, const SoftmaxParams& softmax, bool node_is_leaf);

struct ForwardResult {
  std::vector<NodeState> states;           // aligned with tree.nodes()
  std::vector<std::size_t> embedding_rows;  // vocabulary row per node; leaves only
};

ForwardResult forward(const Tree& tree, const ModelParams& params,
                      MultiplyCounter* counter = nullptr);

// Scalar multiplications in the composition matvecs of one forward pass.
// Memory products against leaf children are skipped, so an N-leaf tree costs
// N*d*d_w + (N-2)*d*d (RNN) or N*6*d*d_w + (N-2)*10*d*d + (N-1)*d*d (LSTM).
std::uint64_t count_matvecs(const Tree& tree, ModelKind kind, std::size_t d, std::size_t d_w);

}  // namespace treelstm
