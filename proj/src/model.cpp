#include "treelstm/model.hpp"

#include <string>

#include "treelstm/errors.hpp"

namespace treelstm {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Rnn ? "rnn" : "lstm"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "rnn") return ModelKind::Rnn;
  if (name == "lstm") return ModelKind::LstmRnn;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected rnn or lstm)");
}

namespace {

LinkWeights zero_link(std::size_t d, std::size_t d_w) { return {Matrix(d, d_w), Matrix(d, d)}; }

class Multiplier {
 public:
  explicit Multiplier(MultiplyCounter* counter) : counter_(counter) {}

  // out += m * v
  void operator()(const Matrix& m, const Vector& v, Vector& out) const {
    matvec_accumulate(m, v.values(), out.values());
    if (counter_ != nullptr) counter_->multiplies += m.rows() * m.cols();
  }

 private:
  MultiplyCounter* counter_;
};

void check_child(const NodeState& child, std::size_t d, std::size_t d_w_leaf, const char* which) {
  const std::size_t expected = child.is_leaf ? d_w_leaf : d;
  if (child.h.size() != expected) {
    throw DimensionError(std::string(which) + " child output has length " +
                         std::to_string(child.h.size()) + ", expected " + std::to_string(expected));
  }
}

Vector sigmoid_of(const Vector& v) { return apply_activation(ActivationKind::Sigmoid, v); }

// dst += a .* b
void add_product(std::span<double> dst, const Vector& a, const Vector& b) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += a[k] * b[k];
}

}  // namespace

Weights zero_weights(const ModelShape& shape) {
  const std::size_t d = shape.d;
  const std::size_t d_w = shape.d_w;
  const std::size_t classes = shape.classes();
  Weights w;
  if (shape.kind == ModelKind::Rnn) {
    w.composition = RnnParams{zero_link(d, d_w), zero_link(d, d_w), Vector(d)};
  } else {
    LstmParams p;
    p.w_i1 = p.w_i2 = p.w_f1 = p.w_f2 = p.w_c1 = p.w_c2 = p.w_o1 = p.w_o2 = zero_link(d, d_w);
    p.w_ci1 = p.w_ci2 = p.w_cf1 = p.w_cf2 = p.w_co = Matrix(d, d);
    p.b_i = p.b_f = p.b_c = p.b_o = Vector(d);
    w.composition = std::move(p);
  }
  w.softmax = SoftmaxParams{Matrix(classes, d_w), Vector(classes), Matrix(classes, d), Vector(classes)};
  return w;
}

NodeState leaf_state(const Vector& embedding, std::size_t d) {
  NodeState s;
  s.is_leaf = true;
  s.h = embedding;
  s.c = Vector(d);
  return s;
}

NodeState rnn_compose(const NodeState& x, const NodeState& y, const RnnParams& params,
                      ActivationKind g, MultiplyCounter* counter) {
  const std::size_t d = params.b.size();
  check_child(x, d, params.w1.leaf.cols(), "left");
  check_child(y, d, params.w2.leaf.cols(), "right");
  const Multiplier mv(counter);

  NodeState p;
  p.is_leaf = false;
  p.pre = params.b;
  mv(params.w1.for_child(x.is_leaf), x.h, p.pre);
  mv(params.w2.for_child(y.is_leaf), y.h, p.pre);
  p.h = apply_activation(g, p.pre);
  p.c = Vector(d);
  return p;
}

NodeState lstm_compose(const NodeState& x, const NodeState& y, const LstmParams& params,
                       ActivationKind g, MultiplyCounter* counter) {
  const std::size_t d = params.b_i.size();
  check_child(x, d, params.w_i1.leaf.cols(), "left");
  check_child(y, d, params.w_i1.leaf.cols(), "right");
  const Multiplier mv(counter);
  const bool xl = x.is_leaf;
  const bool yl = y.is_leaf;

  // Gate pre-activation with `first` in the *1 role; the pair's second gate
  // is the same call with the children swapped.
  const auto gate = [&](const LinkWeights& w1, const LinkWeights& w2, const Matrix& wc1,
                        const Matrix& wc2, const Vector& b, const NodeState& first,
                        const NodeState& second) {
    Vector a = b;
    mv(w1.for_child(first.is_leaf), first.h, a);
    mv(w2.for_child(second.is_leaf), second.h, a);
    // Leaf memory is zero, so its peephole products are skipped entirely.
    if (!first.is_leaf) mv(wc1, first.c, a);
    if (!second.is_leaf) mv(wc2, second.c, a);
    return a;
  };
  const Vector a_i1 = gate(params.w_i1, params.w_i2, params.w_ci1, params.w_ci2, params.b_i, x, y);
  const Vector a_i2 = gate(params.w_i1, params.w_i2, params.w_ci1, params.w_ci2, params.b_i, y, x);
  const Vector a_f1 = gate(params.w_f1, params.w_f2, params.w_cf1, params.w_cf2, params.b_f, x, y);
  const Vector a_f2 = gate(params.w_f1, params.w_f2, params.w_cf1, params.w_cf2, params.b_f, y, x);

  NodeState p;
  p.is_leaf = false;
  p.i1 = sigmoid_of(a_i1);
  p.i2 = sigmoid_of(a_i2);
  p.f1 = sigmoid_of(a_f1);
  p.f2 = sigmoid_of(a_f2);

  // Input gates scale the candidate terms inside g.
  p.cand_x = Vector(d);
  p.cand_y = Vector(d);
  mv(params.w_c1.for_child(xl), x.h, p.cand_x);
  mv(params.w_c2.for_child(yl), y.h, p.cand_y);
  p.pre = params.b_c;
  add_product(p.pre.values(), p.cand_x, p.i1);
  add_product(p.pre.values(), p.cand_y, p.i2);

  p.c = apply_activation(g, p.pre);
  add_product(p.c.values(), p.f1, x.c);
  add_product(p.c.values(), p.f2, y.c);

  Vector a_o = params.b_o;
  mv(params.w_o1.for_child(xl), x.h, a_o);
  mv(params.w_o2.for_child(yl), y.h, a_o);
  mv(params.w_co, p.c, a_o);
  p.o = sigmoid_of(a_o);
  p.g_c = apply_activation(g, p.c);
  p.h = hadamard(p.o, p.g_c);
  return p;
}

void rnn_compose_backward(const NodeState& x, const NodeState& y, const NodeState& parent,
                          std::span<const double> dh, const RnnParams& params, ActivationKind g,
                          RnnParams& grads, ChildGradients out) {
  const std::size_t d = parent.h.size();
  Vector dz(d);
  for (std::size_t k = 0; k < d; ++k) dz[k] = dh[k] * activation_slope(g, parent.pre[k]);
  add_outer(grads.w1.for_child(x.is_leaf), dz.values(), x.h.values());
  add_outer(grads.w2.for_child(y.is_leaf), dz.values(), y.h.values());
  grads.b += dz;
  matvec_transposed_accumulate(params.w1.for_child(x.is_leaf), dz.values(), out.dh_x);
  matvec_transposed_accumulate(params.w2.for_child(y.is_leaf), dz.values(), out.dh_y);
}

void lstm_compose_backward(const NodeState& x, const NodeState& y, const NodeState& parent,
                           std::span<const double> dh, std::span<const double> dc_in,
                           const LstmParams& params, ActivationKind g, LstmParams& grads,
                           ChildGradients out) {
  const std::size_t d = parent.h.size();
  const bool xl = x.is_leaf;
  const bool yl = y.is_leaf;
  const NodeState& p = parent;

  // Output gate and the parent's own memory.
  Vector da_o(d);
  Vector dc(d);
  for (std::size_t k = 0; k < d; ++k) {
    da_o[k] = dh[k] * p.g_c[k] * p.o[k] * (1.0 - p.o[k]);
    dc[k] = dc_in[k] + dh[k] * p.o[k] * activation_slope(g, p.c[k]);
  }
  matvec_transposed_accumulate(params.w_co, da_o.values(), dc.values());
  add_outer(grads.w_co, da_o.values(), p.c.values());
  add_outer(grads.w_o1.for_child(xl), da_o.values(), x.h.values());
  add_outer(grads.w_o2.for_child(yl), da_o.values(), y.h.values());
  grads.b_o += da_o;
  matvec_transposed_accumulate(params.w_o1.for_child(xl), da_o.values(), out.dh_x);
  matvec_transposed_accumulate(params.w_o2.for_child(yl), da_o.values(), out.dh_y);

  // c = f1*cx + f2*cy + g(pre)
  Vector da_f1(d), da_f2(d), dpre(d);
  for (std::size_t k = 0; k < d; ++k) {
    da_f1[k] = dc[k] * x.c[k] * p.f1[k] * (1.0 - p.f1[k]);
    da_f2[k] = dc[k] * y.c[k] * p.f2[k] * (1.0 - p.f2[k]);
    dpre[k] = dc[k] * activation_slope(g, p.pre[k]);
  }
  if (!xl) add_product(out.dc_x, dc, p.f1);
  if (!yl) add_product(out.dc_y, dc, p.f2);

  // pre = cand_x*i1 + cand_y*i2 + b_c
  Vector da_i1(d), da_i2(d), dcand_x(d), dcand_y(d);
  for (std::size_t k = 0; k < d; ++k) {
    da_i1[k] = dpre[k] * p.cand_x[k] * p.i1[k] * (1.0 - p.i1[k]);
    da_i2[k] = dpre[k] * p.cand_y[k] * p.i2[k] * (1.0 - p.i2[k]);
    dcand_x[k] = dpre[k] * p.i1[k];
    dcand_y[k] = dpre[k] * p.i2[k];
  }
  grads.b_c += dpre;
  add_outer(grads.w_c1.for_child(xl), dcand_x.values(), x.h.values());
  add_outer(grads.w_c2.for_child(yl), dcand_y.values(), y.h.values());
  matvec_transposed_accumulate(params.w_c1.for_child(xl), dcand_x.values(), out.dh_x);
  matvec_transposed_accumulate(params.w_c2.for_child(yl), dcand_y.values(), out.dh_y);

  // The gate pairs share weights with the children swapped:
  //   a1 = W1 x + W2 y + Wc1 cx + Wc2 cy + b
  //   a2 = W1 y + W2 x + Wc1 cy + Wc2 cx + b
  auto gate_pair = [&](const Vector& da1, const Vector& da2, const LinkWeights& w1,
                       const LinkWeights& w2, const Matrix& wc1, const Matrix& wc2,
                       LinkWeights& gw1, LinkWeights& gw2, Matrix& gwc1, Matrix& gwc2,
                       Vector& gb) {
    gb += da1;
    gb += da2;
    add_outer(gw1.for_child(xl), da1.values(), x.h.values());
    add_outer(gw2.for_child(yl), da1.values(), y.h.values());
    add_outer(gw1.for_child(yl), da2.values(), y.h.values());
    add_outer(gw2.for_child(xl), da2.values(), x.h.values());
    matvec_transposed_accumulate(w1.for_child(xl), da1.values(), out.dh_x);
    matvec_transposed_accumulate(w2.for_child(yl), da1.values(), out.dh_y);
    matvec_transposed_accumulate(w1.for_child(yl), da2.values(), out.dh_y);
    matvec_transposed_accumulate(w2.for_child(xl), da2.values(), out.dh_x);
    if (!xl) {
      add_outer(gwc1, da1.values(), x.c.values());
      add_outer(gwc2, da2.values(), x.c.values());
      matvec_transposed_accumulate(wc1, da1.values(), out.dc_x);
      matvec_transposed_accumulate(wc2, da2.values(), out.dc_x);
    }
    if (!yl) {
      add_outer(gwc2, da1.values(), y.c.values());
      add_outer(gwc1, da2.values(), y.c.values());
      matvec_transposed_accumulate(wc2, da1.values(), out.dc_y);
      matvec_transposed_accumulate(wc1, da2.values(), out.dc_y);
    }
  };
  gate_pair(da_i1, da_i2, params.w_i1, params.w_i2, params.w_ci1, params.w_ci2, grads.w_i1,
            grads.w_i2, grads.w_ci1, grads.w_ci2, grads.b_i);
  gate_pair(da_f1, da_f2, params.w_f1, params.w_f2, params.w_cf1, params.w_cf2, grads.w_f1,
            grads.w_f2, grads.w_cf1, grads.w_cf2, grads.b_f);
}

Vector classify(const Vector& h, const SoftmaxParams& softmax_params, bool node_is_leaf) {
  const Matrix& w = node_is_leaf ? softmax_params.w_leaf : softmax_params.w_inner;
  Vector logits = node_is_leaf ? softmax_params.b_leaf : softmax_params.b_inner;
  matvec_accumulate(w, h.values(), logits.values());
  return softmax(logits);
}

ForwardResult forward(const Tree& tree, const ModelParams& params, MultiplyCounter* counter) {
  const auto& nodes = tree.nodes();
  const ModelShape& shape = params.shape;
  const auto& table = params.lexicon.table.vectors;
  if (table.cols() != shape.d_w) {
    throw DimensionError("embedding dimension " + std::to_string(table.cols()) +
                         " does not match d_w=" + std::to_string(shape.d_w));
  }

  ForwardResult result;
  result.states.resize(nodes.size());
  result.embedding_rows.assign(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& node = nodes[i];
    NodeState& state = result.states[i];
    if (node.is_leaf()) {
      const std::size_t row = params.lexicon.vocab.resolve(node.token);
      result.embedding_rows[i] = row;
      const auto values = table.row(row);
      state = leaf_state(Vector(std::vector<double>(values.begin(), values.end())), shape.d);
    } else {
      const NodeState& x = result.states[static_cast<std::size_t>(node.left)];
      const NodeState& y = result.states[static_cast<std::size_t>(node.right)];
      state = shape.kind == ModelKind::Rnn
                  ? rnn_compose(x, y, params.weights.rnn(), shape.activation, counter)
                  : lstm_compose(x, y, params.weights.lstm(), shape.activation, counter);
    }
    if (node.label) {
      state.class_distribution = classify(state.h, params.weights.softmax, state.is_leaf);
    }
  }
  return result;
}

std::uint64_t count_matvecs(const Tree& tree, ModelKind kind, std::size_t d, std::size_t d_w) {
  const std::uint64_t leaf_link = static_cast<std::uint64_t>(d) * d_w;
  const std::uint64_t inner_link = static_cast<std::uint64_t>(d) * d;
  std::uint64_t total = 0;
  const auto& nodes = tree.nodes();
  for (const TreeNode& node : nodes) {
    if (node.is_leaf()) continue;
    for (int child : {node.left, node.right}) {
      const bool leaf = nodes[static_cast<std::size_t>(child)].is_leaf();
      if (kind == ModelKind::Rnn) {
        total += leaf ? leaf_link : inner_link;
      } else {
        total += leaf ? 6 * leaf_link : 10 * inner_link;
      }
    }
    if (kind == ModelKind::LstmRnn) total += inner_link;  // W_co * c_p
  }
  return total;
}

}  // namespace treelstm
