#include "treelstm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treelstm/errors.hpp"

namespace treelstm {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": vector length " + std::to_string(a) +
                         " does not match " + std::to_string(b));
  }
}

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
  require_same_length(size(), other.size(), "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_length(size(), other.size(), "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double scale) {
  for (auto& x : data_) x *= scale;
  return *this;
}

void Vector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
Vector operator*(Vector lhs, double scale) { return lhs *= scale; }

Vector hadamard(const Vector& a, const Vector& b) {
  require_same_length(a.size(), b.size(), "hadamard");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double dot(const Vector& a, const Vector& b) {
  require_same_length(a.size(), b.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Vector matvec(const Matrix& m, const Vector& v) {
  Vector out(m.rows());
  matvec_accumulate(m, v.values(), out.values());
  return out;
}

void matvec_accumulate(const Matrix& m, std::span<const double> v, std::span<double> out) {
  if (m.cols() != v.size() || m.rows() != out.size()) {
    throw DimensionError("matvec: matrix " + shape_string(m) + " against vector of length " +
                         std::to_string(v.size()) + " into length " + std::to_string(out.size()));
  }
  const double* a = m.values().data();
  const std::size_t cols = m.cols();
  const double* x = v.data();
  // Four partial sums, combined in a fixed order.
  for (std::size_t r = 0; r < m.rows(); ++r, a += cols) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      s0 += a[c] * x[c];
      s1 += a[c + 1] * x[c + 1];
      s2 += a[c + 2] * x[c + 2];
      s3 += a[c + 3] * x[c + 3];
    }
    for (; c < cols; ++c) s0 += a[c] * x[c];
    out[r] += (s0 + s1) + (s2 + s3);
  }
}

void matvec_transposed_accumulate(const Matrix& m, std::span<const double> v,
                                  std::span<double> out) {
  if (m.rows() != v.size() || m.cols() != out.size()) {
    throw DimensionError("matvec_transposed: matrix " + shape_string(m) +
                         " against vector of length " + std::to_string(v.size()) +
                         " into length " + std::to_string(out.size()));
  }
  const double* a = m.values().data();
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < m.rows(); ++r, a += cols) {
    const double scale = v[r];
    if (scale == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += a[c] * scale;
  }
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b) {
  if (m.rows() != a.size() || m.cols() != b.size()) {
    throw DimensionError("add_outer: matrix " + shape_string(m) + " against " +
                         std::to_string(a.size()) + "x" + std::to_string(b.size()));
  }
  double* out = m.values().data();
  const std::size_t cols = m.cols();
  for (std::size_t r = 0; r < m.rows(); ++r, out += cols) {
    const double scale = a[r];
    if (scale == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += scale * b[c];
  }
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return "sigmoid";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Softsign:
      return "softsign";
  }
  return "unknown";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "softsign") return ActivationKind::Softsign;
  throw ConfigError("unknown activation '" + std::string(name) +
                    "' (expected sigmoid, tanh or softsign)");
}

double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Softsign:
      return x / (1.0 + std::abs(x));
  }
  return x;
}

double activation_slope(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Softsign: {
      const double denom = 1.0 + std::abs(x);
      return 1.0 / (denom * denom);
    }
  }
  return 1.0;
}

Vector apply_activation(ActivationKind kind, const Vector& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = activate(kind, v[i]);
  return out;
}

Vector activation_derivative(ActivationKind kind, const Vector& pre_activation) {
  Vector out(pre_activation.size());
  for (std::size_t i = 0; i < pre_activation.size(); ++i) {
    out[i] = activation_slope(kind, pre_activation[i]);
  }
  return out;
}

Vector softmax(const Vector& logits) {
  Vector out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace treelstm
