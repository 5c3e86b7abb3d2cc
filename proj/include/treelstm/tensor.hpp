#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treelstm {

// Dense column vector of doubles.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double scale);

  void fill(double value);

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator*(Vector lhs, double scale);

// Elementwise (Hadamard) product.
Vector hadamard(const Vector& a, const Vector& b);
double dot(const Vector& a, const Vector& b);

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// m · v
Vector matvec(const Matrix& m, const Vector& v);
// out += m · v
void matvec_accumulate(const Matrix& m, std::span<const double> v, std::span<double> out);
// out += mᵀ · v
void matvec_transposed_accumulate(const Matrix& m, std::span<const double> v, std::span<double> out);
// m += a · bᵀ
void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b);

enum class ActivationKind { Sigmoid, Tanh, Softsign };

std::string_view to_string(ActivationKind kind);
// Accepts "sigmoid", "tanh", "softsign"; throws ConfigError otherwise.
ActivationKind parse_activation(std::string_view name);

double activate(ActivationKind kind, double x);
double activation_slope(ActivationKind kind, double x);

Vector apply_activation(ActivationKind kind, const Vector& v);
// Elementwise derivative evaluated at the pre-activation values.
Vector activation_derivative(ActivationKind kind, const Vector& pre_activation);

inline double sigmoid(double x) { return activate(ActivationKind::Sigmoid, x); }

// Max-subtracted softmax.
Vector softmax(const Vector& logits);

// Index of the largest entry; ties resolve to the smallest index.
std::size_t argmax(std::span<const double> v);

bool all_finite(std::span<const double> v);

}  // namespace treelstm
