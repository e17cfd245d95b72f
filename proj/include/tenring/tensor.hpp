#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tenring/error.hpp"

namespace tenring {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Extents of an order-3 tensor. Mode numbers in the public API are 1-based
/// (k = 1, 2, 3) to match the usual tensor notation.
struct Dims3 {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  std::size_t operator[](int k) const { return k == 1 ? n1 : (k == 2 ? n2 : n3); }
  std::size_t volume() const { return n1 * n2 * n3; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/// Dense real order-3 tensor, linear layout with i1 fastest, then i2, then i3.
class Tensor3 {
 public:
  Tensor3() = default;
  /// Zero-filled tensor.
  explicit Tensor3(Dims3 dims);
  /// Takes ownership of `values`; rejects wrong lengths and non-finite entries.
  Tensor3(Dims3 dims, std::vector<double> values);

  static Tensor3 constant(Dims3 dims, double value);

  const Dims3& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::size_t index(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return i1 + dims_.n1 * (i2 + dims_.n2 * i3);
  }
  double& operator()(std::size_t i1, std::size_t i2, std::size_t i3) { return values_[index(i1, i2, i3)]; }
  double operator()(std::size_t i1, std::size_t i2, std::size_t i3) const { return values_[index(i1, i2, i3)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// True when every entry is finite.
  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);
  /// this += s * other
  Tensor3& add_scaled(const Tensor3& other, double s);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims3 dims_{};
  std::vector<double> values_;
};

/// Row-circulant first-difference matrix with first row (-1, 1, 0, ..., 0):
/// (D x)_i = x_{i+1 mod n} - x_i.
class DiffMatrix {
 public:
  explicit DiffMatrix(std::size_t n);
  std::size_t size() const { return n_; }
  Matrix dense() const;
  /// Eigenvalues of D^T D (2 - 2 cos(2 pi j / n)) paired with a real
  /// orthonormal eigenbasis (columns), built from the discrete Fourier modes.
  std::pair<Vector, Matrix> gram_eigen() const;

 private:
  std::size_t n_;
};

Matrix mode_unfold(const Tensor3& t, int k);
/// Columns cycle through modes k+1, ..., 3, 1, ..., k-1 with the earliest
/// listed mode fastest.
Matrix reversed_mode_unfold(const Tensor3& t, int k);
Tensor3 fold(const Matrix& m, Dims3 dims, int k);
Tensor3 reversed_fold(const Matrix& m, Dims3 dims, int k);

/// t x_k m, i.e. unfold_k(result) = m * unfold_k(t).
Tensor3 mode_product(const Tensor3& t, const Matrix& m, int k);

/// Circulant gradient along mode k: t x_k D_{n_k}.
Tensor3 gradient(const Tensor3& t, int k);
/// Adjoint of `gradient`: t x_k D_{n_k}^T.
Tensor3 gradient_adjoint(const Tensor3& t, int k);

struct Norms {
  double frobenius = 0.0;
  double l1 = 0.0;
  double linf = 0.0;
  /// Sum over (i1, i2) of the Frobenius norm of the mode-3 tube.
  double lf1 = 0.0;
};

Norms norms(const Tensor3& t);
double frobenius_norm(const Tensor3& t);
double inner_product(const Tensor3& a, const Tensor3& b);

/// Per-tube Frobenius norms as an n1 x n2 matrix.
Matrix tube_norms(const Tensor3& t);

void check_mode(int k);

}  // namespace tenring
