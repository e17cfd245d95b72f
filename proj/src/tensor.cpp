#include "tenring/tensor.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tenring {

namespace {

// Strides of the i1-fastest layout, indexed by 1-based mode.
std::array<std::size_t, 4> strides_of(const Dims3& d) { return {0, 1, d.n1, d.n1 * d.n2}; }

// The two non-k modes in column order (fastest first).
std::pair<int, int> column_modes(int k, bool reversed) {
  switch (k) {
    case 1: return {2, 3};
    case 2: return reversed ? std::pair{3, 1} : std::pair{1, 3};
    default: return {1, 2};
  }
}

Matrix unfold_impl(const Tensor3& t, int k, bool reversed) {
  check_mode(k);
  const Dims3& d = t.dims();
  const auto [fast, slow] = column_modes(k, reversed);
  const auto stride = strides_of(d);
  const std::size_t nk = d[k], nf = d[fast], ns = d[slow];
  Matrix m(nk, nf * ns);
  const auto vals = t.values();
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t i = 0; i < nk; ++i)
        m(i, f + nf * s) = vals[i * stride[k] + f * stride[fast] + s * stride[slow]];
  return m;
}

Tensor3 fold_impl(const Matrix& m, Dims3 dims, int k, bool reversed) {
  check_mode(k);
  const auto [fast, slow] = column_modes(k, reversed);
  const std::size_t nk = dims[k], nf = dims[fast], ns = dims[slow];
  if (static_cast<std::size_t>(m.rows()) != nk || static_cast<std::size_t>(m.cols()) != nf * ns)
    fail(ErrorCode::dimension_mismatch, "fold: matrix shape inconsistent with dims and mode");
  const auto stride = strides_of(dims);
  std::vector<double> out(dims.volume());
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t i = 0; i < nk; ++i)
        out[i * stride[k] + f * stride[fast] + s * stride[slow]] = m(i, f + nf * s);
  return Tensor3(dims, std::move(out));
}

// Applies x_i <- x_{i+shift} - x_i along mode k (shift = +1), or the adjoint
// x_i <- x_{i-1} - x_i (shift = -1).
Tensor3 circulant_difference(const Tensor3& t, int k, int shift) {
  check_mode(k);
  const Dims3& d = t.dims();
  const std::size_t n = d[k];
  Tensor3 out(d);
  if (n <= 1) return out;
  const auto stride = strides_of(d);
  const std::size_t sk = stride[k];
  const auto src = t.values();
  auto dst = out.values();
  for (std::size_t idx = 0; idx < src.size(); ++idx) {
    const std::size_t ik = (idx / sk) % n;
    const std::size_t jk = shift > 0 ? (ik + 1) % n : (ik + n - 1) % n;
    const std::size_t other = idx - ik * sk + jk * sk;
    dst[idx] = src[other] - src[idx];
  }
  return out;
}

}  // namespace

void check_mode(int k) {
  if (k < 1 || k > 3) fail(ErrorCode::invalid_argument, "mode index must be 1, 2 or 3, got " + std::to_string(k));
}

Tensor3::Tensor3(Dims3 dims) : dims_(dims), values_(dims.volume(), 0.0) {}

Tensor3::Tensor3(Dims3 dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.volume())
    fail(ErrorCode::dimension_mismatch, "tensor value count does not match dims");
  if (!all_finite()) fail(ErrorCode::non_finite, "tensor contains NaN or Inf");
}

Tensor3 Tensor3::constant(Dims3 dims, double value) {
  return Tensor3(dims, std::vector<double>(dims.volume(), value));
}

bool Tensor3::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) { return add_scaled(other, 1.0); }
Tensor3& Tensor3::operator-=(const Tensor3& other) { return add_scaled(other, -1.0); }

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Tensor3& Tensor3::add_scaled(const Tensor3& other, double s) {
  if (other.dims_ != dims_) fail(ErrorCode::dimension_mismatch, "tensor dims differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

DiffMatrix::DiffMatrix(std::size_t n) : n_(n) {
  if (n == 0) fail(ErrorCode::invalid_argument, "difference matrix size must be positive");
}

Matrix DiffMatrix::dense() const {
  Matrix d = Matrix::Zero(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    d(i, i) -= 1.0;
    d(i, (i + 1) % n_) += 1.0;
  }
  return d;
}

std::pair<Vector, Matrix> DiffMatrix::gram_eigen() const {
  const std::size_t n = n_;
  const double two_pi = 2.0 * std::numbers::pi;
  Vector lambda(n);
  Matrix basis(n, n);
  std::size_t col = 0;
  auto set_eig = [&](std::size_t j) { lambda(col) = 2.0 - 2.0 * std::cos(two_pi * double(j) / double(n)); };
  // DC mode.
  set_eig(0);
  basis.col(col++).setConstant(1.0 / std::sqrt(double(n)));
  for (std::size_t j = 1; 2 * j < n; ++j) {
    const double s = std::sqrt(2.0 / double(n));
    set_eig(j);
    for (std::size_t i = 0; i < n; ++i) basis(i, col) = s * std::cos(two_pi * double(j * i) / double(n));
    ++col;
    set_eig(j);
    for (std::size_t i = 0; i < n; ++i) basis(i, col) = s * std::sin(two_pi * double(j * i) / double(n));
    ++col;
  }
  if (n % 2 == 0 && n > 1) {
    lambda(col) = 4.0;
    for (std::size_t i = 0; i < n; ++i) basis(i, col) = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(n));
    ++col;
  }
  return {lambda, basis};
}

Matrix mode_unfold(const Tensor3& t, int k) { return unfold_impl(t, k, false); }
Matrix reversed_mode_unfold(const Tensor3& t, int k) { return unfold_impl(t, k, true); }
Tensor3 fold(const Matrix& m, Dims3 dims, int k) { return fold_impl(m, dims, k, false); }
Tensor3 reversed_fold(const Matrix& m, Dims3 dims, int k) { return fold_impl(m, dims, k, true); }

Tensor3 mode_product(const Tensor3& t, const Matrix& m, int k) {
  check_mode(k);
  if (static_cast<std::size_t>(m.cols()) != t.dims()[k])
    fail(ErrorCode::dimension_mismatch, "mode product: matrix columns must equal n_k");
  Dims3 out = t.dims();
  const std::size_t rows = static_cast<std::size_t>(m.rows());
  if (k == 1) out.n1 = rows;
  else if (k == 2) out.n2 = rows;
  else out.n3 = rows;
  if (rows == 0) fail(ErrorCode::dimension_mismatch, "mode product: matrix has no rows");
  return fold(m * mode_unfold(t, k), out, k);
}

Tensor3 gradient(const Tensor3& t, int k) { return circulant_difference(t, k, +1); }
Tensor3 gradient_adjoint(const Tensor3& t, int k) { return circulant_difference(t, k, -1); }

Norms norms(const Tensor3& t) {
  Norms n;
  double sq = 0.0;
  for (double v : t.values()) {
    const double a = std::abs(v);
    n.l1 += a;
    sq += v * v;
    if (a > n.linf) n.linf = a;
  }
  n.frobenius = std::sqrt(sq);
  const Dims3& d = t.dims();
  for (std::size_t i2 = 0; i2 < d.n2; ++i2)
    for (std::size_t i1 = 0; i1 < d.n1; ++i1) {
      double tube = 0.0;
      for (std::size_t i3 = 0; i3 < d.n3; ++i3) tube += t(i1, i2, i3) * t(i1, i2, i3);
      n.lf1 += std::sqrt(tube);
    }
  return n;
}

double frobenius_norm(const Tensor3& t) {
  double sq = 0.0;
  for (double v : t.values()) sq += v * v;
  return std::sqrt(sq);
}

double inner_product(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) fail(ErrorCode::dimension_mismatch, "inner product: dims differ");
  double s = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

Matrix tube_norms(const Tensor3& t) {
  const Dims3& d = t.dims();
  Matrix out(d.n1, d.n2);
  for (std::size_t i2 = 0; i2 < d.n2; ++i2)
    for (std::size_t i1 = 0; i1 < d.n1; ++i1) {
      double s = 0.0;
      for (std::size_t i3 = 0; i3 < d.n3; ++i3) s += t(i1, i2, i3) * t(i1, i2, i3);
      out(i1, i2) = std::sqrt(s);
    }
  return out;
}

}  // namespace tenring
