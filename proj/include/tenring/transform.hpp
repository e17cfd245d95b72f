#pragma once

#include <complex>
#include <vector>

#include "tenring/penalty.hpp"
#include "tenring/tensor.hpp"

namespace tenring {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

enum class TransformKind { fft, dct, identity };

std::string to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// Invertible transform along mode 3 with U U^H = rho I.
/// fft is the unnormalised DFT (rho = n3); dct is the orthonormal DCT-II and
/// identity is the identity (rho = 1 for both).
class TransformSpec {
 public:
  TransformSpec(TransformKind kind, std::size_t n3);

  TransformKind kind() const { return kind_; }
  std::size_t n3() const { return n3_; }
  double rho() const { return kind_ == TransformKind::fft ? double(n3_) : 1.0; }
  /// The n3 x n3 transform matrix U.
  const CMatrix& matrix() const { return u_; }

 private:
  TransformKind kind_;
  std::size_t n3_;
  CMatrix u_;
};

/// Transform-domain tensor stored as n3 frontal faces of size n1 x n2.
struct SpectralTensor3 {
  Dims3 dims;
  std::vector<CMatrix> faces;
};

SpectralTensor3 apply_transform(const Tensor3& t, const TransformSpec& spec);
/// Inverse transform; the (roundoff-level) imaginary part is discarded.
Tensor3 inverse_transform(const SpectralTensor3& s, const TransformSpec& spec);

/// C = L^{-1}(L(a) face-wise-times L(b)).
Tensor3 t_product(const Tensor3& a, const Tensor3& b, const TransformSpec& spec);
/// Tensor whose transform-domain faces are all identity matrices.
Tensor3 t_identity(std::size_t n, const TransformSpec& spec);

/// a = U * K * V^T under the transform, kept in the transform domain.
struct TSVDFactors {
  SpectralTensor3 u;  // n1 x m x n3
  SpectralTensor3 k;  // m x m x n3, f-diagonal, real nonnegative nonincreasing
  SpectralTensor3 v;  // n2 x m x n3
};

TSVDFactors tsvd(const Tensor3& a, const TransformSpec& spec);
/// U * K * V^T evaluated face-wise and inverse transformed.
Tensor3 reconstruct(const TSVDFactors& f, const TransformSpec& spec);

/// Transform-domain singular values: column j holds face j, nonincreasing.
Matrix transform_singular_values(const Tensor3& a, const TransformSpec& spec);

/// (1/rho) * sum over faces and singular values of phi(sigma).
double spectral_penalty(const Tensor3& a, const TransformSpec& spec, const PenaltySpec& phi);

/// Generalized nonconvex tensor singular value thresholding: the minimiser of
/// tau * spectral_penalty(X) + |X - a|_F^2 / 2.
Tensor3 gntsvt(const Tensor3& a, const TransformSpec& spec, const PenaltySpec& phi, double tau);

/// (1/|gamma|) * sum_{k in gamma} spectral_penalty(gradient(t, k)).
double gntctv_norm(const Tensor3& t, const std::vector<int>& gamma_set, const TransformSpec& spec,
                   const PenaltySpec& phi);

/// Matrix singular value thresholding with phi (the order-2 counterpart of gntsvt).
Matrix matrix_svt(const Matrix& a, const PenaltySpec& phi, double tau);

}  // namespace tenring
