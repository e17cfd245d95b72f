#pragma once

#include <random>

#include "tenring/metrics.hpp"
#include "tenring/penalty.hpp"
#include "tenring/tensor.hpp"
#include "tenring/tensor_ring.hpp"
#include "tenring/transform.hpp"

namespace tenring::testing {

Tensor3 random_tensor(Dims3 d, std::mt19937_64& rng, double scale = 1.0);
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
double max_abs_diff(const Tensor3& a, const Tensor3& b);
double relative_error(const Tensor3& got, const Tensor3& want);

/// Every penalty kind with representative parameters.
std::vector<PenaltySpec> all_penalties();

/// Dense grid over [0, |v|] (spacing `grid_width`), each local minimum refined by
/// trisection down to 1e-10 and a slope bisection, plus the branch endpoints;
/// sign of v restored.
double brute_force_prox(const PenaltySpec& psi, double mu, double v, double grid_width = 1e-4);

/// Entry-by-entry trace of G1(:,i1,:) G2(:,i2,:) G3(:,i3,:).
Tensor3 trace_contract(const TRCores& cores);

/// Solves A X + X B = C by forming the Kronecker system (I kron A + B^T kron I).
Matrix kron_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Explicit per-face singular value soft thresholding: transform with the
/// dense U, shrink each face by tau with a full SVD, transform back with U^H / rho.
Tensor3 face_svt_oracle(const Tensor3& a, TransformKind kind, double tau);

/// Orthonormal DCT-II matrix written out from its cosine formula.
Matrix dct_matrix(std::size_t n);

/// PD/PF at `tau` by direct counting over every pixel.
std::pair<double, double> count_rates(const Matrix& scores, const GroundTruthMask& mask, double tau);

/// Trapezoid area under (pf, pd) after sorting by pf (ties by pd).
double trapezoid_pd_pf(const RocCurve& curve);

}  // namespace tenring::testing
