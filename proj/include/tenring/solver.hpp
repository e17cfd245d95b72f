#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tenring/penalty.hpp"
#include "tenring/tensor.hpp"
#include "tenring/tensor_ring.hpp"
#include "tenring/transform.hpp"

namespace tenring {

/// Which background regularizer the solver runs.
///   euntrfr        low-rank + sparse split of the gradients of every TR core
///   untrfr         spectral penalty on the TR-core gradients, no sparse part
///   gntctv_direct  spectral penalty on the gradients of a free background
///   egntctv_direct gntctv_direct plus a sparse part
///   gnctv_unfold   matrix singular values of the mode-2 unfolded core gradients
enum class RegularizerMode { euntrfr, untrfr, gntctv_direct, egntctv_direct, gnctv_unfold };

std::string to_string(RegularizerMode mode);
RegularizerMode parse_regularizer_mode(std::string_view name);

/// Default penalty for both the background and the anomaly terms.
PenaltySpec default_penalty();

struct SolverConfig {
  double alpha = 1e-3;
  double beta = 5e-3;
  TRRanks ranks{6, 16, 6};
  PenaltySpec phi = default_penalty();
  PenaltySpec psi = default_penalty();
  TransformKind transform = TransformKind::fft;
  std::vector<int> gamma_set{1, 2, 3};
  double mu0 = 1e-3;
  double mu_max = 1e10;
  double growth = 1.1;
  double tol = 1e-5;
  /// Stopping also requires both primal residuals <= residual_tol * |M|_F.
  double residual_tol = 1e-3;
  int max_iter = 500;
  std::uint64_t seed = 0;
  RegularizerMode mode = RegularizerMode::euntrfr;

  /// Throws Error(invalid_argument) on any violated constraint.
  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// One constrained gradient split grad_k(X) = L + S with multiplier Q, where
/// X is TR core `core` (1..3) or, for the direct modes, the background (core 0).
struct GradientFamily {
  int core = 0;
  int k = 1;
  Tensor3 low_rank;
  Tensor3 sparse;
  Tensor3 multiplier;
};

struct SolverState {
  TRCores cores;
  Tensor3 background;
  Tensor3 anomaly;
  Tensor3 multiplier;  // Y
  std::vector<GradientFamily> families;
  double mu = 0.0;
  int iteration = 0;

  GradientFamily* family(int core, int k);
  const GradientFamily* family(int core, int k) const;
};

struct IterationRecord {
  int iteration = 0;
  /// |B_new - B_old|_F / |B_old|_F (absolute difference when |B_old| ~ 0).
  double error = 0.0;
  /// |M - B - E|_F
  double fidelity_residual = 0.0;
  /// max over families of |grad_k(X) - L - S|_F
  double gradient_residual = 0.0;
  /// Penalty parameter used during this iteration.
  double mu = 0.0;
  /// True when a core solve needed the ridge shift to stay nonsingular.
  bool regularized = false;
};

struct SolveOutput {
  Tensor3 background;
  Tensor3 anomaly;
  Matrix detection_map;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

/// Thrown when an iterate turns non-finite; carries the trace up to that point.
class SolverAborted : public Error {
 public:
  SolverAborted(const std::string& what, std::vector<IterationRecord> trace)
      : Error(ErrorCode::solver_aborted, what), trace_(std::move(trace)) {}
  const std::vector<IterationRecord>& trace() const { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

using ProgressCallback = std::function<void(const IterationRecord&)>;

struct SylvesterSolution {
  Matrix x;
  bool regularized = false;
};

/// Solves A X + X B = C with A = D^T D for the circulant difference matrix of
/// size C.rows() (or A = 0 when `with_gradient` is false) and B symmetric PSD,
/// in the joint eigenbasis of A and B. If the smallest eigenvalue sum is below
/// 1e-12 times the largest, B is shifted by that amount times I.
SylvesterSolution solve_gradient_sylvester(bool with_gradient, const Matrix& b, const Matrix& c);

/// T(i1, i2) = |E(i1, i2, :)|_F
Matrix detection_map(const Tensor3& anomaly);

/// ADMM driver exposing each update module so tests can step through it.
class AdmmSolver {
 public:
  AdmmSolver(Tensor3 observed, SolverConfig config);

  const SolverConfig& config() const { return config_; }
  const Tensor3& observed() const { return observed_; }
  const SolverState& state() const { return state_; }
  SolverState& mutable_state() { return state_; }

  /// Core (or free background) update; returns true when the Sylvester
  /// system had to be regularized.
  bool update_cores();
  void update_sparse_parts();
  void update_lowrank_parts();
  void update_anomaly();
  void update_multipliers();

  /// One full iteration in the fixed module order; recomputes the background.
  IterationRecord step();
  SolveOutput run(const ProgressCallback& progress = {});

  /// grad_k of core `core` (or of the background for core 0) at the current state.
  Tensor3 family_gradient(int core, int k) const;
  /// Transform spec used for the spectral penalty of a family.
  TransformSpec family_transform(int core) const;
  /// tau = 1 / (gamma mu) for the tensor modes, 1 / mu for gnctv_unfold.
  double lowrank_threshold() const;

 private:
  bool uses_cores() const;
  bool uses_sparse() const;
  void update_free_background();
  double gradient_residual() const;

  Tensor3 observed_;
  SolverConfig config_;
  SolverState state_;
  std::vector<Matrix> observed_unfold_;  // M_<n>
  std::vector<std::pair<Vector, Matrix>> gram_eigen_;  // D^T D per mode length
};

SolveOutput solve(const Tensor3& observed, const SolverConfig& config, const ProgressCallback& progress = {});

}  // namespace tenring
