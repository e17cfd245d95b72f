#include "tenring/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "tenring/parallel.hpp"

namespace tenring {

std::string to_string(RegularizerMode mode) {
  switch (mode) {
    case RegularizerMode::euntrfr: return "euntrfr";
    case RegularizerMode::untrfr: return "untrfr";
    case RegularizerMode::gntctv_direct: return "gntctv-direct";
    case RegularizerMode::egntctv_direct: return "egntctv-direct";
    case RegularizerMode::gnctv_unfold: return "gnctv-unfold";
  }
  return "?";
}

RegularizerMode parse_regularizer_mode(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return c == '_' ? '-' : char(std::tolower(c)); });
  for (auto m : {RegularizerMode::euntrfr, RegularizerMode::untrfr, RegularizerMode::gntctv_direct,
                 RegularizerMode::egntctv_direct, RegularizerMode::gnctv_unfold})
    if (to_string(m) == s) return m;
  fail(ErrorCode::invalid_argument, "unknown regularizer mode '" + std::string(name) + "'");
}

PenaltySpec default_penalty() { return PenaltySpec::capped_log(1.0, 1.0); }

void SolverConfig::validate() const {
  auto bad = [](const char* what) { fail(ErrorCode::invalid_argument, what); };
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) bad("alpha must be finite and >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) bad("beta must be finite and > 0");
  if (ranks.r1 == 0 || ranks.r2 == 0 || ranks.r3 == 0) bad("TR ranks must be positive");
  if (gamma_set.empty()) bad("gamma set must not be empty");
  std::set<int> seen;
  for (int k : gamma_set) {
    if (k < 1 || k > 3) bad("gamma set entries must be 1, 2 or 3");
    if (!seen.insert(k).second) bad("gamma set entries must be distinct");
  }
  if (!(mu0 > 0.0)) bad("mu0 must be > 0");
  if (!(mu_max >= mu0) || !std::isfinite(mu_max)) bad("mu_max must be finite and >= mu0");
  if (!(growth >= 1.0) || !std::isfinite(growth)) bad("growth must be finite and >= 1");
  if (!(tol > 0.0)) bad("tol must be > 0");
  if (!(residual_tol > 0.0)) bad("residual_tol must be > 0");
  if (max_iter < 1) bad("max_iter must be >= 1");
}

GradientFamily* SolverState::family(int core, int k) {
  for (auto& f : families)
    if (f.core == core && f.k == k) return &f;
  return nullptr;
}

const GradientFamily* SolverState::family(int core, int k) const {
  return const_cast<SolverState*>(this)->family(core, k);
}

SylvesterSolution solve_gradient_sylvester(bool with_gradient, const Matrix& b, const Matrix& c) {
  if (b.rows() != b.cols() || b.rows() != c.cols())
    fail(ErrorCode::dimension_mismatch, "Sylvester: B must be square with C.cols() rows");
  const auto n = std::size_t(c.rows());
  Vector lambda = Vector::Zero(c.rows());
  Matrix p = Matrix::Identity(c.rows(), c.rows());
  if (with_gradient && n > 0) std::tie(lambda, p) = DiffMatrix(n).gram_eigen();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  if (eig.info() != Eigen::Success) fail(ErrorCode::numerical, "Sylvester: eigendecomposition failed");
  Vector omega = eig.eigenvalues().cwiseMax(0.0);
  const Matrix& w = eig.eigenvectors();

  SylvesterSolution out;
  const double scale = std::max(1.0, lambda.size() ? lambda.maxCoeff() : 0.0) + (omega.size() ? omega.maxCoeff() : 0.0);
  const double smallest = (lambda.size() ? lambda.minCoeff() : 0.0) + (omega.size() ? omega.minCoeff() : 0.0);
  if (smallest <= 1e-12 * scale) {
    omega.array() += 1e-12 * scale;
    out.regularized = true;
  }
  Matrix h = p.transpose() * c * w;
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double d = lambda(i) + omega(j);
      h(i, j) = d > 0.0 ? h(i, j) / d : 0.0;
    }
  out.x = p * h * w.transpose();
  return out;
}

Matrix detection_map(const Tensor3& anomaly) { return tube_norms(anomaly); }

AdmmSolver::AdmmSolver(Tensor3 observed, SolverConfig config)
    : observed_(std::move(observed)), config_(std::move(config)) {
  config_.validate();
  if (observed_.empty()) fail(ErrorCode::invalid_argument, "observed tensor is empty");
  if (!observed_.all_finite()) fail(ErrorCode::non_finite, "observed tensor has non-finite entries");
  const Dims3 d = observed_.dims();

  state_.anomaly = Tensor3(d);
  state_.multiplier = Tensor3(d);
  state_.mu = config_.mu0;

  auto add_family = [&](int core, int k, Dims3 fd) {
    state_.families.push_back({core, k, Tensor3(fd), Tensor3(fd), Tensor3(fd)});
  };
  if (uses_cores()) {
    state_.cores = random_init(d, config_.ranks, config_.seed);
    state_.background = tr_contract(state_.cores);
    for (int n = 1; n <= 3; ++n) {
      const Dims3 fd = state_.cores.core(n).dims();
      if (config_.mode == RegularizerMode::gnctv_unfold) {
        add_family(n, 2, fd);
      } else {
        for (int k : config_.gamma_set) add_family(n, k, fd);
      }
    }
  } else {
    state_.background = Tensor3(d);
    for (int k : config_.gamma_set) add_family(0, k, d);
  }
  for (int k = 1; k <= 3; ++k) gram_eigen_.push_back(DiffMatrix(d[k]).gram_eigen());
}

bool AdmmSolver::uses_cores() const {
  return config_.mode != RegularizerMode::gntctv_direct && config_.mode != RegularizerMode::egntctv_direct;
}

bool AdmmSolver::uses_sparse() const {
  return config_.mode == RegularizerMode::euntrfr || config_.mode == RegularizerMode::egntctv_direct;
}

Tensor3 AdmmSolver::family_gradient(int core, int k) const {
  return gradient(core == 0 ? state_.background : state_.cores.core(core), k);
}

TransformSpec AdmmSolver::family_transform(int core) const {
  const std::size_t n3 = core == 0 ? observed_.dims().n3 : state_.cores.core(core).dims().n3;
  return TransformSpec(config_.transform, n3);
}

double AdmmSolver::lowrank_threshold() const {
  if (config_.mode == RegularizerMode::gnctv_unfold) return 1.0 / state_.mu;
  return 1.0 / (double(config_.gamma_set.size()) * state_.mu);
}

bool AdmmSolver::update_cores() {
  if (!uses_cores()) {
    update_free_background();
    return false;
  }
  const double mu = state_.mu;
  const Tensor3 target = observed_ - state_.anomaly + state_.multiplier * (1.0 / mu);
  bool regularized = false;
  // Each core is solved against the latest values of the other two.
  for (int n = 1; n <= 3; ++n) {
    const Tensor3& g = state_.cores.core(n);
    const Matrix r1t = reversed_mode_unfold(subchain(state_.cores, n), 2);
    Matrix c = reversed_mode_unfold(target, n) * r1t;
    const GradientFamily* f = state_.family(n, 2);
    if (f) {
      Tensor3 split = f->low_rank + f->sparse;
      split.add_scaled(f->multiplier, -1.0 / mu);
      c.noalias() += DiffMatrix(g.dims().n2).dense().transpose() * mode_unfold(split, 2);
    }
    const Matrix b = r1t.transpose() * r1t;
    SylvesterSolution sol = solve_gradient_sylvester(f != nullptr, b, c);
    regularized = regularized || sol.regularized;
    state_.cores.set_core(n, fold(sol.x, g.dims(), 2));
  }
  state_.background = tr_contract(state_.cores);
  return regularized;
}

void AdmmSolver::update_free_background() {
  // (I + sum_k grad_k^T grad_k) B = rhs, diagonal in the per-mode DFT bases.
  const double mu = state_.mu;
  Tensor3 rhs = observed_ - state_.anomaly + state_.multiplier * (1.0 / mu);
  for (const auto& f : state_.families) {
    Tensor3 split = f.low_rank + f.sparse;
    split.add_scaled(f.multiplier, -1.0 / mu);
    rhs += gradient_adjoint(split, f.k);
  }
  Tensor3 h = rhs;
  for (int k = 1; k <= 3; ++k) h = mode_product(h, gram_eigen_[std::size_t(k) - 1].second.transpose(), k);
  const Dims3 d = h.dims();
  std::array<bool, 4> active{false, false, false, false};
  for (int k : config_.gamma_set) active[std::size_t(k)] = true;
  for (std::size_t i3 = 0; i3 < d.n3; ++i3)
    for (std::size_t i2 = 0; i2 < d.n2; ++i2)
      for (std::size_t i1 = 0; i1 < d.n1; ++i1) {
        double denom = 1.0;
        if (active[1]) denom += gram_eigen_[0].first(Eigen::Index(i1));
        if (active[2]) denom += gram_eigen_[1].first(Eigen::Index(i2));
        if (active[3]) denom += gram_eigen_[2].first(Eigen::Index(i3));
        h(i1, i2, i3) /= denom;
      }
  for (int k = 1; k <= 3; ++k) h = mode_product(h, gram_eigen_[std::size_t(k) - 1].second, k);
  state_.background = std::move(h);
}

void AdmmSolver::update_sparse_parts() {
  if (!uses_sparse()) return;
  const double mu = state_.mu;
  parallel_for(state_.families.size(), [&](std::size_t i) {
    GradientFamily& f = state_.families[i];
    Tensor3 t = family_gradient(f.core, f.k) - f.low_rank;
    t.add_scaled(f.multiplier, 1.0 / mu);
    f.sparse = threshold_tensor(t, config_.psi, config_.alpha / mu, ThresholdMode::entrywise);
  });
}

void AdmmSolver::update_lowrank_parts() {
  const double mu = state_.mu;
  const double tau = lowrank_threshold();
  parallel_for(state_.families.size(), [&](std::size_t i) {
    GradientFamily& f = state_.families[i];
    Tensor3 t = family_gradient(f.core, f.k) - f.sparse;
    t.add_scaled(f.multiplier, 1.0 / mu);
    if (config_.mode == RegularizerMode::gnctv_unfold) {
      f.low_rank = fold(matrix_svt(mode_unfold(t, 2), config_.phi, tau), t.dims(), 2);
    } else {
      f.low_rank = gntsvt(t, family_transform(f.core), config_.phi, tau);
    }
  });
}

void AdmmSolver::update_anomaly() {
  Tensor3 t = observed_ - state_.background;
  t.add_scaled(state_.multiplier, 1.0 / state_.mu);
  state_.anomaly = threshold_tensor(t, config_.psi, config_.beta / state_.mu, ThresholdMode::tubewise);
}

void AdmmSolver::update_multipliers() {
  const double mu = state_.mu;
  state_.multiplier.add_scaled(observed_ - state_.background - state_.anomaly, mu);
  parallel_for(state_.families.size(), [&](std::size_t i) {
    GradientFamily& f = state_.families[i];
    f.multiplier.add_scaled(family_gradient(f.core, f.k) - f.low_rank - f.sparse, mu);
  });
  state_.mu = std::min(config_.mu_max, config_.growth * mu);
}

double AdmmSolver::gradient_residual() const {
  double worst = 0.0;
  for (const auto& f : state_.families)
    worst = std::max(worst, frobenius_norm(family_gradient(f.core, f.k) - f.low_rank - f.sparse));
  return worst;
}

IterationRecord AdmmSolver::step() {
  const Tensor3 previous = state_.background;
  IterationRecord rec;
  rec.mu = state_.mu;
  rec.regularized = update_cores();
  update_sparse_parts();
  update_lowrank_parts();
  update_anomaly();
  update_multipliers();
  ++state_.iteration;
  rec.iteration = state_.iteration;

  const double diff = frobenius_norm(state_.background - previous);
  const double base = frobenius_norm(previous);
  rec.error = base < 1e-30 ? diff : diff / base;
  rec.fidelity_residual = frobenius_norm(observed_ - state_.background - state_.anomaly);
  rec.gradient_residual = gradient_residual();
  return rec;
}

SolveOutput AdmmSolver::run(const ProgressCallback& progress) {
  SolveOutput out;
  const double m_norm = frobenius_norm(observed_);
  for (int it = 0; it < config_.max_iter; ++it) {
    IterationRecord rec;
    try {
      rec = step();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::numerical && e.code() != ErrorCode::non_finite) throw;
      throw SolverAborted(std::string(e.what()) + " at iteration " + std::to_string(state_.iteration + 1),
                          std::move(out.trace));
    }
    out.trace.push_back(rec);
    if (progress) progress(rec);
    const bool finite = std::isfinite(rec.error) && std::isfinite(rec.fidelity_residual) &&
                        std::isfinite(rec.gradient_residual) && state_.background.all_finite() &&
                        state_.anomaly.all_finite();
    if (!finite)
      throw SolverAborted("non-finite iterate at iteration " + std::to_string(rec.iteration), std::move(out.trace));
    const double slack = config_.residual_tol * m_norm;
    if (rec.error <= config_.tol && rec.fidelity_residual <= slack && rec.gradient_residual <= slack) {
      out.converged = true;
      break;
    }
  }
  out.background = state_.background;
  out.anomaly = state_.anomaly;
  out.detection_map = detection_map(state_.anomaly);
  return out;
}

SolveOutput solve(const Tensor3& observed, const SolverConfig& config, const ProgressCallback& progress) {
  AdmmSolver solver(observed, config);
  return solver.run(progress);
}

}  // namespace tenring
