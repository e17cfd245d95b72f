#include "tenring/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tenring {

namespace {

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 100;

struct Candidates {
  std::array<double, 8> x{};
  int n = 0;
  void push(double v) {
    if (n < static_cast<int>(x.size())) x[n++] = v;
  }
};

// Largest root of x - a + m p x^{p-1} = 0 on (0, a], or -1 when none exists.
double lp_stationary_point(double m, double p, double a) {
  if (a <= 0.0) return -1.0;
  const double x_min = std::pow(m * p * (1.0 - p), 1.0 / (2.0 - p));
  if (x_min >= a) return -1.0;
  auto g = [&](double x) { return x - a + m * p * std::pow(x, p - 1.0); };
  if (g(x_min) > 0.0) return -1.0;
  // g is convex and increasing on [x_min, a]; Newton from the right is monotone.
  double x = a;
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    const double gp = 1.0 + m * p * (p - 1.0) * std::pow(x, p - 2.0);
    const double step = g(x) / gp;
    const double next = std::max(x - step, x_min);
    if (std::abs(next - x) <= kNewtonTol * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

PenaltySpec::PenaltySpec(PenaltyKind kind, double p, double theta, double eta, double cap)
    : kind_(kind), p_(p), theta_(theta), eta_(eta), cap_(cap) {
  const bool uses_p = kind == PenaltyKind::lp || kind == PenaltyKind::capped_lp;
  const bool uses_theta = kind == PenaltyKind::log || kind == PenaltyKind::capped_log;
  const bool uses_eta = kind == PenaltyKind::mcp || kind == PenaltyKind::capped_mcp;
  if (uses_p && !(p > 0.0 && p < 1.0)) fail(ErrorCode::invalid_argument, "penalty: p must lie in (0, 1)");
  if (uses_theta && !(theta > 0.0 && std::isfinite(theta)))
    fail(ErrorCode::invalid_argument, "penalty: theta must be positive");
  if (uses_eta && !(eta > 0.0 && std::isfinite(eta))) fail(ErrorCode::invalid_argument, "penalty: eta must be positive");
  if (is_capped() && !(cap > 0.0 && std::isfinite(cap))) fail(ErrorCode::invalid_argument, "penalty: cap must be positive");
  if (kind == PenaltyKind::capped_mcp && !(cap < eta))
    fail(ErrorCode::invalid_argument, "penalty: capped MCP requires cap < eta");
}

PenaltySpec PenaltySpec::l1() { return {PenaltyKind::l1, 0.5, 1.0, 1.0, 1.0}; }
PenaltySpec PenaltySpec::lp(double p) { return {PenaltyKind::lp, p, 1.0, 1.0, 1.0}; }
PenaltySpec PenaltySpec::log(double theta) { return {PenaltyKind::log, 0.5, theta, 1.0, 1.0}; }
PenaltySpec PenaltySpec::mcp(double eta) { return {PenaltyKind::mcp, 0.5, 1.0, eta, 1.0}; }
PenaltySpec PenaltySpec::capped_l1(double cap) { return {PenaltyKind::capped_l1, 0.5, 1.0, 1.0, cap}; }
PenaltySpec PenaltySpec::capped_lp(double p, double cap) { return {PenaltyKind::capped_lp, p, 1.0, 1.0, cap}; }
PenaltySpec PenaltySpec::capped_log(double theta, double cap) { return {PenaltyKind::capped_log, 0.5, theta, 1.0, cap}; }
PenaltySpec PenaltySpec::capped_mcp(double eta, double cap) { return {PenaltyKind::capped_mcp, 0.5, 1.0, eta, cap}; }

PenaltySpec PenaltySpec::make(PenaltyKind kind, double p, double theta, double eta, double cap) {
  return {kind, p, theta, eta, cap};
}

bool PenaltySpec::is_capped() const {
  return kind_ == PenaltyKind::capped_l1 || kind_ == PenaltyKind::capped_lp || kind_ == PenaltyKind::capped_log ||
         kind_ == PenaltyKind::capped_mcp;
}

double PenaltySpec::base_eval(double x) const {
  x = std::abs(x);
  switch (kind_) {
    case PenaltyKind::l1:
    case PenaltyKind::capped_l1: return x;
    case PenaltyKind::lp:
    case PenaltyKind::capped_lp: return std::pow(x, p_);
    case PenaltyKind::log:
    case PenaltyKind::capped_log: return std::log1p(x / theta_);
    case PenaltyKind::mcp:
    case PenaltyKind::capped_mcp: return x <= eta_ ? x - x * x / (2.0 * eta_) : 0.5 * eta_;
  }
  return x;
}

double PenaltySpec::cap_scale() const {
  switch (kind_) {
    case PenaltyKind::capped_l1: return 1.0 / cap_;
    case PenaltyKind::capped_lp: return 1.0 / std::pow(cap_, p_);
    case PenaltyKind::capped_log: return 1.0 / std::log1p(cap_ / theta_);
    case PenaltyKind::capped_mcp: return 2.0 * eta_ / (cap_ * (2.0 * eta_ - cap_));
    default: return 1.0;
  }
}

double PenaltySpec::eval(double x) const {
  if (!is_capped()) return base_eval(x);
  return std::min(1.0, cap_scale() * base_eval(x));
}

double PenaltySpec::prox(double mu, double v) const {
  if (mu < 0.0) fail(ErrorCode::invalid_argument, "prox: mu must be nonnegative");
  if (mu == 0.0 || v == 0.0) return v;
  const double a = std::abs(v);
  // Effective weight on the (uncapped) base penalty.
  const double m = mu * cap_scale();

  Candidates c;
  c.push(0.0);
  c.push(a);
  switch (kind_) {
    case PenaltyKind::l1:
    case PenaltyKind::capped_l1: c.push(std::max(a - m, 0.0)); break;
    case PenaltyKind::lp:
    case PenaltyKind::capped_lp: {
      const double r = lp_stationary_point(m, p_, a);
      if (r >= 0.0) c.push(r);
      break;
    }
    case PenaltyKind::log:
    case PenaltyKind::capped_log: {
      // Stationarity x - a + m / (theta + x) = 0 is a quadratic in x.
      const double disc = (a + theta_) * (a + theta_) - 4.0 * m;
      if (disc >= 0.0) c.push(0.5 * ((a - theta_) + std::sqrt(disc)));
      break;
    }
    case PenaltyKind::mcp:
    case PenaltyKind::capped_mcp:
      c.push(eta_);
      if (m < eta_) c.push(std::clamp((a - m) / (1.0 - m / eta_), 0.0, eta_));
      break;
  }
  if (is_capped()) {
    // Beyond the cap psi is flat and a itself minimises that branch; the
    // base stationary points only count inside the uncapped branch.
    for (int i = 2; i < c.n; ++i) c.x[i] = std::min(c.x[i], cap_);
    c.push(cap_);
  }
  // The minimiser never exceeds |v| for a nondecreasing penalty.
  for (int i = 0; i < c.n; ++i) c.x[i] = std::clamp(c.x[i], 0.0, a);

  std::sort(c.x.begin(), c.x.begin() + c.n);
  double best = c.x[0];
  double best_obj = prox_objective(mu, a, best);
  for (int i = 1; i < c.n; ++i) {
    const double obj = prox_objective(mu, a, c.x[i]);
    if (obj < best_obj) {
      best_obj = obj;
      best = c.x[i];
    }
  }
  return v < 0.0 ? -best : best;
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::l1: return "l1";
    case PenaltyKind::lp: return "lp";
    case PenaltyKind::log: return "log";
    case PenaltyKind::mcp: return "mcp";
    case PenaltyKind::capped_l1: return "capped-l1";
    case PenaltyKind::capped_lp: return "capped-lp";
    case PenaltyKind::capped_log: return "capped-log";
    case PenaltyKind::capped_mcp: return "capped-mcp";
  }
  return "l1";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  for (auto k : {PenaltyKind::l1, PenaltyKind::lp, PenaltyKind::log, PenaltyKind::mcp, PenaltyKind::capped_l1,
                 PenaltyKind::capped_lp, PenaltyKind::capped_log, PenaltyKind::capped_mcp})
    if (to_string(k) == name) return k;
  fail(ErrorCode::invalid_argument, "unknown penalty '" + std::string(name) + "'");
}

Tensor3 threshold_tensor(const Tensor3& a, const PenaltySpec& psi, double lambda, ThresholdMode mode) {
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "threshold: lambda must be nonnegative");
  Tensor3 out(a.dims());
  if (mode == ThresholdMode::entrywise) {
    const auto src = a.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = psi.prox(lambda, src[i]);
    return out;
  }
  const Dims3& d = a.dims();
  for (std::size_t i2 = 0; i2 < d.n2; ++i2)
    for (std::size_t i1 = 0; i1 < d.n1; ++i1) {
      double sq = 0.0;
      for (std::size_t i3 = 0; i3 < d.n3; ++i3) sq += a(i1, i2, i3) * a(i1, i2, i3);
      const double norm = std::sqrt(sq);
      if (norm == 0.0) continue;
      const double scale = psi.prox(lambda, norm) / norm;
      for (std::size_t i3 = 0; i3 < d.n3; ++i3) out(i1, i2, i3) = scale * a(i1, i2, i3);
    }
  return out;
}

double entrywise_penalty(const Tensor3& a, const PenaltySpec& psi) {
  double s = 0.0;
  for (double v : a.values()) s += psi.eval(v);
  return s;
}

double tubewise_penalty(const Tensor3& a, const PenaltySpec& psi) {
  const Matrix norms = tube_norms(a);
  double s = 0.0;
  for (Eigen::Index j = 0; j < norms.cols(); ++j)
    for (Eigen::Index i = 0; i < norms.rows(); ++i) s += psi.eval(norms(i, j));
  return s;
}

}  // namespace tenring
