#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

namespace tenring::testing {

Tensor3 random_tensor(Dims3 d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(d.volume());
  for (double& x : v) x = normal(rng);
  return Tensor3(d, std::move(v));
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (!(a.dims() == b.dims())) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

double relative_error(const Tensor3& got, const Tensor3& want) {
  const double base = frobenius_norm(want);
  const double diff = frobenius_norm(got - want);
  return base > 0.0 ? diff / base : diff;
}

std::vector<PenaltySpec> all_penalties() {
  return {PenaltySpec::l1(),          PenaltySpec::lp(0.5),          PenaltySpec::log(0.5),
          PenaltySpec::mcp(2.0),      PenaltySpec::capped_l1(1.5),   PenaltySpec::capped_lp(0.5, 1.5),
          PenaltySpec::capped_log(0.1, 1.0), PenaltySpec::capped_mcp(3.0, 1.5)};
}

double brute_force_prox(const PenaltySpec& psi, double mu, double v, double grid_width) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  auto f = [&](double x) { return psi.prox_objective(mu, a, x); };

  const auto n = std::size_t(std::ceil(a / grid_width));
  std::vector<double> xs(n + 1), fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    xs[i] = std::min(a, double(i) * grid_width);
    fs[i] = f(xs[i]);
  }
  double best_x = 0.0, best_f = f(0.0);
  auto consider = [&](double x) {
    if (x < 0.0 || x > a) return;
    const double fx = f(x);
    if (fx < best_f || (fx == best_f && x < best_x)) {
      best_f = fx;
      best_x = x;
    }
  };
  for (double e : {a, psi.cap(), psi.eta()}) consider(e);
  for (std::size_t i = 0; i <= n; ++i) {
    const bool left_ok = i == 0 || fs[i] <= fs[i - 1];
    const bool right_ok = i == n || fs[i] <= fs[i + 1];
    if (!(left_ok && right_ok)) continue;
    double lo = i == 0 ? 0.0 : xs[i - 1];
    double hi = i == n ? a : xs[i + 1];
    while (hi - lo > 1e-10) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (f(m1) <= f(m2)) hi = m2;
      else lo = m1;
    }
    consider(xs[i]);
    const double mid = 0.5 * (lo + hi);
    // Objective values cannot resolve the minimiser much below 1e-8, so polish
    // by bisecting the sign change of a central-difference slope.
    auto slope = [&](double x) {
      const double h = std::min(1e-5, 0.5 * x);
      if (h <= 0.0) return -std::numeric_limits<double>::infinity();
      return mu * (psi.eval(x + h) - psi.eval(x - h)) / (2.0 * h) + x - a;
    };
    double l = std::max(0.0, lo - 1e-6), r = std::min(a, hi + 1e-6);
    double polished = mid;
    if (slope(l) < 0.0 && slope(r) > 0.0) {
      for (int it = 0; it < 100 && r - l > 1e-14; ++it) {
        const double m = 0.5 * (l + r);
        (slope(m) < 0.0 ? l : r) = m;
      }
      polished = 0.5 * (l + r);
    }
    consider(f(polished) <= f(mid) + 1e-12 ? polished : mid);
  }
  return std::copysign(best_x, v);
}

Tensor3 trace_contract(const TRCores& cores) {
  const Dims3 d = cores.dims();
  Tensor3 out(d);
  auto slice = [](const Tensor3& g, std::size_t i) {
    Matrix s(g.dims().n1, g.dims().n3);
    for (std::size_t a = 0; a < g.dims().n1; ++a)
      for (std::size_t b = 0; b < g.dims().n3; ++b) s(Eigen::Index(a), Eigen::Index(b)) = g(a, i, b);
    return s;
  };
  for (std::size_t i3 = 0; i3 < d.n3; ++i3)
    for (std::size_t i2 = 0; i2 < d.n2; ++i2)
      for (std::size_t i1 = 0; i1 < d.n1; ++i1)
        out(i1, i2, i3) = (slice(cores.core(1), i1) * slice(cores.core(2), i2) * slice(cores.core(3), i3)).trace();
  return out;
}

Matrix kron_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Eigen::Index m = c.rows(), n = c.cols();
  Matrix k = Matrix::Zero(m * n, m * n);
  for (Eigen::Index j = 0; j < n; ++j) k.block(j * m, j * m, m, m) += a;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) k.block(j * m, l * m, m, m) += b(l, j) * Matrix::Identity(m, m);
  const Vector x = k.fullPivLu().solve(Eigen::Map<const Vector>(c.data(), m * n));
  return Eigen::Map<const Matrix>(x.data(), m, n);
}

Matrix dct_matrix(std::size_t n) {
  Matrix c(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double s = j == 0 ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n));
      c(Eigen::Index(j), Eigen::Index(k)) =
          s * std::cos(std::numbers::pi * double(2 * k + 1) * double(j) / double(2 * n));
    }
  return c;
}

Tensor3 face_svt_oracle(const Tensor3& a, TransformKind kind, double tau) {
  const Dims3 d = a.dims();
  const auto n = Eigen::Index(d.n3);
  CMatrix u(n, n);
  double rho = 1.0;
  if (kind == TransformKind::fft) {
    rho = double(n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        u(j, k) = std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / double(n));
  } else if (kind == TransformKind::dct) {
    u = dct_matrix(d.n3).cast<Complex>();
  } else {
    u = CMatrix::Identity(n, n);
  }
  std::vector<CMatrix> faces(std::size_t(n), CMatrix::Zero(Eigen::Index(d.n1), Eigen::Index(d.n2)));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      for (std::size_t i2 = 0; i2 < d.n2; ++i2)
        for (std::size_t i1 = 0; i1 < d.n1; ++i1)
          faces[std::size_t(j)](Eigen::Index(i1), Eigen::Index(i2)) += u(j, k) * a(i1, i2, std::size_t(k));
  for (auto& f : faces) {
    Eigen::JacobiSVD<CMatrix> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector s = (svd.singularValues().array() - tau).cwiseMax(0.0);
    const Eigen::Index m = s.size();
    f = svd.matrixU().leftCols(m) * s.cast<Complex>().asDiagonal() * svd.matrixV().leftCols(m).adjoint();
  }
  Tensor3 out(d);
  for (std::size_t k = 0; k < d.n3; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      for (std::size_t i2 = 0; i2 < d.n2; ++i2)
        for (std::size_t i1 = 0; i1 < d.n1; ++i1)
          out(i1, i2, k) +=
              (std::conj(u(j, Eigen::Index(k))) * faces[std::size_t(j)](Eigen::Index(i1), Eigen::Index(i2))).real() / rho;
  return out;
}

std::pair<double, double> count_rates(const Matrix& scores, const GroundTruthMask& mask, double tau) {
  double hit = 0, anom = 0, false_alarm = 0, back = 0;
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const bool detected = scores(i, j) >= tau;
      if (mask.is_anomaly(i, j)) {
        anom += 1;
        hit += detected;
      } else {
        back += 1;
        false_alarm += detected;
      }
    }
  return {hit / anom, false_alarm / back};
}

double trapezoid_pd_pf(const RocCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : curve.samples) pts.emplace_back(s.pf, s.pd);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
  return area;
}

}  // namespace tenring::testing
