#include "tenring/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tenring {

namespace {

void check_shapes(const Matrix& scores, const GroundTruthMask& mask) {
  if (std::size_t(scores.rows()) != mask.rows() || std::size_t(scores.cols()) != mask.cols())
    fail(ErrorCode::dimension_mismatch, "score map and mask dims differ");
}

void check_classes(const GroundTruthMask& mask) {
  if (mask.anomaly_count() == 0 || mask.background_count() == 0)
    fail(ErrorCode::invalid_argument, "mask must contain both anomaly and background pixels");
}

BoxSummary summarize(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {v.front(), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75), v.back()};
}

}  // namespace

GroundTruthMask::GroundTruthMask(Matrix labels) : labels_(std::move(labels)) {
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    const double v = labels_.data()[i];
    if (v != 0.0 && v != 1.0) fail(ErrorCode::invalid_argument, "mask values must be 0 or 1");
  }
}

std::size_t GroundTruthMask::anomaly_count() const {
  return std::size_t(std::count(labels_.data(), labels_.data() + labels_.size(), 1.0));
}

Matrix normalize_map(const Matrix& t) {
  if (t.size() == 0) return t;
  const double lo = t.minCoeff();
  const double hi = t.maxCoeff();
  if (!(hi > lo)) return Matrix::Zero(t.rows(), t.cols());
  Matrix out = ((t.array() - lo) / (hi - lo)).matrix();
  return out;
}

RocCurve roc3d(const Matrix& scores, const GroundTruthMask& mask) {
  check_shapes(scores, mask);
  check_classes(mask);
  if (scores.size() > 0 && !(scores.minCoeff() >= 0.0 && scores.maxCoeff() <= 1.0))
    fail(ErrorCode::invalid_argument, "roc: scores must lie in [0, 1]");
  // Sorted scores per class; counts of scores >= tau come from lower_bound.
  std::vector<double> anom, back;
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    for (Eigen::Index i = 0; i < scores.rows(); ++i) (mask.is_anomaly(i, j) ? anom : back).push_back(scores(i, j));
  std::sort(anom.begin(), anom.end());
  std::sort(back.begin(), back.end());

  std::vector<double> taus(scores.data(), scores.data() + scores.size());
  taus.push_back(0.0);
  taus.push_back(1.0);
  taus.push_back(1.0 + 1e-9);
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  auto fraction_at_least = [](const std::vector<double>& v, double tau) {
    const auto it = std::lower_bound(v.begin(), v.end(), tau);
    return double(v.end() - it) / double(v.size());
  };
  RocCurve curve;
  curve.samples.reserve(taus.size());
  for (double tau : taus) curve.samples.push_back({tau, fraction_at_least(anom, tau), fraction_at_least(back, tau)});
  return curve;
}

AucReport auc_report(const RocCurve& curve) {
  AucReport r;
  const auto& s = curve.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    // Moving down in tau walks the (PF, PD) curve towards (1, 1).
    r.auc_pd_pf += 0.5 * (s[i - 1].pf - s[i].pf) * (s[i - 1].pd + s[i].pd);
    const double width = s[i].tau - s[i - 1].tau;
    r.auc_pd_tau += width * s[i].pd;
    r.auc_pf_tau += width * s[i].pf;
  }
  r.tdbs = r.auc_pd_tau - r.auc_pf_tau;
  r.odp = r.auc_pd_pf + r.auc_pd_tau - r.auc_pf_tau;
  if (r.auc_pf_tau == 0.0) {
    r.snpr = kSnprSentinel;
    r.snpr_degenerate = true;
  } else {
    r.snpr = r.auc_pd_tau / r.auc_pf_tau;
  }
  return r;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::invalid_argument, "quantile of an empty sample");
  const double n = double(sorted.size());
  const double pos = p * n - 0.5;  // zero-based fractional order statistic
  if (pos <= 0.0) return sorted.front();
  if (pos >= n - 1.0) return sorted.back();
  const std::size_t lo = std::size_t(std::floor(pos));
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SeparabilityStats separability_stats(const Matrix& scores, const GroundTruthMask& mask) {
  check_shapes(scores, mask);
  if (mask.anomaly_count() == 0 || mask.background_count() == 0)
    fail(ErrorCode::invalid_argument, "separability: empty class");
  std::vector<double> anom, back;
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    for (Eigen::Index i = 0; i < scores.rows(); ++i) (mask.is_anomaly(i, j) ? anom : back).push_back(scores(i, j));
  SeparabilityStats st{summarize(std::move(anom)), summarize(std::move(back)), 0.0};
  st.gap = st.anomaly.q1 - st.background.q3;
  return st;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "tau,pd,pf\n";
  char buf[96];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.tau, s.pd, s.pf);
    out += buf;
  }
  return out;
}

}  // namespace tenring
