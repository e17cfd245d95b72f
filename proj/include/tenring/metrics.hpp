#pragma once

#include <string>
#include <vector>

#include "tenring/tensor.hpp"

namespace tenring {

/// Binary anomaly labels (1 = anomaly) over the spatial grid.
class GroundTruthMask {
 public:
  /// Entries must be exactly 0 or 1.
  explicit GroundTruthMask(Matrix labels);

  const Matrix& labels() const { return labels_; }
  std::size_t rows() const { return std::size_t(labels_.rows()); }
  std::size_t cols() const { return std::size_t(labels_.cols()); }
  std::size_t anomaly_count() const;
  std::size_t background_count() const { return std::size_t(labels_.size()) - anomaly_count(); }
  bool is_anomaly(Eigen::Index i, Eigen::Index j) const { return labels_(i, j) == 1.0; }

 private:
  Matrix labels_;
};

/// One point of the 3-D ROC: threshold, detection and false-alarm probability.
struct RocSample {
  double tau = 0.0;
  double pd = 0.0;
  double pf = 0.0;
};

struct RocCurve {
  std::vector<RocSample> samples;  // tau strictly increasing
};

struct AucReport {
  double auc_pd_pf = 0.0;
  double auc_pd_tau = 0.0;
  double auc_pf_tau = 0.0;
  double odp = 0.0;
  double snpr = 0.0;
  double tdbs = 0.0;
  /// Set when auc_pf_tau == 0 and snpr holds the sentinel.
  bool snpr_degenerate = false;
};

inline constexpr double kSnprSentinel = 1e15;

/// Min-max scaling to [0, 1]; a constant map becomes all zeros.
Matrix normalize_map(const Matrix& t);

/// Exact ROC: thresholds are the unique scores plus {0, 1, 1 + eps}; a pixel
/// is declared anomalous when its score is >= tau.
RocCurve roc3d(const Matrix& scores, const GroundTruthMask& mask);

/// AUC(PD,PF) by trapezoids in the (PF, PD) plane. AUC(PD,tau) and
/// AUC(PF,tau) integrate the right-continuous step functions PD(tau), PF(tau)
/// exactly over the sampled thresholds.
AucReport auc_report(const RocCurve& curve);

struct BoxSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct SeparabilityStats {
  BoxSummary anomaly;
  BoxSummary background;
  /// anomaly.q1 - background.q3; positive when the boxes do not overlap.
  double gap = 0.0;
};

/// Quantile with linear interpolation between order statistics placed at
/// (i - 0.5) / n, clamped at both ends. `sorted` must be ascending.
double quantile_sorted(const std::vector<double>& sorted, double p);

SeparabilityStats separability_stats(const Matrix& scores, const GroundTruthMask& mask);

/// Header `tau,pd,pf`, one row per sample.
std::string roc_to_csv(const RocCurve& curve);

}  // namespace tenring
