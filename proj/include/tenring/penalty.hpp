#pragma once

#include <string>
#include <string_view>

#include "tenring/tensor.hpp"

namespace tenring {

enum class PenaltyKind { l1, lp, log, mcp, capped_l1, capped_lp, capped_log, capped_mcp };

/// A symmetric penalty psi(x) = psi(|x|), nondecreasing on [0, inf) with
/// psi(0) = 0. Parameters not used by a kind are ignored.
///
/// The capped kinds are min{1, c * base(x)} where c normalises the base
/// penalty so the cap is reached exactly at |x| = cap.
class PenaltySpec {
 public:
  static PenaltySpec l1();
  static PenaltySpec lp(double p);
  static PenaltySpec log(double theta);
  static PenaltySpec mcp(double eta);
  static PenaltySpec capped_l1(double cap);
  static PenaltySpec capped_lp(double p, double cap);
  static PenaltySpec capped_log(double theta, double cap);
  static PenaltySpec capped_mcp(double eta, double cap);

  /// Builds any kind from a full parameter set; validates the ones the kind uses.
  static PenaltySpec make(PenaltyKind kind, double p, double theta, double eta, double cap);

  PenaltyKind kind() const { return kind_; }
  double p() const { return p_; }
  double theta() const { return theta_; }
  double eta() const { return eta_; }
  double cap() const { return cap_; }
  bool is_capped() const;

  double eval(double x) const;

  /// A global minimiser of mu * psi(x) + (x - v)^2 / 2. mu == 0 returns v.
  double prox(double mu, double v) const;

  /// mu * psi(x) + (x - v)^2 / 2
  double prox_objective(double mu, double v, double x) const { return mu * eval(x) + 0.5 * (x - v) * (x - v); }

  friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;

 private:
  PenaltySpec(PenaltyKind kind, double p, double theta, double eta, double cap);

  double base_eval(double x) const;
  double cap_scale() const;

  PenaltyKind kind_ = PenaltyKind::l1;
  double p_ = 0.5;
  double theta_ = 1.0;
  double eta_ = 1.0;
  double cap_ = 1.0;
};

std::string to_string(PenaltyKind kind);
/// Accepts the names produced by to_string ("l1", "lp", "log", "mcp",
/// "capped-l1", "capped-lp", "capped-log", "capped-mcp").
PenaltyKind parse_penalty_kind(std::string_view name);

enum class ThresholdMode { entrywise, tubewise };

/// Generalized thresholding: entrywise applies prox to every entry, tubewise
/// rescales each mode-3 tube by prox(lambda, |tube|) / |tube|.
Tensor3 threshold_tensor(const Tensor3& a, const PenaltySpec& psi, double lambda, ThresholdMode mode);

/// sum_i psi(|a_i|)
double entrywise_penalty(const Tensor3& a, const PenaltySpec& psi);
/// sum_{i1,i2} psi(|a(i1,i2,:)|_F)
double tubewise_penalty(const Tensor3& a, const PenaltySpec& psi);

}  // namespace tenring
