#pragma once

#include <array>
#include <cstdint>

#include "tenring/tensor.hpp"

namespace tenring {

struct TRRanks {
  std::size_t r1 = 1;
  std::size_t r2 = 1;
  std::size_t r3 = 1;

  /// 1-based, cyclic: rank(4) == rank(1).
  std::size_t operator[](int n) const { return (n - 1) % 3 == 0 ? r1 : ((n - 1) % 3 == 1 ? r2 : r3); }
  friend bool operator==(const TRRanks&, const TRRanks&) = default;
};

/// Three cyclically contracted cores; core n (1-based) is r_n x n_n x r_{n+1}
/// with r_4 = r_1.
class TRCores {
 public:
  TRCores() = default;
  TRCores(Tensor3 g1, Tensor3 g2, Tensor3 g3);

  const Tensor3& core(int n) const { return cores_.at(n - 1); }
  /// Replaces core n; its rank extents must stay unchanged.
  void set_core(int n, Tensor3 g);

  TRRanks ranks() const;
  Dims3 dims() const;

 private:
  std::array<Tensor3, 3> cores_;
};

/// Full tensor A(i1,i2,i3) = Tr(G1(:,i1,:) G2(:,i2,:) G3(:,i3,:)).
Tensor3 tr_contract(const TRCores& cores);

/// Merges the two cores other than n: r_{n+1} x (prod_{j != n} n_j) x r_n with
/// the merged middle index ordered cyclically from mode n+1, earliest fastest.
Tensor3 subchain(const TRCores& cores, int n);

/// max_k |A_<k> - G^(k)_(2) (G^(!=k)_<2>)^T|_F / |A_<k>|_F; 0 for a zero A.
double unfolding_identity_residual(const TRCores& cores);

/// i.i.d. standard normal cores from a seeded generator.
TRCores random_init(Dims3 dims, TRRanks ranks, std::uint64_t seed);

}  // namespace tenring
