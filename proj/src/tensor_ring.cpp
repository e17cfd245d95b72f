#include "tenring/tensor_ring.hpp"

#include <random>

namespace tenring {

namespace {

void check_chain(const std::array<const Tensor3*, 3>& g) {
  for (int n = 0; n < 3; ++n) {
    const Dims3& d = g[n]->dims();
    if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) fail(ErrorCode::invalid_argument, "TR core with an empty extent");
    if (d.n3 != g[(n + 1) % 3]->dims().n1) fail(ErrorCode::dimension_mismatch, "TR cores: adjacent ranks differ");
  }
}

void check_core_index(int n) {
  if (n < 1 || n > 3) fail(ErrorCode::invalid_argument, "core index must be 1, 2 or 3");
}

}  // namespace

TRCores::TRCores(Tensor3 g1, Tensor3 g2, Tensor3 g3) : cores_{std::move(g1), std::move(g2), std::move(g3)} {
  check_chain({&cores_[0], &cores_[1], &cores_[2]});
}

void TRCores::set_core(int n, Tensor3 g) {
  check_core_index(n);
  const Dims3& old = cores_[n - 1].dims();
  if (g.dims().n1 != old.n1 || g.dims().n3 != old.n3)
    fail(ErrorCode::dimension_mismatch, "set_core: rank extents changed");
  cores_[n - 1] = std::move(g);
}

TRRanks TRCores::ranks() const { return {cores_[0].dims().n1, cores_[1].dims().n1, cores_[2].dims().n1}; }

Dims3 TRCores::dims() const { return {cores_[0].dims().n2, cores_[1].dims().n2, cores_[2].dims().n2}; }

Tensor3 subchain(const TRCores& cores, int n) {
  check_core_index(n);
  // Left core is n+1, right core is n+2 (cyclic); contract over their shared rank.
  const Tensor3& left = cores.core(n % 3 + 1);
  const Tensor3& right = cores.core((n + 1) % 3 + 1);
  const Dims3& dl = left.dims();
  const Dims3& dr = right.dims();
  const std::size_t ra = dl.n1, shared = dl.n3, rb = dr.n3;
  Tensor3 out({ra, dl.n2 * dr.n2, rb});
  for (std::size_t jr = 0; jr < dr.n2; ++jr)
    for (std::size_t jl = 0; jl < dl.n2; ++jl) {
      const std::size_t col = jl + dl.n2 * jr;
      for (std::size_t b = 0; b < rb; ++b)
        for (std::size_t c = 0; c < shared; ++c) {
          const double w = right(c, jr, b);
          if (w == 0.0) continue;
          for (std::size_t a = 0; a < ra; ++a) out(a, col, b) += left(a, jl, c) * w;
        }
    }
  return out;
}

Tensor3 tr_contract(const TRCores& cores) {
  // A_<n> = G^(n)_(2) (G^(!=n)_<2>)^T with n the largest core, so the two
  // smaller cores are the ones merged.
  const Dims3 d = cores.dims();
  int n = 1;
  for (int k = 2; k <= 3; ++k)
    if (cores.core(k).size() > cores.core(n).size()) n = k;
  const Matrix lhs = mode_unfold(cores.core(n), 2);
  const Matrix rhs = reversed_mode_unfold(subchain(cores, n), 2);
  return reversed_fold(lhs * rhs.transpose(), d, n);
}

double unfolding_identity_residual(const TRCores& cores) {
  const Tensor3 a = tr_contract(cores);
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const Matrix ak = reversed_mode_unfold(a, k);
    const double denom = ak.norm();
    if (denom == 0.0) continue;
    const Matrix approx = mode_unfold(cores.core(k), 2) * reversed_mode_unfold(subchain(cores, k), 2).transpose();
    worst = std::max(worst, (ak - approx).norm() / denom);
  }
  return worst;
}

TRCores random_init(Dims3 dims, TRRanks ranks, std::uint64_t seed) {
  if (ranks.r1 == 0 || ranks.r2 == 0 || ranks.r3 == 0) fail(ErrorCode::invalid_argument, "TR ranks must be >= 1");
  if (dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0) fail(ErrorCode::invalid_argument, "tensor dims must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Dims3 d) {
    std::vector<double> v(d.volume());
    for (double& x : v) x = normal(rng);
    return Tensor3(d, std::move(v));
  };
  Tensor3 g1 = draw({ranks.r1, dims.n1, ranks.r2});
  Tensor3 g2 = draw({ranks.r2, dims.n2, ranks.r3});
  Tensor3 g3 = draw({ranks.r3, dims.n3, ranks.r1});
  return TRCores(std::move(g1), std::move(g2), std::move(g3));
}

}  // namespace tenring
