#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tenring/tensor_ring.hpp"

using namespace tenring;
using namespace tenring::testing;

namespace {

TRCores random_cores(Dims3 d, TRRanks r, std::mt19937_64& rng) {
  return TRCores(random_tensor({r.r1, d.n1, r.r2}, rng), random_tensor({r.r2, d.n2, r.r3}, rng),
                 random_tensor({r.r3, d.n3, r.r1}, rng));
}

}  // namespace

TEST_CASE("cores validate rank compatibility") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(TRCores(random_tensor({2, 3, 3}, rng), random_tensor({2, 3, 2}, rng), random_tensor({2, 3, 2}, rng)),
                  Error);
  TRCores ok = random_cores({3, 4, 5}, {2, 3, 2}, rng);
  CHECK(ok.ranks() == TRRanks{2, 3, 2});
  CHECK(ok.dims() == Dims3{3, 4, 5});
  CHECK_THROWS_AS(ok.set_core(2, random_tensor({3, 4, 3}, rng)), Error);
  CHECK_NOTHROW(ok.set_core(2, random_tensor({3, 7, 2}, rng)));
  CHECK(ok.dims().n2 == 7);
  CHECK(TRRanks{1, 2, 3}[4] == 1);
}

TEST_CASE("rank-1 ring is a separable product") {
  std::mt19937_64 rng(2);
  const TRCores c = random_cores({3, 4, 2}, {1, 1, 1}, rng);
  const Tensor3 a = tr_contract(c);
  for (std::size_t i1 = 0; i1 < 3; ++i1)
    for (std::size_t i2 = 0; i2 < 4; ++i2)
      for (std::size_t i3 = 0; i3 < 2; ++i3)
        CHECK(a(i1, i2, i3) ==
              doctest::Approx(c.core(1)(0, i1, 0) * c.core(2)(0, i2, 0) * c.core(3)(0, i3, 0)).epsilon(1e-14));
}

TEST_CASE("zero core gives a zero tensor") {
  std::mt19937_64 rng(3);
  TRCores c = random_cores({3, 4, 5}, {2, 3, 2}, rng);
  c.set_core(2, Tensor3({3, 4, 2}));
  CHECK(tr_contract(c) == Tensor3({3, 4, 5}));
  CHECK(unfolding_identity_residual(c) == 0.0);
}

TEST_CASE("contraction matches the trace formula") {
  std::mt19937_64 rng(4);
  const TRCores c = random_cores({3, 4, 5}, {2, 3, 2}, rng);
  CHECK(max_abs_diff(tr_contract(c), trace_contract(c)) < 1e-12);
  std::uniform_int_distribution<std::size_t> rank(1, 4), dim(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const TRCores r = random_cores({dim(rng), dim(rng), dim(rng)}, {rank(rng), rank(rng), rank(rng)}, rng);
    CHECK(max_abs_diff(tr_contract(r), trace_contract(r)) < 1e-12);
  }
}

TEST_CASE("subchain") {
  std::mt19937_64 rng(5);
  const TRCores c = random_cores({3, 4, 2}, {1, 1, 1}, rng);
  // Skipping mode 1 merges modes 2 and 3 with mode 2 fastest.
  const Tensor3 s1 = subchain(c, 1);
  CHECK(s1.dims() == Dims3{1, 8, 1});
  for (std::size_t i2 = 0; i2 < 4; ++i2)
    for (std::size_t i3 = 0; i3 < 2; ++i3)
      CHECK(s1(0, i2 + 4 * i3, 0) == doctest::Approx(c.core(2)(0, i2, 0) * c.core(3)(0, i3, 0)).epsilon(1e-14));
  // Skipping mode 2: cyclic order from mode 3, so mode 3 fastest, then mode 1.
  const Tensor3 s2 = subchain(c, 2);
  for (std::size_t i3 = 0; i3 < 2; ++i3)
    for (std::size_t i1 = 0; i1 < 3; ++i1)
      CHECK(s2(0, i3 + 2 * i1, 0) == doctest::Approx(c.core(3)(0, i3, 0) * c.core(1)(0, i1, 0)).epsilon(1e-14));

  const TRCores ones(Tensor3::constant({1, 3, 1}, 1.0), Tensor3::constant({1, 4, 1}, 1.0),
                     Tensor3::constant({1, 5, 1}, 1.0));
  for (int n = 1; n <= 3; ++n) CHECK(subchain(ones, n) == Tensor3::constant(subchain(ones, n).dims(), 1.0));
  CHECK(subchain(ones, 3).dims() == Dims3{1, 12, 1});

  const TRCores r = random_cores({3, 4, 5}, {2, 3, 4}, rng);
  CHECK(subchain(r, 1).dims() == Dims3{3, 20, 2});
  CHECK(subchain(r, 2).dims() == Dims3{4, 15, 3});
  CHECK(subchain(r, 3).dims() == Dims3{2, 12, 4});
  CHECK_THROWS_AS(subchain(r, 0), Error);
  CHECK_THROWS_AS(subchain(r, 4), Error);
}

TEST_CASE("unfolding identity") {
  std::mt19937_64 rng(6);
  CHECK(unfolding_identity_residual(random_cores({3, 3, 3}, {2, 2, 2}, rng)) < 1e-10);
  CHECK(unfolding_identity_residual(random_cores({3, 4, 5}, {1, 1, 1}, rng)) < 1e-12);
  std::uniform_int_distribution<std::size_t> rank(1, 4), dim(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const TRCores c = random_cores({dim(rng), dim(rng), dim(rng)}, {rank(rng), rank(rng), rank(rng)}, rng);
    CHECK(unfolding_identity_residual(c) < 1e-10);
    // The same identity written out explicitly for every mode.
    const Tensor3 a = tr_contract(c);
    for (int n = 1; n <= 3; ++n) {
      const Matrix rhs = mode_unfold(c.core(n), 2) * reversed_mode_unfold(subchain(c, n), 2).transpose();
      CHECK((reversed_mode_unfold(a, n) - rhs).norm() <= 1e-10 * std::max(1.0, frobenius_norm(a)));
    }
  }
}

TEST_CASE("random init") {
  const TRCores a = random_init({400, 300, 300}, {10, 10, 10}, 42);
  const TRCores b = random_init({400, 300, 300}, {10, 10, 10}, 42);
  const TRCores c = random_init({400, 300, 300}, {10, 10, 10}, 43);
  for (int n = 1; n <= 3; ++n) CHECK(a.core(n) == b.core(n));
  CHECK(!(a.core(1) == c.core(1)));
  CHECK(a.ranks() == TRRanks{10, 10, 10});

  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (int n = 1; n <= 3; ++n)
    for (double v : a.core(n).values()) {
      sum += v;
      sq += v * v;
      ++count;
    }
  REQUIRE(count == 100000);
  const double mean = sum / double(count);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sq / double(count) - mean * mean - 1.0) < 0.05);
  CHECK_THROWS_AS(random_init({3, 3, 3}, {0, 1, 1}, 1), Error);
}

TEST_CASE("contraction is multilinear and cyclic") {
  std::mt19937_64 rng(7);
  const TRCores c = random_cores({3, 4, 5}, {2, 3, 4}, rng);
  const Tensor3 a = tr_contract(c);
  for (int n = 1; n <= 3; ++n) {
    TRCores scaled = c;
    scaled.set_core(n, -2.5 * c.core(n));
    CHECK(relative_error(tr_contract(scaled), -2.5 * a) < 1e-12);
  }
  // (G2, G3, G1) contracts to a with modes rotated: b(i2, i3, i1) = a(i1, i2, i3).
  const Tensor3 b = tr_contract(TRCores(c.core(2), c.core(3), c.core(1)));
  CHECK(b.dims() == Dims3{4, 5, 3});
  double worst = 0.0;
  for (std::size_t i1 = 0; i1 < 3; ++i1)
    for (std::size_t i2 = 0; i2 < 4; ++i2)
      for (std::size_t i3 = 0; i3 < 5; ++i3) worst = std::max(worst, std::abs(b(i2, i3, i1) - a(i1, i2, i3)));
  CHECK(worst < 1e-12);
}
