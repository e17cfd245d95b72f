#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "tenring/dataio.hpp"
#include "tenring/solver.hpp"

using namespace tenring;
using namespace tenring::testing;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tenring_dataio_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

ErrorCode read_error(const fs::path& p) {
  try {
    read_tensor(p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

}  // namespace

TEST_CASE("tensor file roundtrip is bitwise") {
  TempDir dir;
  std::mt19937_64 rng(1);
  Tensor3 t = random_tensor({3, 4, 5}, rng);
  t(0, 0, 0) = -0.0;
  t(1, 0, 0) = 5e-324;
  t(2, 0, 0) = 1.7976931348623157e308;
  write_tensor(dir.path / "a.tns", t);
  const Tensor3 back = read_tensor(dir.path / "a.tns");
  REQUIRE(back.dims() == t.dims());
  CHECK(std::memcmp(back.values().data(), t.values().data(), t.size() * sizeof(double)) == 0);

  const std::string bytes = slurp(dir.path / "a.tns");
  CHECK(bytes.size() == 4 + 4 + 24 + 8 * 60);
  CHECK(bytes.substr(0, 4) == "TNS3");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 3);
  CHECK(bytes[16] == 4);
  CHECK(bytes[24] == 5);
  // No temporary files left behind.
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator()) == 1);
}

TEST_CASE("corrupt tensor files report distinct codes") {
  TempDir dir;
  std::mt19937_64 rng(2);
  write_tensor(dir.path / "good.tns", random_tensor({2, 3, 4}, rng));
  const std::string good = slurp(dir.path / "good.tns");

  std::string bad = good;
  bad.replace(0, 4, "XXXX");
  spit(dir.path / "magic.tns", bad);
  CHECK(read_error(dir.path / "magic.tns") == ErrorCode::bad_magic);

  spit(dir.path / "short.tns", good.substr(0, good.size() - 8));
  CHECK(read_error(dir.path / "short.tns") == ErrorCode::truncated);
  spit(dir.path / "header.tns", good.substr(0, 10));
  CHECK(read_error(dir.path / "header.tns") == ErrorCode::truncated);

  bad = good;
  bad[4] = 2;
  spit(dir.path / "version.tns", bad);
  CHECK(read_error(dir.path / "version.tns") == ErrorCode::version_mismatch);

  spit(dir.path / "long.tns", good + std::string(8, '\0'));
  CHECK(read_error(dir.path / "long.tns") != ErrorCode{});

  CHECK(read_error(dir.path / "missing.tns") == ErrorCode::io);
}

TEST_CASE("mask files") {
  TempDir dir;
  Matrix l = Matrix::Zero(3, 4);
  l(1, 2) = 1.0;
  write_mask(dir.path / "m.tns", GroundTruthMask(l));
  const GroundTruthMask back = read_mask(dir.path / "m.tns");
  CHECK(back.labels() == l);
  CHECK(read_tensor(dir.path / "m.tns").dims() == Dims3{3, 4, 1});

  write_tensor(dir.path / "notmask.tns", Tensor3::constant({3, 4, 1}, 0.5));
  CHECK_THROWS_AS(read_mask(dir.path / "notmask.tns"), Error);
  write_tensor(dir.path / "deep.tns", Tensor3({3, 4, 2}));
  CHECK_THROWS_AS(read_mask(dir.path / "deep.tns"), Error);
}

TEST_CASE("atomic text writes replace the target") {
  TempDir dir;
  write_file_atomic(dir.path / "x.txt", "first");
  write_file_atomic(dir.path / "x.txt", "second");
  CHECK(slurp(dir.path / "x.txt") == "second");
  CHECK_THROWS_AS(write_file_atomic(dir.path / "nope" / "x.txt", "z"), Error);
}

TEST_CASE("band normalization") {
  Tensor3 t({3, 1, 3});
  const double unit[] = {0.0, 0.3, 1.0}, constant[] = {5.0, 5.0, 5.0}, ramp[] = {2.0, 4.0, 6.0};
  for (std::size_t i = 0; i < 3; ++i) {
    t(i, 0, 0) = unit[i];
    t(i, 0, 1) = constant[i];
    t(i, 0, 2) = ramp[i];
  }
  const Tensor3 n = band_normalize(t);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(n(i, 0, 0) == unit[i]);
    CHECK(n(i, 0, 1) == 0.0);
  }
  CHECK(n(0, 0, 2) == 0.0);
  CHECK(n(1, 0, 2) == 0.5);
  CHECK(n(2, 0, 2) == 1.0);

  std::mt19937_64 rng(3);
  const Tensor3 r = band_normalize(random_tensor({4, 5, 6}, rng));
  CHECK(max_abs_diff(band_normalize(r), r) < 1e-15);
  CHECK(norms(r).linf <= 1.0);
}

TEST_CASE("synthetic background is an exact tensor ring") {
  const Dims3 d{8, 9, 7};
  const TRRanks r{2, 3, 2};
  const SyntheticScene s = generate_synthetic(d, r, 0, 2.0, 0.0, 11);
  CHECK(s.mask.anomaly_count() == 0);

  TRCores cores = random_init(d, r, 11);
  for (int n = 1; n <= 3; ++n) {
    const std::size_t len = cores.core(n).dims().n2;
    Matrix avg = Matrix::Zero(Eigen::Index(len), Eigen::Index(len));
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t off : {len - 1, std::size_t(0), std::size_t(1)})
        avg(Eigen::Index(i), Eigen::Index((i + off) % len)) += 1.0 / 3.0;
    cores.set_core(n, mode_product(cores.core(n), avg, 2));
  }
  CHECK(max_abs_diff(s.tensor, tr_contract(cores)) < 1e-12 * norms(s.tensor).linf);
  CHECK(unfolding_identity_residual(cores) < 1e-10);
}

TEST_CASE("planted anomalies") {
  const Dims3 d{10, 12, 6};
  const SyntheticScene clean = generate_synthetic(d, {2, 3, 2}, 0, 2.0, 0.0, 5);
  const SyntheticScene planted = generate_synthetic(d, {2, 3, 2}, 7, 2.0, 0.0, 5);
  CHECK(planted.mask.anomaly_count() == 7);
  for (std::size_t i1 = 0; i1 < d.n1; ++i1)
    for (std::size_t i2 = 0; i2 < d.n2; ++i2) {
      Vector bg(6), diff(6);
      for (std::size_t k = 0; k < 6; ++k) {
        bg(Eigen::Index(k)) = clean.tensor(i1, i2, k);
        diff(Eigen::Index(k)) = planted.tensor(i1, i2, k) - clean.tensor(i1, i2, k);
      }
      if (planted.mask.is_anomaly(Eigen::Index(i1), Eigen::Index(i2))) {
        CHECK(std::abs(diff.dot(bg)) < 1e-10 * bg.squaredNorm());
        CHECK(diff.norm() == doctest::Approx(2.0 * bg.norm()).epsilon(1e-10));
      } else {
        CHECK(diff.norm() == 0.0);
      }
    }

  const SyntheticScene again = generate_synthetic(d, {2, 3, 2}, 7, 2.0, 0.01, 5);
  const SyntheticScene again2 = generate_synthetic(d, {2, 3, 2}, 7, 2.0, 0.01, 5);
  CHECK(again.tensor == again2.tensor);
  CHECK(again.mask.labels() == again2.mask.labels());
  CHECK(again.mask.labels() == planted.mask.labels());
  CHECK(!(again.tensor == planted.tensor));
  CHECK(!(generate_synthetic(d, {2, 3, 2}, 7, 2.0, 0.0, 6).tensor == planted.tensor));

  CHECK_THROWS_AS(generate_synthetic({2, 2, 3}, {1, 1, 1}, 4, 1.0, 0.0, 1), Error);
  CHECK_THROWS_AS(generate_synthetic({2, 2, 3}, {1, 1, 1}, 1, -1.0, 0.0, 1), Error);
}

TEST_CASE("noise-free synthetic scene is refit by a same-rank solve") {
  const SyntheticScene s = generate_synthetic({12, 12, 8}, {2, 3, 2}, 0, 0.0, 0.0, 21);
  SolverConfig cfg;
  cfg.ranks = {2, 3, 2};
  cfg.seed = 1;
  const SolveOutput out = solve(s.tensor, cfg);
  CHECK(relative_error(out.background, s.tensor) < 1e-2);
}
