#include "tenring/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <unistd.h>

namespace tenring {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 8;

template <typename T>
void put_le(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::io, "read error on '" + path.string() + "'");
  return data;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), std::streamsize(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::io, "write error on '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::io, "cannot move output into place at '" + path.string() + "'");
  }
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  if (data.size() < 4 || std::memcmp(data.data(), kTensorMagic, 4) != 0)
    fail(ErrorCode::bad_magic, "'" + path.string() + "' is not a TNS3 tensor file");
  if (data.size() < kHeaderBytes) fail(ErrorCode::truncated, "'" + path.string() + "': truncated header");
  const auto version = get_le<std::uint32_t>(data.data() + 4);
  if (version != kTensorVersion)
    fail(ErrorCode::version_mismatch, "'" + path.string() + "': unsupported version " + std::to_string(version));
  Dims3 d{get_le<std::uint64_t>(data.data() + 8), get_le<std::uint64_t>(data.data() + 16),
          get_le<std::uint64_t>(data.data() + 24)};
  if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) fail(ErrorCode::invalid_argument, "'" + path.string() + "': zero extent");
  const std::size_t count = d.volume();
  if (count / d.n1 / d.n2 != d.n3) fail(ErrorCode::invalid_argument, "'" + path.string() + "': dims overflow");
  const std::size_t payload = data.size() - kHeaderBytes;
  if (payload < count * 8) fail(ErrorCode::truncated, "'" + path.string() + "': truncated payload");
  if (payload > count * 8) fail(ErrorCode::invalid_argument, "'" + path.string() + "': trailing bytes after payload");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_le<double>(data.data() + kHeaderBytes + 8 * i);
  return Tensor3(d, std::move(values));
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  std::string buf;
  buf.reserve(kHeaderBytes + 8 * t.size());
  buf.append(kTensorMagic, 4);
  put_le<std::uint32_t>(buf, kTensorVersion);
  put_le<std::uint64_t>(buf, t.dims().n1);
  put_le<std::uint64_t>(buf, t.dims().n2);
  put_le<std::uint64_t>(buf, t.dims().n3);
  for (double v : t.values()) put_le<double>(buf, v);
  write_file_atomic(path, buf);
}

GroundTruthMask read_mask(const std::filesystem::path& path) {
  const Tensor3 t = read_tensor(path);
  if (t.dims().n3 != 1) fail(ErrorCode::invalid_argument, "mask file must have n3 == 1");
  return GroundTruthMask(Eigen::Map<const Matrix>(t.values().data(), t.dims().n1, t.dims().n2));
}

void write_mask(const std::filesystem::path& path, const GroundTruthMask& mask) {
  const Matrix& m = mask.labels();
  write_tensor(path, Tensor3({mask.rows(), mask.cols(), 1}, std::vector<double>(m.data(), m.data() + m.size())));
}

Tensor3 band_normalize(const Tensor3& t) {
  const Dims3& d = t.dims();
  Tensor3 out(d);
  const std::size_t band = d.n1 * d.n2;
  const auto src = t.values();
  auto dst = out.values();
  for (std::size_t k = 0; k < d.n3; ++k) {
    const auto first = src.begin() + std::ptrdiff_t(k * band);
    const auto [lo, hi] = std::minmax_element(first, first + std::ptrdiff_t(band));
    const double range = *hi - *lo;
    if (!(range > 0.0)) continue;
    for (std::size_t i = 0; i < band; ++i) dst[k * band + i] = (src[k * band + i] - *lo) / range;
  }
  return out;
}

SyntheticScene generate_synthetic(Dims3 dims, TRRanks ranks, std::size_t n_anomalies, double anomaly_strength,
                                  double noise_sigma, std::uint64_t seed) {
  if (n_anomalies >= dims.n1 * dims.n2) fail(ErrorCode::invalid_argument, "too many anomalies for the grid");
  if (anomaly_strength < 0.0 || noise_sigma < 0.0)
    fail(ErrorCode::invalid_argument, "anomaly strength and noise must be nonnegative");

  TRCores cores = random_init(dims, ranks, seed);
  for (int n = 1; n <= 3; ++n) {
    const Tensor3& g = cores.core(n);
    const std::size_t len = g.dims().n2;
    // Periodic 3-tap moving average along the core's physical mode.
    Matrix filter = Matrix::Zero(len, len);
    for (std::size_t i = 0; i < len; ++i) {
      filter(i, (i + len - 1) % len) += 1.0 / 3.0;
      filter(i, i) += 1.0 / 3.0;
      filter(i, (i + 1) % len) += 1.0 / 3.0;
    }
    cores.set_core(n, mode_product(g, filter, 2));
  }
  Tensor3 scene = tr_contract(cores);

  // Anomalies and noise draw from their own streams so the background and
  // the planted pixels do not depend on each other's settings.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> pixels(dims.n1 * dims.n2);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = i;
  for (std::size_t i = 0; i < n_anomalies; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pixels.size() - 1);
    std::swap(pixels[i], pixels[pick(rng)]);
  }

  Matrix labels = Matrix::Zero(dims.n1, dims.n2);
  for (std::size_t a = 0; a < n_anomalies; ++a) {
    const std::size_t i1 = pixels[a] % dims.n1, i2 = pixels[a] / dims.n1;
    Vector tube(dims.n3), sig(dims.n3);
    for (std::size_t k = 0; k < dims.n3; ++k) {
      tube(k) = scene(i1, i2, k);
      sig(k) = normal(rng);
    }
    const double tube_sq = tube.squaredNorm();
    if (tube_sq > 0.0) sig -= (sig.dot(tube) / tube_sq) * tube;
    const double sig_norm = sig.norm();
    if (sig_norm > 0.0) sig *= anomaly_strength * std::sqrt(tube_sq) / sig_norm;
    for (std::size_t k = 0; k < dims.n3; ++k) scene(i1, i2, k) += sig(k);
    labels(i1, i2) = 1.0;
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 noise_rng(seed ^ 0xd1b54a32d192ed03ULL);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : scene.values()) v += noise(noise_rng);
  }

  SyntheticScene out{std::move(scene), GroundTruthMask(std::move(labels)), ranks, n_anomalies, anomaly_strength,
                     noise_sigma, seed};
  return out;
}

}  // namespace tenring
