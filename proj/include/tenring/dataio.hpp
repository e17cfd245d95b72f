#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tenring/metrics.hpp"
#include "tenring/tensor.hpp"
#include "tenring/tensor_ring.hpp"

namespace tenring {

/// File layout: "TNS3", u32 version (1), three u64 dims, then n1*n2*n3
/// little-endian float64 values with i1 fastest.
inline constexpr char kTensorMagic[4] = {'T', 'N', 'S', '3'};
inline constexpr std::uint32_t kTensorVersion = 1;

Tensor3 read_tensor(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_tensor(const std::filesystem::path& path, const Tensor3& t);

/// Masks share the tensor container with dims (n1, n2, 1).
GroundTruthMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const GroundTruthMask& mask);

/// Writes `contents` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Per-band (mode-3 slice) min-max scaling to [0, 1]; constant bands become 0.
Tensor3 band_normalize(const Tensor3& t);

struct SyntheticScene {
  Tensor3 tensor;
  GroundTruthMask mask{Matrix::Zero(1, 1)};
  TRRanks ranks;
  std::size_t anomaly_count = 0;
  double anomaly_strength = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Smooth TR background (standard-normal cores, each filtered along its
/// mode 2 by a periodic 3-tap average) with `n_anomalies` distinct pixels
/// whose tubes receive a signature orthogonal to the local background tube,
/// scaled to strength * |background tube|. Optional i.i.d. Gaussian noise.
SyntheticScene generate_synthetic(Dims3 dims, TRRanks ranks, std::size_t n_anomalies, double anomaly_strength,
                                  double noise_sigma, std::uint64_t seed);

}  // namespace tenring
