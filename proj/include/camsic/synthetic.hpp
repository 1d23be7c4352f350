#pragma once

#include <array>
#include <cstdint>

#include "camsic/image.hpp"

namespace camsic {

struct SyntheticStereoSpec {
  int height = 128;
  int width = 128;
  int min_disparity = 1;  // pixels, horizontal
  int max_disparity = 8;
  double noise_sigma = 0.02;
  int blobs = 6;
};

struct SyntheticPair {
  std::array<ImagePlane, 2> views;
  int disparity = 0;
};

/// Smooth random scene rendered twice: the right view samples the scene
/// `disparity` pixels further along x, and each view gets independent
/// Gaussian noise. Values quantized to 8-bit levels. Deterministic per seed
/// on every platform.
SyntheticPair make_synthetic_pair(std::uint64_t seed, const SyntheticStereoSpec& spec = {});

}  // namespace camsic
