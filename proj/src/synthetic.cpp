#include "camsic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace camsic {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return double(gen_() >> 11) * (1.0 / 9007199254740992.0); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(gen_() % std::uint64_t(hi - lo + 1)); }

 private:
  std::mt19937_64 gen_;
};

struct Blob {
  double cx, cy, radius;
  std::array<double, 3> color;
};

}  // namespace

SyntheticPair make_synthetic_pair(std::uint64_t seed, const SyntheticStereoSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0) fail(ErrorCode::kParameter, "synthetic image extents");
  if (spec.min_disparity < 0 || spec.max_disparity < spec.min_disparity) {
    fail(ErrorCode::kParameter, "synthetic disparity range");
  }
  Rng rng(seed);
  SyntheticPair out;
  out.disparity = rng.integer(spec.min_disparity, spec.max_disparity);

  std::array<double, 3> base{}, gx{}, gy{};
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(0.25, 0.75);
    gx[c] = rng.uniform(-0.3, 0.3) / spec.width;
    gy[c] = rng.uniform(-0.3, 0.3) / spec.height;
  }
  std::vector<Blob> blobs(std::size_t(spec.blobs));
  const double extent = std::max(spec.height, spec.width);
  for (auto& b : blobs) {
    b.cx = rng.uniform(-0.1, 1.1) * (spec.width + spec.max_disparity);
    b.cy = rng.uniform(-0.1, 1.1) * spec.height;
    b.radius = rng.uniform(0.08, 0.3) * extent;
    for (auto& v : b.color) v = rng.uniform(-0.35, 0.35);
  }
  auto scene = [&](int c, double x, double y) {
    double v = base[c] + gx[c] * x + gy[c] * y;
    for (const auto& b : blobs) {
      const double dx = x - b.cx, dy = y - b.cy;
      v += b.color[c] * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
    }
    return v;
  };

  for (int view = 0; view < 2; ++view) {
    ImagePlane img(spec.height, spec.width);
    const double offset = view == 0 ? 0.0 : double(out.disparity);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        for (int c = 0; c < 3; ++c) {
          const double v = scene(c, x + offset, y) + spec.noise_sigma * rng.normal();
          img.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    out.views[std::size_t(view)] = quantize_to_8bit(img);
  }
  return out;
}

}  // namespace camsic
