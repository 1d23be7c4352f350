#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camsic/bytes.hpp"
#include "camsic/tensor.hpp"

namespace camsic {

/// RGB image with values in [0, 1], stored planar as [3, H, W].
struct ImagePlane {
  int height = 0;
  int width = 0;
  Tensor values;

  ImagePlane() = default;
  ImagePlane(int h, int w, float fill = 0.0f) : height(h), width(w), values({3, h, w}, fill) {}

  float& at(int c, int y, int x) { return values[(std::int64_t(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const { return values[(std::int64_t(c) * height + y) * width + x]; }

  friend bool operator==(const ImagePlane& a, const ImagePlane& b) {
    return a.height == b.height && a.width == b.width && a.values == b.values;
  }
};

/// Padded image plus the extents to crop back to after decoding.
struct PaddedImage {
  ImagePlane image;
  int original_height = 0;
  int original_width = 0;
};

/// Replicates the last row/column until both extents are multiples of `factor`.
PaddedImage pad_image(const ImagePlane& x, int factor);
ImagePlane crop_image(const ImagePlane& x, int height, int width);

/// Binary PPM (P6, maxval 255).
ImagePlane decode_ppm(std::span<const std::uint8_t> bytes);
Bytes encode_ppm(const ImagePlane& image);
ImagePlane read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ImagePlane& image);

/// Rounds [0,1] values to 8-bit levels and back.
ImagePlane quantize_to_8bit(const ImagePlane& image);

}  // namespace camsic
