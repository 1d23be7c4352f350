#include "camsic/tensor.hpp"

#include <cmath>
#include <sstream>

namespace camsic {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) {
    if (e < 0) fail(ErrorCode::kDimension, "negative extent");
    n *= e;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  if (shape_.size() > 4) fail(ErrorCode::kDimension, "tensor rank above 4");
  data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.size() > 4) fail(ErrorCode::kDimension, "tensor rank above 4");
  if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size())) {
    fail(ErrorCode::kDimension, "value count does not match " + shape_string(shape_));
  }
}

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) fail(ErrorCode::kDimension, "axis out of range");
  return shape_[static_cast<std::size_t>(axis)];
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor planes_to_tokens(const Tensor& chw) {
  require(chw.rank() == 3, ErrorCode::kDimension, "expected [C,H,W]");
  const auto c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
  Tensor out({h, w, c});
  for (std::int64_t ch = 0; ch < c; ++ch)
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) out[(y * w + x) * c + ch] = chw[(ch * h + y) * w + x];
  return out;
}

Tensor tokens_to_planes(const Tensor& hwc) {
  require(hwc.rank() == 3, ErrorCode::kDimension, "expected [H,W,C]");
  const auto h = hwc.dim(0), w = hwc.dim(1), c = hwc.dim(2);
  Tensor out({c, h, w});
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t ch = 0; ch < c; ++ch) out[(ch * h + y) * w + x] = hwc[(y * w + x) * c + ch];
  return out;
}

}  // namespace camsic
