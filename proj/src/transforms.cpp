#include "camsic/transforms.hpp"

#include <cmath>

#include "camsic/kernels.hpp"

namespace camsic {

namespace {

Tensor conv(const Tensor& x, const WeightStore& ws, const std::string& name, int stride) {
  const auto& w = ws.at(name + ".weight");
  return nn::conv2d(x, w, ws.at(name + ".bias"), stride, static_cast<int>(w.dim(2) / 2));
}

// Stride-2 transposed convolutions here exactly double each extent.
Tensor deconv(const Tensor& x, const WeightStore& ws, const std::string& name) {
  const auto& w = ws.at(name + ".weight");
  return nn::conv_transpose2d(x, w, ws.at(name + ".bias"), 2, static_cast<int>(w.dim(2) / 2), 1);
}

Tensor add(Tensor a, const Tensor& b) {
  for (std::int64_t i = 0; i < a.numel(); ++i) a[i] += b[i];
  return a;
}

Tensor broadcast_vector(const Tensor& v, int h, int w) {
  const auto d = v.numel();
  Tensor out({h, w, d});
  for (std::int64_t t = 0; t < std::int64_t(h) * w; ++t)
    for (std::int64_t c = 0; c < d; ++c) out[t * d + c] = v[c];
  return out;
}

Tensor crop_planes(const Tensor& chw, std::int64_t h, std::int64_t w) {
  const auto c = chw.dim(0), ih = chw.dim(1), iw = chw.dim(2);
  if (ih == h && iw == w) return chw;
  Tensor out({c, h, w});
  for (std::int64_t ch = 0; ch < c; ++ch)
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) out[(ch * h + y) * w + x] = chw[(ch * ih + y) * iw + x];
  return out;
}

}  // namespace

Tensor LatentGrid::dequantize() const {
  Tensor out({h, w, d});
  for (std::size_t i = 0; i < symbols.size(); ++i) out[std::int64_t(i)] = static_cast<float>(symbols[i]);
  return out;
}

QuantizeResult quantize(const Tensor& y, const ModelConfig& config) {
  require(y.rank() == 3, ErrorCode::kDimension, "quantize expects [h,w,d]");
  QuantizeResult r{LatentGrid(int(y.dim(0)), int(y.dim(1)), int(y.dim(2))), 0};
  for (std::int64_t i = 0; i < y.numel(); ++i) {
    // std::round rounds halves away from zero.
    double q = std::round(double(y[i]));
    if (q < config.symbol_min) {
      q = config.symbol_min;
      ++r.saturated;
    } else if (q > config.symbol_max) {
      q = config.symbol_max;
      ++r.saturated;
    }
    r.grid.symbols[std::size_t(i)] = static_cast<std::int32_t>(q);
  }
  return r;
}

Tensor analysis(const ImagePlane& x, const WeightStore& weights) {
  const int f = weights.config().downsample_factor;
  if (x.height % f != 0 || x.width % f != 0) {
    fail(ErrorCode::kParameter, "analysis input extents must be multiples of " + std::to_string(f));
  }
  Tensor h = x.values;
  for (int i = 0; i < 4; ++i) {
    h = conv(h, weights, "analysis.conv" + std::to_string(i), 2);
    if (i < 3) h = nn::gelu(h);
  }
  return planes_to_tokens(h);
}

ImagePlane synthesis(const Tensor& latent, const WeightStore& weights, int out_h, int out_w) {
  require(latent.rank() == 3 && latent.dim(2) == weights.config().latent_dim, ErrorCode::kDimension,
          "synthesis expects [h,w,d]");
  Tensor h = tokens_to_planes(latent);
  for (int i = 0; i < 4; ++i) {
    h = deconv(h, weights, "synthesis.deconv" + std::to_string(i));
    if (i < 3) h = nn::gelu(h);
  }
  const auto full_h = h.dim(1), full_w = h.dim(2);
  if (out_h > full_h || out_w > full_w) fail(ErrorCode::kDimension, "crop extents exceed synthesis output");
  ImagePlane img(out_h, out_w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        const float v = h[(c * full_h + y) * full_w + x];
        img.at(c, y, x) = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      }
  return img;
}

LatentGrid hyper_encode(const Tensor& y, const WeightStore& weights) {
  require(y.rank() == 3 && y.dim(2) == weights.config().latent_dim, ErrorCode::kDimension,
          "hyper_encode expects [h,w,d]");
  Tensor h = tokens_to_planes(y);
  h = nn::leaky_relu(conv(h, weights, "hyper_encoder.conv0", 1));
  h = nn::leaky_relu(conv(h, weights, "hyper_encoder.conv1", 2));
  h = conv(h, weights, "hyper_encoder.conv2", 2);
  return quantize(planes_to_tokens(h), weights.config()).grid;
}

Tensor hyper_decode(const LatentGrid& z, const WeightStore& weights, int h, int w) {
  const auto& cfg = weights.config();
  if (z.d != cfg.hyper_dim || z.h != (h + 3) / 4 || z.w != (w + 3) / 4) {
    fail(ErrorCode::kDimension, "hyper-latent extents do not match the latent grid");
  }
  Tensor x = tokens_to_planes(z.dequantize());
  x = nn::leaky_relu(deconv(x, weights, "hyper_decoder.deconv0"));
  x = nn::leaky_relu(deconv(x, weights, "hyper_decoder.deconv1"));
  x = crop_planes(x, h, w);
  x = conv(x, weights, "hyper_decoder.conv2", 1);
  return planes_to_tokens(x);
}

Tensor fuse_priors(const Tensor& hyper_features, const Tensor& disparity_prior, const WeightStore& weights) {
  if (hyper_features.shape() != disparity_prior.shape() || hyper_features.rank() != 3) {
    fail(ErrorCode::kDimension, "fuse_priors inputs differ: " + shape_string(hyper_features.shape()) + " vs " +
                                    shape_string(disparity_prior.shape()));
  }
  const auto h = hyper_features.dim(0), w = hyper_features.dim(1), d = hyper_features.dim(2);
  Tensor cat({2 * d, h, w});
  const Tensor a = tokens_to_planes(hyper_features);
  const Tensor b = tokens_to_planes(disparity_prior);
  std::copy(a.data().begin(), a.data().end(), cat.data().begin());
  std::copy(b.data().begin(), b.data().end(), cat.data().begin() + a.numel());

  Tensor x = conv(cat, weights, "fusion.conv_in", 1);
  for (int r = 0; r < 2; ++r) {
    const std::string p = "fusion.res" + std::to_string(r);
    Tensor t = nn::leaky_relu(conv(x, weights, p + ".conv0", 1));
    t = conv(t, weights, p + ".conv1", 1);
    x = add(std::move(x), t);
  }
  return planes_to_tokens(x);
}

Tensor first_view_prior(const WeightStore& weights, int h, int w) {
  return broadcast_vector(weights.at("prior.first_view"), h, w);
}

Tensor constant_token_prior(const WeightStore& weights, int h, int w) {
  return broadcast_vector(weights.at("prior.constant_token"), h, w);
}

}  // namespace camsic
