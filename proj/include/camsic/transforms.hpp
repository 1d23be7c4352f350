#pragma once

// Image-side networks: analysis/synthesis transforms, hyperprior
// encoder/decoder, and the prior fusion that yields content-aware tokens.
//
// Latent tensors crossing this interface are token-major [h, w, d]. The
// convolution stacks are simplified stand-ins for a full learned-compression
// backbone:
//   analysis      4 x Conv(d, 5, stride 2), GELU between
//   synthesis     4 x ConvT(5, stride 2, out_pad 1), GELU between, last -> 3 ch
//   hyper enc     Conv(hd,3,1)+LReLU, Conv(hd,5,2)+LReLU, Conv(hd,5,2)
//   hyper dec     ConvT(hd,5,2)+LReLU, ConvT(d,5,2)+LReLU, Conv(d,3,1)
//   fusion        concat(hyper, disparity) -> Conv(d,3,1) -> 2 residual blocks
//                 (Conv(d,3,1)+LReLU+Conv(d,3,1), identity skip)

#include <cstdint>
#include <vector>

#include "camsic/image.hpp"
#include "camsic/weights.hpp"

namespace camsic {

/// Integer symbols on an h x w grid of d-channel tokens, raster token order.
struct LatentGrid {
  int h = 0;
  int w = 0;
  int d = 0;
  std::vector<std::int32_t> symbols;

  LatentGrid() = default;
  LatentGrid(int h_, int w_, int d_) : h(h_), w(w_), d(d_), symbols(std::size_t(h_) * w_ * d_, 0) {}

  int tokens() const { return h * w; }
  std::int32_t& at(int token, int channel) { return symbols[std::size_t(token) * d + channel]; }
  std::int32_t at(int token, int channel) const { return symbols[std::size_t(token) * d + channel]; }

  /// Symbols as reals, shaped [h, w, d].
  Tensor dequantize() const;

  friend bool operator==(const LatentGrid&, const LatentGrid&) = default;
};

struct QuantizeResult {
  LatentGrid grid;
  std::size_t saturated = 0;
};

/// Round half away from zero, then saturate into the symbol alphabet.
QuantizeResult quantize(const Tensor& y, const ModelConfig& config);

/// Padded image -> y [h, w, d]. Extents must be multiples of 16.
Tensor analysis(const ImagePlane& x, const WeightStore& weights);

/// Latent [h, w, d] -> image clamped to [0,1] and cropped to out_h x out_w.
ImagePlane synthesis(const Tensor& latent, const WeightStore& weights, int out_h, int out_w);

/// y [h, w, d] -> rounded hyper-latent on a ceil(h/4) x ceil(w/4) grid.
LatentGrid hyper_encode(const Tensor& y, const WeightStore& weights);

/// Hyper-latent -> hyper features [h, w, d] (upsampled x4, cropped to h x w).
Tensor hyper_decode(const LatentGrid& z, const WeightStore& weights, int h, int w);

/// Content-aware tokens c [h, w, d].
Tensor fuse_priors(const Tensor& hyper_features, const Tensor& disparity_prior,
                   const WeightStore& weights);

/// Learned first-view embedding broadcast to every position.
Tensor first_view_prior(const WeightStore& weights, int h, int w);

/// Learned constant token broadcast everywhere; content-free ablation tokens.
Tensor constant_token_prior(const WeightStore& weights, int h, int w);

}  // namespace camsic
