#pragma once

// Decoder-free Transformer entropy model.
//
// u [h, w, d] plus a per-token flag (1 = estimated latent, 0 = content-aware
// token) -> per-channel Gaussian (mu, sigma). Pipeline:
//   project:   linear d -> T, then add identity embedding "estimated" or
//              "content" according to the flag
//   blocks:    post-norm Swin blocks; even blocks use regular windows, odd
//              blocks windows shifted by window_size/2 (only along axes that
//              span more than one window); learned relative position bias
//              per head; x = LN(x + Attn(x)); x = LN(x + MLP(x))
//   entropy parameters: three linear layers with LeakyReLU(0.01) between,
//              T -> T -> T -> 2d; mu = first d, sigma = clamp(exp(last d))

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "camsic/weights.hpp"

namespace camsic {

struct TokenSequence {
  int h = 0;
  int w = 0;
  Tensor tokens;                      // [h*w, T]
  std::vector<std::uint8_t> flags;    // 1 = estimated token
};

struct GaussianField {
  int h = 0;
  int w = 0;
  int d = 0;
  Tensor mu;     // [h, w, d]
  Tensor sigma;  // [h, w, d], within [sigma_min, sigma_max]

  float mu_at(int token, int channel) const { return mu[std::int64_t(token) * d + channel]; }
  float sigma_at(int token, int channel) const { return sigma[std::int64_t(token) * d + channel]; }
};

/// Receives each attention row after softmax: block, query token index,
/// key token indices (-1 for padding) and probabilities.
using AttentionObserver =
    std::function<void(int block, int query, std::span<const int> keys, std::span<const double> probs)>;

TokenSequence project(const Tensor& u, std::span<const std::uint8_t> flags, const WeightStore& weights);

TokenSequence swin_block(const TokenSequence& seq, int block_index, const WeightStore& weights,
                         const AttentionObserver* observer = nullptr);

GaussianField entropy_params(const TokenSequence& seq, const WeightStore& weights);

/// project -> every block -> entropy_params.
GaussianField model_forward(const Tensor& u, std::span<const std::uint8_t> flags, const WeightStore& weights);

/// Additive logit for keys excluded from a query's softmax.
inline constexpr double kMaskedLogit = -1e9;

}  // namespace camsic
