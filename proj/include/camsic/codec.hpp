#pragma once

// Stereo pair encode/decode through the iterative masked-token protocol.
//
// Per view, with N = h*w tokens and K steps:
//   mask = all false
//   for k = 1..K:
//     u     = compose_context(yhat, c, mask)     (k = 1: u = c)
//     field = model_forward(u, mask)
//     sel   = select_tokens(token_entropy(field), mask, n_k)
//     range-code yhat at sel (tokens in raster order, channels in order)
//     mask  = advance(mask, sel)
// The decoder runs the same loop, filling yhat as symbols arrive.
//
// "CMSC" container (integers little-endian):
//   "CMSC" | u16 version | u8 prior mode | u8 steps | u32 weights digest
//   | per view: u32 height, u32 width, u32 hyper length, hyper payload,
//               u32 main length, main payload
//   | u32 CRC-32 of every preceding byte

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "camsic/bytes.hpp"
#include "camsic/coder.hpp"
#include "camsic/image.hpp"
#include "camsic/mim.hpp"
#include "camsic/transforms.hpp"
#include "camsic/weights.hpp"

namespace camsic {

enum class PriorMode : std::uint8_t {
  kContentAware = 0,
  /// Ablation: a single learned token stands in for every unestimated position.
  kConstantToken = 1,
};

struct CodecOptions {
  int steps = 0;  // 0 = the config's decode_steps
  PriorMode mode = PriorMode::kContentAware;
};

struct IterationRecord {
  int count = 0;                    // n_k
  std::vector<int> selected;        // raster order
  std::uint32_t context_digest = 0; // CRC of the model input (u and flags)
  double estimated_bits = 0.0;      // real-model cost of `selected`
  double table_bits = 0.0;          // quantized-table cost of `selected`
};

struct ViewLog {
  std::vector<IterationRecord> iterations;
  int forward_calls = 0;

  double estimated_bits() const;
  double table_bits() const;
};

struct ViewEncoding {
  Bytes payload;
  ViewLog log;
};

ViewEncoding encode_view(const LatentGrid& yhat, const Tensor& content, const WeightStore& weights, int steps);

LatentGrid decode_view(std::span<const std::uint8_t> payload, const Tensor& content, const WeightStore& weights,
                       int steps, int h, int w, ViewLog* log = nullptr);

/// Content-aware tokens for one view. `previous` is the dequantized latent of
/// the previously coded view, or nullptr for the first view.
Tensor view_content_tokens(const LatentGrid& hyper, const Tensor* previous, const WeightStore& weights,
                           PriorMode mode, int h, int w);

struct TwoStepRate {
  double content_bits = 0.0;    // R_c: positions with m = 1, context c only
  double composite_bits = 0.0;  // R_u: positions with m = 0, composite context
};

/// Training-style rate split for an arbitrary mask.
TwoStepRate two_step_rate(const LatentGrid& yhat, const Tensor& content, const MaskState& mask,
                          const WeightStore& weights);

// ---------------------------------------------------------------------------
// Container

inline constexpr std::uint16_t kBitstreamVersion = 1;

struct ViewPayload {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  Bytes hyper;
  Bytes main;
};

struct Bitstream {
  std::uint16_t version = kBitstreamVersion;
  PriorMode mode = PriorMode::kContentAware;
  std::uint8_t steps = 8;
  std::uint32_t digest = 0;
  std::array<ViewPayload, 2> views;
};

Bytes serialize_bitstream(const Bitstream& stream);
/// Validates magic, version, framing and CRC; does not touch the payloads.
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

/// Container bytes outside the four payloads.
std::size_t bitstream_overhead_bytes();

// ---------------------------------------------------------------------------
// Pair API

struct RdPoint {
  double bpp = 0.0;
  double psnr = 0.0;
  double bits_estimated = 0.0;
  std::int64_t bits_actual = 0;
};

struct PairEncoding {
  Bytes stream;
  Bitstream container;
  std::array<LatentGrid, 2> latents;
  std::array<LatentGrid, 2> hyper;
  std::array<ImagePlane, 2> reconstructions;  // on 8-bit levels, as written to PPM
  std::array<ViewLog, 2> logs;
  std::array<double, 2> hyper_bits_estimated{};
  std::size_t saturated = 0;
  RdPoint rd;
};

PairEncoding encode_pair(const ImagePlane& left, const ImagePlane& right, const WeightStore& weights,
                         const CodecOptions& options = {});

struct PairDecoding {
  std::array<ImagePlane, 2> images;  // on 8-bit levels
  std::array<LatentGrid, 2> latents;
  std::array<ViewLog, 2> logs;
};

/// Checks the weights digest before decoding anything.
PairDecoding decode_pair(std::span<const std::uint8_t> stream, const WeightStore& weights);

// ---------------------------------------------------------------------------
// Metrics

inline constexpr double kPsnrCap = 99.0;

/// 10*log10(1/MSE) over [0,1] values; identical images report kPsnrCap.
double psnr(const ImagePlane& a, const ImagePlane& b);

struct RdSample {
  double bpp = 0.0;
  double psnr = 0.0;
};

/// Bjontegaard delta rate of `test` against `anchor`, in percent.
double bd_rate(std::span<const RdSample> test, std::span<const RdSample> anchor);
/// Bjontegaard delta PSNR of `test` against `anchor`, in dB.
double bd_psnr(std::span<const RdSample> test, std::span<const RdSample> anchor);

}  // namespace camsic
