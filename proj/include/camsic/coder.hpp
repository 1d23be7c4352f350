#pragma once

// Entropy coding: Gaussian-conditional probabilities, 16-bit quantized CDF
// tables, a byte-renormalizing range coder and the factorized hyper-latent
// coder.
//
// Range coder payload layout: the bytes shifted out of the top of `low`,
// most significant first, with the always-zero leading byte omitted. The
// decoder consumes exactly the bytes the encoder produced; any shortfall is
// a truncation error and any excess a decode error.

#include <cstdint>
#include <span>
#include <vector>

#include "camsic/bytes.hpp"
#include "camsic/entropy_model.hpp"
#include "camsic/transforms.hpp"

namespace camsic {

inline constexpr int kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

/// P(s) = Phi((s+1/2-mu)/sigma) - Phi((s-1/2-mu)/sigma); the two boundary
/// symbols absorb the tails beyond the alphabet.
double gaussian_pmf(double mu, double sigma, int symbol, int symbol_min, int symbol_max);

/// Cumulative counts over an alphabet, totalling kCdfTotal, every symbol >= 1.
struct CdfTable {
  int symbol_min = 0;
  std::vector<std::uint32_t> cum;  // alphabet + 1 entries, cum[0] = 0

  int alphabet() const { return static_cast<int>(cum.size()) - 1; }
  std::uint32_t low(int symbol) const { return cum[std::size_t(symbol - symbol_min)]; }
  std::uint32_t freq(int symbol) const {
    const auto i = std::size_t(symbol - symbol_min);
    return cum[i + 1] - cum[i];
  }
  /// -log2(freq / 2^16).
  double bits(int symbol) const;
};

/// Floors pmf * 2^16 with a minimum count of 1; hands any deficit to the
/// largest remainders (ties to the lower symbol) and takes any surplus from
/// the largest counts.
CdfTable build_cdf_from_pmf(std::span<const double> pmf, int symbol_min);
CdfTable build_cdf(double mu, double sigma, int symbol_min, int symbol_max);

class RangeEncoder {
 public:
  void encode(const CdfTable& table, int symbol);
  /// Flushes and returns the payload; the encoder is spent afterwards.
  Bytes finish();

 private:
  void shift_low();
  void emit(std::uint8_t byte);

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool leading_ = true;
  Bytes out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);
  int decode(const CdfTable& table);
  /// Raises kDecode unless every payload byte was consumed.
  void finish() const;

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

Bytes range_encode(std::span<const int> symbols, std::span<const CdfTable> tables);
std::vector<int> range_decode(std::span<const std::uint8_t> payload, std::span<const CdfTable> tables);

/// Hyper-latent coding: channel c uses a zero-mean Gaussian with scale
/// scales[c]; tokens in raster order, channels in order within a token.
Bytes factorized_encode(const LatentGrid& z, const Tensor& scales, const ModelConfig& config);
LatentGrid factorized_decode(std::span<const std::uint8_t> payload, const Tensor& scales, int h, int w,
                             const ModelConfig& config);
/// Quantized-table cost of `z` in bits.
double factorized_bits(const LatentGrid& z, const Tensor& scales, const ModelConfig& config);

/// Real-valued model cost of the tokens in `subset`.
double cross_entropy_bits(const GaussianField& field, const LatentGrid& yhat, std::span<const int> subset,
                          const ModelConfig& config);

}  // namespace camsic
