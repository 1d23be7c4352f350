#include "camsic/coder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace camsic {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

void check_symbol(const CdfTable& table, int symbol) {
  if (symbol < table.symbol_min || symbol >= table.symbol_min + table.alphabet()) {
    fail(ErrorCode::kParameter, "symbol " + std::to_string(symbol) + " outside the alphabet");
  }
}

double sigma_of(const Tensor& scales, int channel, const ModelConfig& config) {
  return std::clamp(double(scales[channel]), config.sigma_min, config.sigma_max);
}

std::vector<CdfTable> channel_tables(const Tensor& scales, const ModelConfig& config) {
  std::vector<CdfTable> tables;
  tables.reserve(std::size_t(scales.numel()));
  for (int c = 0; c < scales.numel(); ++c) {
    tables.push_back(build_cdf(0.0, sigma_of(scales, c, config), config.symbol_min, config.symbol_max));
  }
  return tables;
}

}  // namespace

double gaussian_pmf(double mu, double sigma, int symbol, int symbol_min, int symbol_max) {
  const bool lowest = symbol <= symbol_min;
  const bool highest = symbol >= symbol_max;
  const double a = (symbol - 0.5 - mu) / sigma;
  const double b = (symbol + 0.5 - mu) / sigma;
  // Pick the form that subtracts the smaller tail masses.
  double p;
  if (!lowest && a >= 0.0) {
    p = upper_tail(a) - (highest ? 0.0 : upper_tail(b));
  } else if (!highest && b <= 0.0) {
    p = phi(b) - (lowest ? 0.0 : phi(a));
  } else {
    p = 1.0 - (lowest ? 0.0 : phi(a)) - (highest ? 0.0 : upper_tail(b));
  }
  return std::max(p, std::numeric_limits<double>::min());
}

double CdfTable::bits(int symbol) const { return -std::log2(double(freq(symbol)) / double(kCdfTotal)); }

CdfTable build_cdf_from_pmf(std::span<const double> pmf, int symbol_min) {
  const auto n = pmf.size();
  if (n == 0 || n >= kCdfTotal) fail(ErrorCode::kParameter, "alphabet size unsupported by 16-bit tables");
  std::vector<std::int64_t> count(n);
  std::vector<double> remainder(n);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = std::max(pmf[i], 0.0) * double(kCdfTotal);
    const auto fl = static_cast<std::int64_t>(std::floor(scaled));
    count[i] = std::max<std::int64_t>(fl, 1);
    remainder[i] = scaled - double(count[i]);
    total += count[i];
  }
  std::int64_t diff = std::int64_t(kCdfTotal) - total;
  if (diff > 0) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    // diff < n because every floor loses less than one count.
    for (std::size_t i = 0; diff > 0; i = (i + 1) % n, --diff) ++count[order[i]];
  }
  while (diff < 0) {
    const auto it = std::max_element(count.begin(), count.end());
    const auto take = std::min<std::int64_t>(-diff, *it - 1);
    *it -= take;
    diff += take;
  }
  CdfTable t;
  t.symbol_min = symbol_min;
  t.cum.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + static_cast<std::uint32_t>(count[i]);
  return t;
}

CdfTable build_cdf(double mu, double sigma, int symbol_min, int symbol_max) {
  std::vector<double> pmf(std::size_t(symbol_max - symbol_min + 1));
  for (int s = symbol_min; s <= symbol_max; ++s) {
    pmf[std::size_t(s - symbol_min)] = gaussian_pmf(mu, sigma, s, symbol_min, symbol_max);
  }
  return build_cdf_from_pmf(pmf, symbol_min);
}

// ---------------------------------------------------------------------------
// Range encoder with a 33-bit low register; pending 0xFF bytes wait in the
// cache until a carry is resolved, so emitted bytes are never revisited.

void RangeEncoder::emit(std::uint8_t byte) {
  if (leading_) {
    leading_ = false;  // first byte is always zero (low + range <= 2^32)
    return;
  }
  out_.push_back(byte);
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      emit(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(const CdfTable& table, int symbol) {
  check_symbol(table, symbol);
  const std::uint32_t r = range_ >> kCdfPrecisionBits;
  low_ += std::uint64_t(r) * table.low(symbol);
  range_ = r * table.freq(symbol);
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

Bytes RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : data_(payload) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= data_.size()) fail(ErrorCode::kTruncated, "range-coded payload ended early");
  return data_[pos_++];
}

int RangeDecoder::decode(const CdfTable& table) {
  const std::uint32_t r = range_ >> kCdfPrecisionBits;
  const std::uint32_t v = code_ / r;
  if (v >= kCdfTotal) fail(ErrorCode::kDecode, "range decoder state out of bounds");
  const auto it = std::upper_bound(table.cum.begin(), table.cum.end(), v);
  const auto idx = static_cast<int>(it - table.cum.begin()) - 1;
  const int symbol = table.symbol_min + idx;
  code_ -= r * table.cum[std::size_t(idx)];
  range_ = r * table.freq(symbol);
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return symbol;
}

void RangeDecoder::finish() const {
  if (pos_ != data_.size()) fail(ErrorCode::kDecode, "unconsumed bytes after range-coded payload");
}

Bytes range_encode(std::span<const int> symbols, std::span<const CdfTable> tables) {
  if (symbols.size() != tables.size()) fail(ErrorCode::kParameter, "one table per symbol required");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.encode(tables[i], symbols[i]);
  return enc.finish();
}

std::vector<int> range_decode(std::span<const std::uint8_t> payload, std::span<const CdfTable> tables) {
  RangeDecoder dec(payload);
  std::vector<int> out;
  out.reserve(tables.size());
  for (const auto& t : tables) out.push_back(dec.decode(t));
  dec.finish();
  return out;
}

Bytes factorized_encode(const LatentGrid& z, const Tensor& scales, const ModelConfig& config) {
  if (scales.numel() != z.d) fail(ErrorCode::kDimension, "one scale per hyper channel required");
  const auto tables = channel_tables(scales, config);
  RangeEncoder enc;
  for (int t = 0; t < z.tokens(); ++t)
    for (int c = 0; c < z.d; ++c) enc.encode(tables[std::size_t(c)], z.at(t, c));
  return enc.finish();
}

LatentGrid factorized_decode(std::span<const std::uint8_t> payload, const Tensor& scales, int h, int w,
                             const ModelConfig& config) {
  const int d = static_cast<int>(scales.numel());
  const auto tables = channel_tables(scales, config);
  LatentGrid z(h, w, d);
  RangeDecoder dec(payload);
  for (int t = 0; t < z.tokens(); ++t)
    for (int c = 0; c < d; ++c) z.at(t, c) = dec.decode(tables[std::size_t(c)]);
  dec.finish();
  return z;
}

double factorized_bits(const LatentGrid& z, const Tensor& scales, const ModelConfig& config) {
  const auto tables = channel_tables(scales, config);
  double bits = 0.0;
  for (int t = 0; t < z.tokens(); ++t)
    for (int c = 0; c < z.d; ++c) bits += tables[std::size_t(c)].bits(z.at(t, c));
  return bits;
}

double cross_entropy_bits(const GaussianField& field, const LatentGrid& yhat, std::span<const int> subset,
                          const ModelConfig& config) {
  if (field.h != yhat.h || field.w != yhat.w || field.d != yhat.d) {
    fail(ErrorCode::kDimension, "field and latent grid extents differ");
  }
  double bits = 0.0;
  for (int i : subset) {
    if (i < 0 || i >= yhat.tokens()) fail(ErrorCode::kParameter, "subset position out of range");
    for (int j = 0; j < yhat.d; ++j) {
      bits -= std::log2(gaussian_pmf(field.mu_at(i, j), field.sigma_at(i, j), yhat.at(i, j), config.symbol_min,
                                     config.symbol_max));
    }
  }
  return bits;
}

}  // namespace camsic
