#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "camsic/coder.hpp"
#include "camsic/error.hpp"
#include "test_support.hpp"

using namespace camsic;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kComputation;
}

const ModelConfig kDesk = ModelConfig::desk();

struct Stream {
  std::vector<CdfTable> tables;
  std::vector<int> symbols;
  std::vector<double> mus, sigmas;
  double table_bits = 0.0;
};

Stream random_stream(std::size_t n, std::uint64_t seed, double max_sigma = 256.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-30.0, 30.0), ls(std::log(0.11), std::log(max_sigma));
  Stream s;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mu(rng), sg = std::exp(ls(rng));
    s.tables.push_back(build_cdf(m, sg, -128, 127));
    std::normal_distribution<double> draw(m, sg);
    const int sym = std::clamp(int(std::lround(draw(rng))), -128, 127);
    s.symbols.push_back(sym);
    s.mus.push_back(m);
    s.sigmas.push_back(sg);
    s.table_bits += s.tables.back().bits(sym);
  }
  return s;
}

}  // namespace

TEST(GaussianPmf, UnitSigmaAtMean) {
  EXPECT_NEAR(gaussian_pmf(0.0, 1.0, 0, -128, 127), 0.382925, 1e-6);
}

TEST(GaussianPmf, SymmetricAboutZeroMean) {
  for (int s = 1; s < 40; ++s) {
    EXPECT_DOUBLE_EQ(gaussian_pmf(0.0, 3.7, s, -128, 127), gaussian_pmf(0.0, 3.7, -s, -128, 127));
  }
  EXPECT_DOUBLE_EQ(gaussian_pmf(0.0, 3.7, 127, -127, 127), gaussian_pmf(0.0, 3.7, -127, -127, 127));
}

TEST(GaussianPmf, SumsToOneWithTailAbsorption) {
  for (double mu : {0.0, -127.6, 5.3, 200.0}) {
    for (double sigma : {0.11, 1.0, 40.0, 256.0}) {
      double sum = 0.0;
      for (int s = -128; s <= 127; ++s) sum += gaussian_pmf(mu, sigma, s, -128, 127);
      EXPECT_NEAR(sum, 1.0, 1e-12) << mu << " " << sigma;
    }
  }
}

TEST(GaussianPmf, BoundarySymbolsAbsorbTails) {
  // Mean far outside the alphabet puts nearly everything on the edge symbol.
  EXPECT_GT(gaussian_pmf(500.0, 1.0, 127, -128, 127), 0.999999);
  EXPECT_GT(gaussian_pmf(-500.0, 1.0, -128, -128, 127), 0.999999);
  EXPECT_GT(gaussian_pmf(0.0, 1.0, 60, -128, 127), 0.0);
}

TEST(BuildCdf, UniformPmfGivesEqualCounts) {
  const std::vector<double> pmf(256, 1.0 / 256);
  const CdfTable t = build_cdf_from_pmf(pmf, -128);
  for (int s = -128; s <= 127; ++s) EXPECT_EQ(t.freq(s), 256u);
  EXPECT_EQ(t.cum.back(), kCdfTotal);
}

TEST(BuildCdf, DegenerateKeepsEverySymbolCodable) {
  const CdfTable t = build_cdf(3.0, 0.11, -128, 127);
  EXPECT_EQ(t.freq(3), kCdfTotal - 255);
  for (int s = -128; s <= 127; ++s) EXPECT_GE(t.freq(s), 1u);
}

TEST(BuildCdf, DeficitGoesToLargestRemainders) {
  // floor: 21845 each, remainders .3333.. equal; ties to lower index.
  const std::vector<double> pmf(3, 1.0 / 3);
  const CdfTable t = build_cdf_from_pmf(pmf, 0);
  EXPECT_EQ(t.freq(0), 21846u);
  EXPECT_EQ(t.freq(1), 21845u);
  EXPECT_EQ(t.freq(2), 21845u);
  const std::vector<double> skew{0.5, 0.2500001, 0.2499999};
  const CdfTable u = build_cdf_from_pmf(skew, 0);
  EXPECT_EQ(u.freq(0), 32768u);
  EXPECT_EQ(u.freq(1) + u.freq(2), 32768u);
  EXPECT_GE(u.freq(1), u.freq(2));
}

TEST(BuildCdf, TotalsAlwaysFull) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mu(-300.0, 300.0), ls(std::log(0.11), std::log(256.0));
  for (int i = 0; i < 500; ++i) {
    const CdfTable t = build_cdf(mu(rng), std::exp(ls(rng)), -128, 127);
    ASSERT_EQ(t.cum.front(), 0u);
    ASSERT_EQ(t.cum.back(), kCdfTotal);
    for (int s = -128; s <= 127; ++s) ASSERT_GE(t.freq(s), 1u);
  }
}

TEST(RangeCoder, EmptyStreamIsFlushOnly) {
  const Bytes b = range_encode({}, {});
  EXPECT_LE(b.size(), 8u);
  EXPECT_TRUE(range_decode(b, {}).empty());
}

TEST(RangeCoder, RoundTripsRandomSequences) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Stream s = random_stream(300 + seed * 17, seed, seed % 2 ? 256.0 : 0.5);
    const Bytes b = range_encode(s.symbols, s.tables);
    ASSERT_EQ(range_decode(b, s.tables), s.symbols) << "seed " << seed;
  }
}

TEST(RangeCoder, CarryHeavyStreams) {
  // Always coding the top symbol of a near-certain table drives low towards
  // the top of its range, producing long 0xFF runs and carries.
  const CdfTable top = build_cdf(127.0, 0.11, -128, 127);
  const CdfTable bottom = build_cdf(-128.0, 0.11, -128, 127);
  std::vector<CdfTable> tables;
  std::vector<int> symbols;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    const bool hi = (rng() % 50) != 0;
    tables.push_back(hi ? top : bottom);
    symbols.push_back(rng() % 7 == 0 ? 0 : (hi ? 127 : -128));
  }
  EXPECT_EQ(range_decode(range_encode(symbols, tables), tables), symbols);
}

TEST(RangeCoder, KnownTableRateGap) {
  const CdfTable t = build_cdf(0.0, 2.0, -128, 127);
  std::vector<CdfTable> tables(1000, t);
  std::vector<int> symbols;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> draw(0.0, 2.0);
  double ideal = 0.0;
  for (int i = 0; i < 1000; ++i) {
    symbols.push_back(int(std::lround(draw(rng))));
    ideal += t.bits(symbols.back());
  }
  const double actual = 8.0 * double(range_encode(symbols, tables).size());
  EXPECT_LE(std::abs(actual - ideal), 64.0);
}

TEST(RangeCoder, OverheadAgainstQuantizedModel) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const Stream s = random_stream(5000, seed);
    const double actual = 8.0 * double(range_encode(s.symbols, s.tables).size());
    EXPECT_GE(actual, s.table_bits - 1.0);
    EXPECT_LE(actual - s.table_bits, 64.0);
  }
}

TEST(RangeCoder, TruncatedAndPaddedPayloadsAreErrors) {
  const Stream s = random_stream(400, 4);
  const Bytes b = range_encode(s.symbols, s.tables);
  const Bytes cut(b.begin(), b.end() - 3);
  EXPECT_EQ(code_of([&] { range_decode(cut, s.tables); }), ErrorCode::kTruncated);
  Bytes longer = b;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { range_decode(longer, s.tables); }), ErrorCode::kDecode);
  EXPECT_EQ(code_of([&] { range_decode(Bytes{1, 2}, s.tables); }), ErrorCode::kTruncated);
}

TEST(RangeCoder, TamperedPayloadNeverCrashes) {
  const Stream s = random_stream(600, 5);
  const Bytes good = range_encode(s.symbols, s.tables);
  int detected = 0;
  for (std::size_t i = 0; i < good.size(); i += 3) {
    Bytes bad = good;
    bad[i] ^= 0x40;
    try {
      if (range_decode(bad, s.tables) != s.symbols) ++detected;
    } catch (const Error&) {
      ++detected;
    }
  }
  EXPECT_GT(detected, 0);
}

TEST(RangeCoder, SymbolOutsideAlphabetIsParameterError) {
  RangeEncoder enc;
  const CdfTable t = build_cdf(0.0, 1.0, -4, 4);
  EXPECT_EQ(code_of([&] { enc.encode(t, 5); }), ErrorCode::kParameter);
}

TEST(Factorized, RoundTripsRandomHyperLatent) {
  const Tensor scales = camsic::testing::random_tensor({kDesk.hyper_dim}, 6, 0.2f, 30.0f);
  const LatentGrid z = camsic::testing::random_grid(3, 5, kDesk.hyper_dim, 7, 20);
  const Bytes b = factorized_encode(z, scales, kDesk);
  EXPECT_EQ(factorized_decode(b, scales, 3, 5, kDesk), z);
  EXPECT_LE(std::abs(8.0 * double(b.size()) - factorized_bits(z, scales, kDesk)), 64.0);
}

TEST(Factorized, WiderScaleCostsMoreForZeroSymbols) {
  const LatentGrid z(2, 2, 4);
  double prev = 0.0;
  for (float s : {0.3f, 1.0f, 4.0f, 20.0f}) {
    const double bits = factorized_bits(z, Tensor({4}, s), kDesk);
    EXPECT_GT(bits, prev);
    prev = bits;
  }
}

TEST(Factorized, ZeroLatentWithSmallScalesIsNearlyFree) {
  const LatentGrid z(4, 4, kDesk.hyper_dim);
  const Tensor scales({kDesk.hyper_dim}, 0.11f);
  EXPECT_LT(factorized_bits(z, scales, kDesk), 3.0);
  EXPECT_LE(factorized_encode(z, scales, kDesk).size(), 5u);
}

TEST(CrossEntropy, EmptyUnitAndAdditive) {
  GaussianField f{1, 3, 1, Tensor({1, 3, 1}), Tensor({1, 3, 1}, 1.0f)};
  LatentGrid y(1, 3, 1);
  y.symbols = {0, 2, -1};
  EXPECT_EQ(cross_entropy_bits(f, y, {}, kDesk), 0.0);
  const std::vector<int> first{0};
  const double p0 = 0.5 * (std::erfc(-0.5 / std::sqrt(2.0)) - std::erfc(0.5 / std::sqrt(2.0)));
  EXPECT_NEAR(cross_entropy_bits(f, y, first, kDesk), -std::log2(p0), 1e-9);
  EXPECT_NEAR(cross_entropy_bits(f, y, first, kDesk), 1.3853, 1e-3);
  const std::vector<int> a{0, 2}, b{1}, all{0, 1, 2};
  EXPECT_NEAR(cross_entropy_bits(f, y, a, kDesk) + cross_entropy_bits(f, y, b, kDesk),
              cross_entropy_bits(f, y, all, kDesk), 1e-12);
}

TEST(CrossEntropy, QuantizedTablesStayCloseToModel) {
  const Stream s = random_stream(20000, 9);
  double model = 0.0;
  for (std::size_t i = 0; i < s.symbols.size(); ++i) {
    model -= std::log2(gaussian_pmf(s.mus[i], s.sigmas[i], s.symbols[i], -128, 127));
  }
  EXPECT_LE((s.table_bits - model) / double(s.symbols.size()), 0.01);
}
