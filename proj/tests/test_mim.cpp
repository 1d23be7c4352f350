#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "camsic/error.hpp"
#include "camsic/mim.hpp"
#include "test_support.hpp"

using namespace camsic;
using camsic::testing::random_tensor;

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

// Cumulative counts in extended precision, for comparison against the
// double-precision library version.
std::vector<int> oracle_counts(int n, int k) {
  const long double pi = 3.141592653589793238462643383279502884L;
  std::vector<int> out;
  long prev = 0;
  for (int i = 1; i <= k; ++i) {
    const long cum = i == k ? n : std::lround(std::sin((long double)i / k * pi / 2) * n);
    out.push_back(int(cum - prev));
    prev = cum;
  }
  return out;
}

GaussianField field_with_sigmas(std::vector<float> sigmas, int d = 1) {
  const int n = int(sigmas.size()) / d;
  GaussianField f{1, n, d, Tensor({1, n, d}), Tensor({1, n, d}, std::move(sigmas))};
  return f;
}

}  // namespace

TEST(Schedule, ZeroTokens) {
  EXPECT_EQ(schedule_counts(0, 8).counts, std::vector<int>(8, 0));
}

TEST(Schedule, SingleStepCodesEverything) {
  EXPECT_EQ(schedule_counts(37, 1).counts, std::vector<int>{37});
}

TEST(Schedule, SixtyFourTokensEightSteps) {
  const std::vector<int> frozen{12, 12, 12, 9, 8, 6, 4, 1};
  EXPECT_EQ(oracle_counts(64, 8), frozen);
  EXPECT_EQ(schedule_counts(64, 8).counts, frozen);
}

TEST(Schedule, SingleTokenEightSteps) {
  // sin(3pi/16) = 0.556 is the first ratio that rounds to one token.
  EXPECT_EQ(schedule_counts(1, 8).counts, (std::vector<int>{0, 0, 1, 0, 0, 0, 0, 0}));
}

TEST(Schedule, SumsAndMonotoneEverywhere) {
  for (int n = 0; n <= 512; ++n)
    for (int k = 1; k <= 16; ++k) {
      const Schedule s = schedule_counts(n, k);
      ASSERT_EQ(int(s.counts.size()), k);
      int sum = 0;
      for (int c : s.counts) {
        ASSERT_GE(c, 0);
        sum += c;
      }
      ASSERT_EQ(sum, n) << n << "," << k;
      ASSERT_EQ(s.counts, oracle_counts(n, k)) << n << "," << k;
    }
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_EQ(code_of([] { schedule_counts(-1, 8); }), ErrorCode::kParameter);
  EXPECT_EQ(code_of([] { schedule_counts(4, 0); }), ErrorCode::kParameter);
}

TEST(ComposeContext, SelectsExactlyByMask) {
  const Tensor y = random_tensor({2, 3, 4}, 1), c = random_tensor({2, 3, 4}, 2);
  EXPECT_EQ(compose_context(y, c, MaskState{std::vector<std::uint8_t>(6, 1), 8}), y);
  EXPECT_EQ(compose_context(y, c, MaskState::empty(6)), c);
  MaskState one = MaskState::empty(6);
  one.m[4] = 1;
  const Tensor u = compose_context(y, c, one);
  for (int i = 0; i < 24; ++i) EXPECT_EQ(u[i], i / 4 == 4 ? y[i] : c[i]);
}

TEST(ComposeContext, ExtentMismatchIsDimensionError) {
  EXPECT_EQ(code_of([] { compose_context(Tensor({2, 2, 3}), Tensor({2, 3, 3}), MaskState::empty(4)); }),
            ErrorCode::kDimension);
  EXPECT_EQ(code_of([] { compose_context(Tensor({2, 2, 3}), Tensor({2, 2, 3}), MaskState::empty(5)); }),
            ErrorCode::kDimension);
}

TEST(TokenEntropy, UnitSigma) {
  // Phi(0.5) - Phi(-0.5) = 0.382925
  const double p = 0.5 * (std::erfc(-0.5 / std::sqrt(2.0)) - std::erfc(0.5 / std::sqrt(2.0)));
  EXPECT_NEAR(p, 0.382925, 1e-6);
  const auto h = token_entropy(field_with_sigmas({1.0f}));
  EXPECT_NEAR(h[0], -std::log2(p), 1e-9);
  EXPECT_NEAR(h[0], 1.3853, 1e-3);
}

TEST(TokenEntropy, IndependentOfMean) {
  GaussianField f = field_with_sigmas({1.0f, 1.0f});
  f.mu[1] = 17.25f;
  const auto h = token_entropy(f);
  EXPECT_EQ(h[0], h[1]);
}

TEST(TokenEntropy, SmallestSigma) {
  const auto h = token_entropy(field_with_sigmas({0.11f}));
  const double p = 1.0 - std::erfc(0.5 / 0.11f / std::sqrt(2.0));
  EXPECT_NEAR(h[0], -std::log2(p), 1e-12);
  EXPECT_NEAR(h[0], 7.9084e-6, 1e-9);  // frozen oracle value
}

TEST(TokenEntropy, MonotoneInSigmaAndAdditiveOverChannels) {
  const auto h = token_entropy(field_with_sigmas({0.2f, 0.5f, 1.0f, 4.0f, 50.0f}));
  for (int i = 1; i < 5; ++i) EXPECT_GT(h[i], h[i - 1]);
  const auto two = token_entropy(field_with_sigmas({0.5f, 4.0f}, 2));
  EXPECT_NEAR(two[0], h[1] + h[3], 1e-12);
}

TEST(SelectTokens, SmallestEntropyReturnedInRasterOrder) {
  const std::vector<double> e{3.0, 1.0, 2.0};
  EXPECT_EQ(select_tokens(e, MaskState::empty(3), 2), (std::vector<int>{1, 2}));
}

TEST(SelectTokens, TiesGoToLowerIndex) {
  const std::vector<double> e(6, 0.5);
  EXPECT_EQ(select_tokens(e, MaskState::empty(6), 3), (std::vector<int>{0, 1, 2}));
}

TEST(SelectTokens, SkipsEstimatedPositions) {
  const std::vector<double> e{0.1, 5.0, 0.2, 4.0, 3.0};
  MaskState m = MaskState::empty(5);
  m.m[0] = m.m[2] = 1;
  EXPECT_EQ(select_tokens(e, m, 1), (std::vector<int>{4}));
  EXPECT_EQ(select_tokens(e, m, 3), (std::vector<int>{1, 3, 4}));
}

TEST(SelectTokens, TooManyIsScheduleError) {
  const std::vector<double> e(4, 1.0);
  MaskState m = MaskState::empty(4);
  m.m[1] = 1;
  EXPECT_EQ(code_of([&] { select_tokens(e, m, 4); }), ErrorCode::kSchedule);
}

TEST(Advance, MarksAndCounts) {
  MaskState m = MaskState::empty(4);
  const std::vector<int> none;
  m = camsic::advance(m, none);
  EXPECT_EQ(m.k, 1);
  EXPECT_EQ(m.estimated(), 0);
  const std::vector<int> all{0, 1, 2, 3};
  m = camsic::advance(m, all);
  EXPECT_TRUE(m.full());
  EXPECT_EQ(m.k, 2);
}

TEST(Advance, DoubleSelectIsProtocolError) {
  MaskState m = MaskState::empty(3);
  const std::vector<int> first{1};
  m = camsic::advance(m, first);
  EXPECT_EQ(code_of([&] { camsic::advance(m, first); }), ErrorCode::kProtocol);
  const std::vector<int> twice{0, 0};
  EXPECT_EQ(code_of([&] { camsic::advance(MaskState::empty(3), twice); }), ErrorCode::kProtocol);
}

TEST(Advance, MaskIsMonotoneThroughASchedule) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const int n = 50;
  MaskState m = MaskState::empty(n);
  for (int count : schedule_counts(n, 8).counts) {
    std::vector<double> e(n);
    for (auto& v : e) v = u(rng);
    const MaskState next = camsic::advance(m, select_tokens(e, m, count));
    for (int i = 0; i < n; ++i)
      if (m.m[std::size_t(i)]) {
        ASSERT_TRUE(next.m[std::size_t(i)]);
      }
    EXPECT_EQ(next.estimated(), m.estimated() + count);
    m = next;
  }
  EXPECT_TRUE(m.full());
  EXPECT_EQ(m.k, 8);
}
