#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <functional>

#include "camsic/error.hpp"
#include "camsic/kernels.hpp"
#include "test_support.hpp"

using camsic::ErrorCode;
using camsic::Tensor;
using camsic::testing::random_tensor;
namespace nn = camsic::nn;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const camsic::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kComputation;
}

// Scatter-form oracles, written independently of the library's gather loops.
std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int s, int p) {
  const auto ci = x.dim(0), H = x.dim(1), W = x.dim(2), co = w.dim(0), k = w.dim(2);
  const auto oh = (H + 2 * p - k) / s + 1, ow = (W + 2 * p - k) / s + 1;
  std::vector<double> out(std::size_t(co * oh * ow), 0.0);
  for (int o = 0; o < co; ++o)
    for (int y = 0; y < oh; ++y)
      for (int xo = 0; xo < ow; ++xo) {
        double acc = b.empty() ? 0.0 : b[o];
        for (int c = 0; c < ci; ++c)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const long iy = y * s + ky - p, ix = xo * s + kx - p;
              if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
              acc += double(x[(c * H + iy) * W + ix]) * w[((o * ci + c) * k + ky) * k + kx];
            }
        out[std::size_t((o * oh + y) * ow + xo)] = acc;
      }
  return out;
}

std::vector<double> naive_deconv(const Tensor& x, const Tensor& w, const Tensor& b, int s, int p, int op) {
  const auto ci = x.dim(0), H = x.dim(1), W = x.dim(2), co = w.dim(1), k = w.dim(2);
  const auto oh = (H - 1) * s - 2 * p + k + op, ow = (W - 1) * s - 2 * p + k + op;
  std::vector<double> out(std::size_t(co * oh * ow), 0.0);
  for (int c = 0; c < ci; ++c)
    for (int y = 0; y < H; ++y)
      for (int xi = 0; xi < W; ++xi)
        for (int o = 0; o < co; ++o)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const long oy = y * s + ky - p, ox = xi * s + kx - p;
              if (oy < 0 || ox < 0 || oy >= oh || ox >= ow) continue;
              out[std::size_t((o * oh + oy) * ow + ox)] +=
                  double(x[(c * H + y) * W + xi]) * w[((c * co + o) * k + ky) * k + kx];
            }
  for (int o = 0; o < co; ++o)
    for (long i = 0; i < oh * ow; ++i) out[std::size_t(o * oh * ow + i)] += b.empty() ? 0.0 : b[o];
  return out;
}

void expect_close(const Tensor& got, const std::vector<double>& want, double rel) {
  ASSERT_EQ(got.numel(), std::int64_t(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(got[std::int64_t(i)], want[i], rel * std::max(1.0, std::abs(want[i]))) << "at " << i;
  }
}

template <class Fn>
void expect_thread_invariant(Fn fn) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Tensor base = fn();
  for (int threads : {2, 3, 4, 7}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(fn(), base) << threads << " threads";
  }
  omp_set_num_threads(saved);
}

}  // namespace

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0f;
  const Tensor x = random_tensor({3, 5}, 1);
  EXPECT_EQ(nn::matmul(eye, x), x);
  EXPECT_EQ(nn::reference::matmul(eye, x), x);
}

TEST(Matmul, HandComputedProduct) {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 1}, {1, 1});
  EXPECT_EQ(nn::matmul(a, b), Tensor({2, 1}, {3, 7}));
}

TEST(Matmul, ZeroRowAnnihilates) {
  const Tensor z({1, 6});
  const Tensor b = random_tensor({6, 4}, 2);
  EXPECT_EQ(nn::matmul(z, b), Tensor({1, 4}));
}

TEST(Matmul, InnerExtentMismatchIsDimensionError) {
  EXPECT_EQ(code_of([] { nn::matmul(Tensor({2, 3}), Tensor({2, 3})); }), ErrorCode::kDimension);
}

TEST(Linear, MatchesMatmulWithTransposedWeight) {
  const Tensor x = random_tensor({5, 4}, 3), w = random_tensor({3, 4}, 4), b = random_tensor({3}, 5);
  const Tensor y = nn::linear(x, w, b);
  for (int n = 0; n < 5; ++n)
    for (int o = 0; o < 3; ++o) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i) acc += double(x[n * 4 + i]) * w[o * 4 + i];
      EXPECT_FLOAT_EQ(y[n * 3 + o], float(acc + b[o]));
    }
}

TEST(Conv2d, UnitKernelIsIdentity) {
  const Tensor x = random_tensor({1, 5, 5}, 6);
  const Tensor w({1, 1, 1, 1}, 1.0f);
  EXPECT_EQ(nn::conv2d(x, w, Tensor(), 1, 0), x);
}

TEST(Conv2d, AllOnesCentreSumsNine) {
  const Tensor x({1, 3, 3}, 1.0f), w({1, 1, 3, 3}, 1.0f);
  const Tensor y = nn::conv2d(x, w, Tensor(), 1, 1);
  EXPECT_EQ(y[4], 9.0f);
  EXPECT_EQ(y[0], 4.0f);
}

TEST(Conv2d, StrideTwoHalvesExtents) {
  const Tensor y = nn::conv2d(Tensor({2, 8, 8}), Tensor({3, 2, 3, 3}), Tensor(), 2, 1);
  EXPECT_EQ(y.shape(), (camsic::Shape{3, 4, 4}));
}

TEST(Conv2d, NonPositiveStrideIsParameterError) {
  EXPECT_EQ(code_of([] { nn::conv2d(Tensor({1, 4, 4}), Tensor({1, 1, 3, 3}), Tensor(), 0, 1); }),
            ErrorCode::kParameter);
  EXPECT_EQ(code_of([] { nn::reference::conv2d(Tensor({1, 4, 4}), Tensor({1, 1, 3, 3}), Tensor(), -1, 1); }),
            ErrorCode::kParameter);
}

TEST(Conv2d, ChannelMismatchIsDimensionError) {
  EXPECT_EQ(code_of([] { nn::conv2d(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor(), 1, 1); }),
            ErrorCode::kDimension);
}

TEST(Conv2d, AgreesWithNaiveOracleOnRandomInput) {
  for (int s : {1, 2}) {
    const Tensor x = random_tensor({3, 8, 8}, 10 + s), w = random_tensor({4, 3, 5, 5}, 20 + s),
                 b = random_tensor({4}, 30 + s);
    expect_close(nn::conv2d(x, w, b, s, 2), naive_conv(x, w, b, s, 2), 1e-6);
    expect_close(nn::reference::conv2d(x, w, b, s, 2), naive_conv(x, w, b, s, 2), 1e-6);
  }
}

TEST(ConvTranspose2d, AgreesWithScatterOracle) {
  const Tensor x = random_tensor({3, 4, 5}, 40), w = random_tensor({3, 2, 5, 5}, 41), b = random_tensor({2}, 42);
  const Tensor y = nn::conv_transpose2d(x, w, b, 2, 2, 1);
  EXPECT_EQ(y.shape(), (camsic::Shape{2, 8, 10}));
  expect_close(y, naive_deconv(x, w, b, 2, 2, 1), 1e-6);
  expect_close(nn::reference::conv_transpose2d(x, w, b, 2, 2, 1), naive_deconv(x, w, b, 2, 2, 1), 1e-6);
}

TEST(LayerNorm, ConstantVectorMapsToZero) {
  const Tensor y = nn::layer_norm(Tensor({2, 4}, 3.5f), Tensor({4}, 1.0f), Tensor({4}));
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(LayerNorm, TwoPointExample) {
  const Tensor y = nn::layer_norm(Tensor({2}, {1, 3}), Tensor({2}, 1.0f), Tensor({2}), 1e-12);
  EXPECT_NEAR(y[0], -1.0f, 1e-6);
  EXPECT_NEAR(y[1], 1.0f, 1e-6);
}

TEST(LayerNorm, OutputMomentsFollowGainAndBias) {
  const Tensor x = random_tensor({1, 256}, 50, -3.0f, 5.0f);
  const Tensor y = nn::layer_norm(x, Tensor({256}, -2.0f), Tensor({256}, 0.75f));
  double mean = 0.0, sq = 0.0;
  for (float v : y.data()) mean += v;
  mean /= 256;
  for (float v : y.data()) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.75, 1e-5);
  EXPECT_NEAR(std::sqrt(sq / 256), 2.0, 1e-3);
}

TEST(LayerNorm, RejectsEmptyAxisAndBadEps) {
  EXPECT_EQ(code_of([] { nn::layer_norm(Tensor({2, 0}), Tensor({0}), Tensor({0})); }), ErrorCode::kDimension);
  EXPECT_EQ(code_of([] { nn::layer_norm(Tensor({2}), Tensor({2}), Tensor({2}), 0.0); }), ErrorCode::kParameter);
}

TEST(Softmax, UniformInput) {
  const Tensor y = nn::softmax(Tensor({1, 4}, 2.0f));
  for (float v : y.data()) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(Softmax, LogThreeExample) {
  const Tensor y = nn::softmax(Tensor({2}, {0.0f, float(std::log(3.0))}));
  EXPECT_NEAR(y[0], 0.25, 1e-7);
  EXPECT_NEAR(y[1], 0.75, 1e-7);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  const Tensor x = random_tensor({3, 7}, 60, -4.0f, 4.0f);
  Tensor shifted = x;
  for (auto& v : shifted.data()) v += 100.0f;
  const Tensor a = nn::softmax(x), b = nn::softmax(shifted);
  for (int r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 7; ++c) {
      sum += a[r * 7 + c];
      EXPECT_NEAR(a[r * 7 + c], b[r * 7 + c], 2e-6);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Activations, GeluAndLeakyReluValues) {
  const Tensor x({4}, {-2.0f, 0.0f, 1.0f, 3.0f});
  const Tensor g = nn::gelu(x);
  EXPECT_NEAR(g[0], -0.0455003, 1e-6);
  EXPECT_EQ(g[1], 0.0f);
  EXPECT_NEAR(g[2], 0.8413447, 1e-6);
  const Tensor l = nn::leaky_relu(x);
  EXPECT_FLOAT_EQ(l[0], -0.02f);
  EXPECT_EQ(l[3], 3.0f);
}

TEST(Kernels, FiniteOnFiniteInput) {
  const Tensor x = random_tensor({4, 9, 9}, 70, -50.0f, 50.0f);
  EXPECT_TRUE(nn::conv2d(x, random_tensor({2, 4, 3, 3}, 71), Tensor(), 1, 1).all_finite());
  EXPECT_TRUE(nn::softmax(x).all_finite());
  EXPECT_TRUE(nn::gelu(x).all_finite());
  EXPECT_TRUE(nn::layer_norm(x, Tensor({9}, 1.0f), Tensor({9})).all_finite());
}

// The OpenMP kernels must match the serial reference bit for bit, for any
// thread count.
TEST(Parallel, MatchesReferenceBitForBit) {
  const Tensor x = random_tensor({5, 13, 11}, 80), w = random_tensor({6, 5, 5, 5}, 81), b = random_tensor({6}, 82);
  EXPECT_EQ(nn::conv2d(x, w, b, 2, 2), nn::reference::conv2d(x, w, b, 2, 2));
  EXPECT_EQ(nn::conv2d(x, w, b, 1, 2), nn::reference::conv2d(x, w, b, 1, 2));
  const Tensor wt = random_tensor({5, 3, 5, 5}, 83), bt = random_tensor({3}, 84);
  EXPECT_EQ(nn::conv_transpose2d(x, wt, bt, 2, 2, 1), nn::reference::conv_transpose2d(x, wt, bt, 2, 2, 1));
  const Tensor a = random_tensor({17, 33}, 85), m = random_tensor({33, 9}, 86);
  EXPECT_EQ(nn::matmul(a, m), nn::reference::matmul(a, m));
  const Tensor lw = random_tensor({12, 33}, 87), lb = random_tensor({12}, 88);
  EXPECT_EQ(nn::linear(a, lw, lb), nn::reference::linear(a, lw, lb));
  const Tensor g = random_tensor({33}, 89), gb = random_tensor({33}, 90);
  EXPECT_EQ(nn::layer_norm(a, g, gb), nn::reference::layer_norm(a, g, gb));
  EXPECT_EQ(nn::softmax(a), nn::reference::softmax(a));
  EXPECT_EQ(nn::gelu(a), nn::reference::gelu(a));
  EXPECT_EQ(nn::leaky_relu(a), nn::reference::leaky_relu(a));
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  const Tensor x = random_tensor({8, 16, 16}, 91), w = random_tensor({8, 8, 5, 5}, 92), b = random_tensor({8}, 93);
  expect_thread_invariant([&] { return nn::conv2d(x, w, b, 2, 2); });
  expect_thread_invariant([&] { return nn::conv_transpose2d(x, w, b, 2, 2, 1); });
  const Tensor a = random_tensor({40, 64}, 94), lw = random_tensor({64, 64}, 95);
  expect_thread_invariant([&] { return nn::linear(a, lw, Tensor()); });
  expect_thread_invariant([&] { return nn::matmul(a, lw); });
  expect_thread_invariant([&] { return nn::layer_norm(a, Tensor({64}, 1.0f), Tensor({64})); });
}

TEST(TensorLayout, PlanesTokensRoundTrip) {
  const Tensor chw = random_tensor({3, 4, 5}, 96);
  const Tensor hwc = camsic::planes_to_tokens(chw);
  EXPECT_EQ(hwc.shape(), (camsic::Shape{4, 5, 3}));
  EXPECT_EQ(hwc[(2 * 5 + 3) * 3 + 1], chw[(1 * 4 + 2) * 5 + 3]);
  EXPECT_EQ(camsic::tokens_to_planes(hwc), chw);
}

TEST(TensorLayout, ShapeValueCountMismatchIsDimensionError) {
  EXPECT_EQ(code_of([] { Tensor({2, 2}, std::vector<float>{1, 2, 3}); }), ErrorCode::kDimension);
  EXPECT_EQ(code_of([] { Tensor({1, 1, 1, 1, 1}); }), ErrorCode::kDimension);
}
