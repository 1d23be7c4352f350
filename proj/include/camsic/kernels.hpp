#pragma once

// Dense kernels used by every network in the codec.
//
// All reductions accumulate in double and walk their reduction axis in a
// fixed ascending order, so results do not depend on the OpenMP thread
// count. float*float products are exact in double, so FMA contraction of the
// accumulation cannot change a result either.
//
// camsic::nn holds the OpenMP kernels used at runtime. camsic::nn::reference
// holds plain serial versions with the same contract; the tests require the
// two to agree bit for bit.

#include <cmath>

#include "camsic/tensor.hpp"

namespace camsic::nn {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr float kLeakySlope = 0.01f;

/// [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);

/// x [N,in], weight [out,in], bias [out] or empty -> [N,out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// x [Cin,H,W], weight [Cout,Cin,K,K] -> [Cout,H',W'] with zero padding.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int pad);

/// x [Cin,H,W], weight [Cin,Cout,K,K] (PyTorch layout).
/// H' = (H-1)*stride - 2*pad + K + output_pad.
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int pad, int output_pad);

/// Normalizes over the last axis using the population variance.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

/// Max-subtracted softmax over the last axis.
Tensor softmax(const Tensor& x);

/// Exact (erf) GELU.
Tensor gelu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, float slope = kLeakySlope);

namespace reference {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int pad);
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int pad, int output_pad);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);
Tensor softmax(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, float slope = kLeakySlope);

}  // namespace reference

// Shared argument checks; also used by the reference kernels.
namespace detail {

struct ConvGeometry {
  std::int64_t cin, cout, in_h, in_w, kernel, out_h, out_w;
};

ConvGeometry check_conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                          int pad);
ConvGeometry check_conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                                    int stride, int pad, int output_pad);
void check_linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
void check_matmul(const Tensor& a, const Tensor& b);
std::int64_t check_layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

inline float gelu_scalar(float v) {
  const double x = v;
  return static_cast<float>(0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440)));
}

}  // namespace detail
}  // namespace camsic::nn
