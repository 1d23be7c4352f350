#include "camsic/kernels.hpp"

namespace camsic::nn::detail {

void check_matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, ErrorCode::kDimension, "matmul expects rank-2 operands");
  if (a.dim(1) != b.dim(0)) {
    fail(ErrorCode::kDimension,
         "matmul inner extents differ: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
}

void check_linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(x.rank() == 2 && weight.rank() == 2, ErrorCode::kDimension,
          "linear expects x [N,in] and weight [out,in]");
  if (x.dim(1) != weight.dim(1)) {
    fail(ErrorCode::kDimension, "linear input width " + std::to_string(x.dim(1)) +
                                    " does not match weight " + shape_string(weight.shape()));
  }
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != weight.dim(0))) {
    fail(ErrorCode::kDimension, "linear bias extent mismatch");
  }
}

ConvGeometry check_conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                          int pad) {
  if (stride <= 0) fail(ErrorCode::kParameter, "conv2d stride must be positive");
  if (pad < 0) fail(ErrorCode::kParameter, "conv2d padding must be non-negative");
  require(x.rank() == 3 && weight.rank() == 4, ErrorCode::kDimension,
          "conv2d expects x [C,H,W] and weight [Cout,Cin,K,K]");
  ConvGeometry g{};
  g.cin = x.dim(0);
  g.in_h = x.dim(1);
  g.in_w = x.dim(2);
  g.cout = weight.dim(0);
  g.kernel = weight.dim(2);
  if (weight.dim(1) != g.cin) fail(ErrorCode::kDimension, "conv2d input channel mismatch");
  if (weight.dim(3) != g.kernel) fail(ErrorCode::kDimension, "conv2d kernel must be square");
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != g.cout)) {
    fail(ErrorCode::kDimension, "conv2d bias extent mismatch");
  }
  const auto span_h = g.in_h + 2 * pad - g.kernel;
  const auto span_w = g.in_w + 2 * pad - g.kernel;
  if (span_h < 0 || span_w < 0) fail(ErrorCode::kDimension, "conv2d kernel larger than padded input");
  g.out_h = span_h / stride + 1;
  g.out_w = span_w / stride + 1;
  return g;
}

ConvGeometry check_conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                                    int stride, int pad, int output_pad) {
  if (stride <= 0) fail(ErrorCode::kParameter, "conv_transpose2d stride must be positive");
  if (pad < 0 || output_pad < 0 || output_pad >= stride) {
    fail(ErrorCode::kParameter, "conv_transpose2d padding out of range");
  }
  require(x.rank() == 3 && weight.rank() == 4, ErrorCode::kDimension,
          "conv_transpose2d expects x [Cin,H,W] and weight [Cin,Cout,K,K]");
  ConvGeometry g{};
  g.cin = x.dim(0);
  g.in_h = x.dim(1);
  g.in_w = x.dim(2);
  g.cout = weight.dim(1);
  g.kernel = weight.dim(2);
  if (weight.dim(0) != g.cin) fail(ErrorCode::kDimension, "conv_transpose2d input channel mismatch");
  if (weight.dim(3) != g.kernel) fail(ErrorCode::kDimension, "conv_transpose2d kernel must be square");
  if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != g.cout)) {
    fail(ErrorCode::kDimension, "conv_transpose2d bias extent mismatch");
  }
  g.out_h = (g.in_h - 1) * stride - 2 * pad + g.kernel + output_pad;
  g.out_w = (g.in_w - 1) * stride - 2 * pad + g.kernel + output_pad;
  if (g.out_h <= 0 || g.out_w <= 0) fail(ErrorCode::kDimension, "conv_transpose2d empty output");
  return g;
}

std::int64_t check_layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::kParameter, "layer_norm eps must be positive");
  require(x.rank() >= 1, ErrorCode::kDimension, "layer_norm on scalar");
  const auto d = x.dim(-1);
  if (d == 0) fail(ErrorCode::kDimension, "layer_norm over empty axis");
  if (gain.numel() != d || bias.numel() != d) fail(ErrorCode::kDimension, "layer_norm affine extent mismatch");
  return d;
}

}  // namespace camsic::nn::detail
