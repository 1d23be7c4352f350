// Serial reference kernels. Written for obviousness, not speed: convolutions
// pad their input explicitly and every reduction is a plain nested loop.

#include <algorithm>
#include <cmath>

#include "camsic/kernels.hpp"

namespace camsic::nn::reference {

Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::check_matmul(a, b);
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += double(a[i * k + p]) * double(b[p * n + j]);
      c[i * n + j] = static_cast<float>(acc);
    }
  }
  return c;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  detail::check_linear(x, weight, bias);
  const auto rows = x.dim(0), in = x.dim(1), out = weight.dim(0);
  Tensor y({rows, out});
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t o = 0; o < out; ++o) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < in; ++i) acc += double(x[r * in + i]) * double(weight[o * in + i]);
      if (!bias.empty()) acc += bias[o];
      y[r * out + o] = static_cast<float>(acc);
    }
  }
  return y;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int pad) {
  const auto g = detail::check_conv2d(x, weight, bias, stride, pad);
  const auto ph = g.in_h + 2 * pad, pw = g.in_w + 2 * pad;
  Tensor padded({g.cin, ph, pw});
  for (std::int64_t c = 0; c < g.cin; ++c)
    for (std::int64_t y = 0; y < g.in_h; ++y)
      for (std::int64_t xx = 0; xx < g.in_w; ++xx)
        padded[(c * ph + y + pad) * pw + xx + pad] = x[(c * g.in_h + y) * g.in_w + xx];

  const auto k = g.kernel;
  Tensor out({g.cout, g.out_h, g.out_w});
  for (std::int64_t co = 0; co < g.cout; ++co) {
    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
        double acc = 0.0;
        for (std::int64_t ci = 0; ci < g.cin; ++ci)
          for (std::int64_t ky = 0; ky < k; ++ky)
            for (std::int64_t kx = 0; kx < k; ++kx)
              acc += double(padded[(ci * ph + oy * stride + ky) * pw + ox * stride + kx]) *
                     double(weight[((co * g.cin + ci) * k + ky) * k + kx]);
        if (!bias.empty()) acc += bias[co];
        out[(co * g.out_h + oy) * g.out_w + ox] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int pad, int output_pad) {
  const auto g = detail::check_conv_transpose2d(x, weight, bias, stride, pad, output_pad);
  const auto k = g.kernel;
  Tensor out({g.cout, g.out_h, g.out_w});
  // Gather form: every output sums the inputs that scatter onto it, visited in
  // (ci, ky, kx) order.
  for (std::int64_t co = 0; co < g.cout; ++co) {
    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
        double acc = 0.0;
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const auto ty = oy + pad - ky;
            if (ty < 0 || ty % stride != 0 || ty / stride >= g.in_h) continue;
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const auto tx = ox + pad - kx;
              if (tx < 0 || tx % stride != 0 || tx / stride >= g.in_w) continue;
              acc += double(x[(ci * g.in_h + ty / stride) * g.in_w + tx / stride]) *
                     double(weight[((ci * g.cout + co) * k + ky) * k + kx]);
            }
          }
        }
        if (!bias.empty()) acc += bias[co];
        out[(co * g.out_h + oy) * g.out_w + ox] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const auto d = detail::check_layer_norm(x, gain, bias, eps);
  Tensor y(x.shape());
  const auto rows = x.numel() / d;
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = x.data().data() + r * d;
    double mean = 0.0;
    for (std::int64_t i = 0; i < d; ++i) mean += row[i];
    mean /= double(d);
    double var = 0.0;
    for (std::int64_t i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= double(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::int64_t i = 0; i < d; ++i)
      y[r * d + i] = static_cast<float>((row[i] - mean) * inv * gain[i] + bias[i]);
  }
  return y;
}

Tensor softmax(const Tensor& x) {
  require(x.rank() >= 1 && x.dim(-1) > 0, ErrorCode::kDimension, "softmax over empty axis");
  const auto d = x.dim(-1);
  Tensor y(x.shape());
  for (std::int64_t r = 0; r < x.numel() / d; ++r) {
    double mx = x[r * d];
    for (std::int64_t i = 1; i < d; ++i) mx = std::max(mx, double(x[r * d + i]));
    double sum = 0.0;
    for (std::int64_t i = 0; i < d; ++i) sum += std::exp(double(x[r * d + i]) - mx);
    for (std::int64_t i = 0; i < d; ++i)
      y[r * d + i] = static_cast<float>(std::exp(double(x[r * d + i]) - mx) / sum);
  }
  return y;
}

Tensor gelu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = detail::gelu_scalar(x[i]);
  return y;
}

Tensor leaky_relu(const Tensor& x, float slope) {
  Tensor y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] >= 0.0f ? x[i] : x[i] * slope;
  return y;
}

}  // namespace camsic::nn::reference
