// OpenMP kernels. Work is split over independent outputs only; each output's
// reduction runs serially in the same order as the reference kernels.

#include <algorithm>
#include <cmath>
#include <vector>

#include "camsic/kernels.hpp"

namespace camsic::nn {

Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::check_matmul(a, b);
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  float* pc = c.data().data();
#pragma omp parallel
  {
    std::vector<double> acc(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t p = 0; p < k; ++p) {
        const double av = pa[i * k + p];
        const float* brow = pb + p * n;
        for (std::int64_t j = 0; j < n; ++j) acc[j] += av * double(brow[j]);
      }
      for (std::int64_t j = 0; j < n; ++j) pc[i * n + j] = static_cast<float>(acc[j]);
    }
  }
  return c;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  detail::check_linear(x, weight, bias);
  const auto rows = x.dim(0), in = x.dim(1), out = weight.dim(0);
  Tensor y({rows, out});
  const float* px = x.data().data();
  const float* pw = weight.data().data();
  const bool has_bias = !bias.empty();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t o = 0; o < out; ++o) {
      const float* xr = px + r * in;
      const float* wr = pw + o * in;
      double acc = 0.0;
      for (std::int64_t i = 0; i < in; ++i) acc += double(xr[i]) * double(wr[i]);
      if (has_bias) acc += bias[o];
      y[r * out + o] = static_cast<float>(acc);
    }
  }
  return y;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int pad) {
  const auto g = detail::check_conv2d(x, weight, bias, stride, pad);
  const auto k = g.kernel;
  Tensor out({g.cout, g.out_h, g.out_w});
  const float* px = x.data().data();
  const float* pw = weight.data().data();
  const bool has_bias = !bias.empty();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t co = 0; co < g.cout; ++co) {
    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
        double acc = 0.0;
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          const float* plane = px + ci * g.in_h * g.in_w;
          const float* wk = pw + (co * g.cin + ci) * k * k;
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const auto iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= g.in_h) continue;
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const auto ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= g.in_w) continue;
              acc += double(plane[iy * g.in_w + ix]) * double(wk[ky * k + kx]);
            }
          }
        }
        if (has_bias) acc += bias[co];
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
  const float* px = x.data().data();
  const float* pw = weight.data().data();
  const bool has_bias = !bias.empty();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t co = 0; co < g.cout; ++co) {
    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
        double acc = 0.0;
        for (std::int64_t ci = 0; ci < g.cin; ++ci) {
          const float* plane = px + ci * g.in_h * g.in_w;
          const float* wk = pw + (ci * g.cout + co) * k * k;
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const auto ty = oy + pad - ky;
            if (ty < 0 || ty % stride != 0) continue;
            const auto iy = ty / stride;
            if (iy >= g.in_h) continue;
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const auto tx = ox + pad - kx;
              if (tx < 0 || tx % stride != 0) continue;
              const auto ix = tx / stride;
              if (ix >= g.in_w) continue;
              acc += double(plane[iy * g.in_w + ix]) * double(wk[ky * k + kx]);
            }
          }
        }
        if (has_bias) acc += bias[co];
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
  const float* px = x.data().data();
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = px + r * d;
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
  const auto rows = x.numel() / d;
  Tensor y(x.shape());
  const float* px = x.data().data();
#pragma omp parallel
  {
    std::vector<double> e(static_cast<std::size_t>(d));
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
      const float* row = px + r * d;
      double mx = row[0];
      for (std::int64_t i = 1; i < d; ++i) mx = std::max(mx, double(row[i]));
      double sum = 0.0;
      for (std::int64_t i = 0; i < d; ++i) {
        e[i] = std::exp(double(row[i]) - mx);
        sum += e[i];
      }
      for (std::int64_t i = 0; i < d; ++i) y[r * d + i] = static_cast<float>(e[i] / sum);
    }
  }
  return y;
}

Tensor gelu(const Tensor& x) {
  Tensor y(x.shape());
  const auto n = x.numel();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = detail::gelu_scalar(x[i]);
  return y;
}

Tensor leaky_relu(const Tensor& x, float slope) {
  Tensor y(x.shape());
  const auto n = x.numel();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0f ? x[i] : x[i] * slope;
  return y;
}

}  // namespace camsic::nn
