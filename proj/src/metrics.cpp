#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "camsic/codec.hpp"

namespace camsic {

double psnr(const ImagePlane& a, const ImagePlane& b) {
  if (a.height != b.height || a.width != b.width) fail(ErrorCode::kDimension, "psnr on images of different extents");
  double se = 0.0;
  for (std::int64_t i = 0; i < a.values.numel(); ++i) {
    const double d = double(a.values[i]) - double(b.values[i]);
    se += d * d;
  }
  const double mse = se / double(a.values.numel());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

// Least-squares cubic in a normalized variable t = (x - center) / scale.
struct Cubic {
  double center = 0.0, scale = 1.0;
  Eigen::Vector4d coef;  // ascending powers of t

  static Cubic fit(const std::vector<double>& x, const std::vector<double>& y) {
    Cubic c;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    c.center = 0.5 * (*lo + *hi);
    c.scale = std::max(0.5 * (*hi - *lo), 1e-12);
    Eigen::MatrixXd a(x.size(), 4);
    Eigen::VectorXd b(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = (x[i] - c.center) / c.scale;
      a(Eigen::Index(i), 0) = 1.0;
      a(Eigen::Index(i), 1) = t;
      a(Eigen::Index(i), 2) = t * t;
      a(Eigen::Index(i), 3) = t * t * t;
      b(Eigen::Index(i)) = y[i];
    }
    c.coef = a.colPivHouseholderQr().solve(b);
    return c;
  }

  // Integral of the cubic over x in [x0, x1].
  double integral(double x0, double x1) const {
    auto anti = [&](double x) {
      const double t = (x - center) / scale;
      return coef(0) * t + coef(1) * t * t / 2 + coef(2) * t * t * t / 3 + coef(3) * t * t * t * t / 4;
    };
    return scale * (anti(x1) - anti(x0));
  }
};

struct Curve {
  std::vector<double> log_rate, quality;
};

Curve prepare(std::span<const RdSample> pts, const char* which) {
  if (pts.size() < 4) fail(ErrorCode::kComputation, std::string(which) + " curve needs at least 4 points");
  std::vector<RdSample> sorted(pts.begin(), pts.end());
  std::sort(sorted.begin(), sorted.end(), [](const RdSample& a, const RdSample& b) { return a.bpp < b.bpp; });
  Curve c;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].bpp > 0.0) || !std::isfinite(sorted[i].bpp) || !std::isfinite(sorted[i].psnr)) {
      fail(ErrorCode::kComputation, std::string(which) + " curve has a non-positive or non-finite point");
    }
    if (i > 0 && sorted[i].bpp == sorted[i - 1].bpp) {
      fail(ErrorCode::kComputation, std::string(which) + " curve repeats a rate");
    }
    c.log_rate.push_back(std::log10(sorted[i].bpp));
    c.quality.push_back(sorted[i].psnr);
  }
  return c;
}

std::pair<double, double> overlap(const std::vector<double>& a, const std::vector<double>& b) {
  const double lo = std::max(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  const double hi = std::min(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  if (!(hi > lo)) fail(ErrorCode::kComputation, "curves do not overlap");
  return {lo, hi};
}

}  // namespace

double bd_rate(std::span<const RdSample> test, std::span<const RdSample> anchor) {
  const Curve t = prepare(test, "test");
  const Curve a = prepare(anchor, "anchor");
  const auto [lo, hi] = overlap(t.quality, a.quality);
  const Cubic ft = Cubic::fit(t.quality, t.log_rate);
  const Cubic fa = Cubic::fit(a.quality, a.log_rate);
  const double avg = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

double bd_psnr(std::span<const RdSample> test, std::span<const RdSample> anchor) {
  const Curve t = prepare(test, "test");
  const Curve a = prepare(anchor, "anchor");
  const auto [lo, hi] = overlap(t.log_rate, a.log_rate);
  const Cubic ft = Cubic::fit(t.log_rate, t.quality);
  const Cubic fa = Cubic::fit(a.log_rate, a.quality);
  return (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
}

}  // namespace camsic
