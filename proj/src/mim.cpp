#include "camsic/mim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace camsic {

int MaskState::estimated() const {
  return static_cast<int>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

Schedule schedule_counts(int tokens, int steps) {
  if (tokens < 0) fail(ErrorCode::kParameter, "negative token count");
  if (steps < 1) fail(ErrorCode::kParameter, "schedule needs at least one step");
  Schedule s;
  s.total = tokens;
  s.counts.reserve(std::size_t(steps));
  long prev = 0;
  for (int k = 1; k <= steps; ++k) {
    long cum = tokens;
    if (k < steps) {
      // sin(pi/6) = 1/2 is the only rational value strictly inside (0, 1), so
      // it is the only place an exact rounding tie can occur. Evaluated in
      // double it comes out just below 1/2, so it is taken exactly here.
      if (3 * k == steps) {
        cum = (tokens + 1) / 2;
      } else {
        const double ratio = std::sin(double(k) / double(steps) * (std::numbers::pi / 2.0));
        cum = std::lround(ratio * double(tokens));
      }
      cum = std::clamp(cum, prev, long(tokens));
    }
    s.counts.push_back(static_cast<int>(cum - prev));
    prev = cum;
  }
  return s;
}

Tensor compose_context(const Tensor& yhat, const Tensor& content, const MaskState& mask) {
  if (yhat.shape() != content.shape() || yhat.rank() != 3) {
    fail(ErrorCode::kDimension, "compose_context extents differ: " + shape_string(yhat.shape()) + " vs " +
                                    shape_string(content.shape()));
  }
  const auto n = yhat.dim(0) * yhat.dim(1), d = yhat.dim(2);
  if (std::int64_t(mask.m.size()) != n) fail(ErrorCode::kDimension, "mask length does not match token count");
  Tensor u = content;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!mask.m[std::size_t(i)]) continue;
    std::copy_n(yhat.data().begin() + i * d, d, u.data().begin() + i * d);
  }
  return u;
}

std::vector<double> token_entropy(const GaussianField& field) {
  const int n = field.h * field.w;
  std::vector<double> out(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double bits = 0.0;
    for (int j = 0; j < field.d; ++j) {
      // Mass of the unit interval centred on the mean: 2*Phi(a)-1 = erf(a/sqrt2).
      const double sigma = field.sigma_at(i, j);
      const double p = std::erf(0.5 / (sigma * std::numbers::sqrt2));
      bits -= std::log2(p);
    }
    out[std::size_t(i)] = bits;
  }
  return out;
}

std::vector<int> select_tokens(std::span<const double> entropies, const MaskState& mask, int n) {
  if (entropies.size() != mask.m.size()) fail(ErrorCode::kDimension, "entropy count does not match mask");
  if (n < 0 || n > mask.remaining()) {
    fail(ErrorCode::kSchedule, "cannot select " + std::to_string(n) + " of " + std::to_string(mask.remaining()) +
                                   " remaining tokens");
  }
  std::vector<int> pending;
  for (std::size_t i = 0; i < mask.m.size(); ++i) {
    if (!mask.m[i]) pending.push_back(static_cast<int>(i));
  }
  auto by_entropy = [&](int a, int b) {
    const double ea = entropies[std::size_t(a)], eb = entropies[std::size_t(b)];
    return ea < eb || (ea == eb && a < b);
  };
  std::partial_sort(pending.begin(), pending.begin() + n, pending.end(), by_entropy);
  pending.resize(std::size_t(n));
  std::sort(pending.begin(), pending.end());
  return pending;
}

MaskState advance(const MaskState& mask, std::span<const int> selected) {
  MaskState next = mask;
  for (int pos : selected) {
    if (pos < 0 || std::size_t(pos) >= next.m.size()) fail(ErrorCode::kProtocol, "selected position out of range");
    if (next.m[std::size_t(pos)]) {
      fail(ErrorCode::kProtocol, "position " + std::to_string(pos) + " selected twice");
    }
    next.m[std::size_t(pos)] = 1;
  }
  ++next.k;
  return next;
}

}  // namespace camsic
