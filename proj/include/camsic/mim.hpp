#pragma once

// Content-aware masked-token machinery shared by encoder and decoder: the
// mask, the sinusoidal schedule, composite contexts and entropy-ranked token
// selection. Everything here is a pure function of its arguments so both
// sides reproduce the same coding order.

#include <cstdint>
#include <span>
#include <vector>

#include "camsic/entropy_model.hpp"
#include "camsic/tensor.hpp"

namespace camsic {

struct MaskState {
  std::vector<std::uint8_t> m;  // 1 = already estimated (coded)
  int k = 0;                    // completed iterations

  static MaskState empty(int tokens) { return MaskState{std::vector<std::uint8_t>(std::size_t(tokens), 0), 0}; }

  int estimated() const;
  int remaining() const { return static_cast<int>(m.size()) - estimated(); }
  bool full() const { return remaining() == 0; }
};

struct Schedule {
  std::vector<int> counts;  // n_1 .. n_K
  int total = 0;
};

/// Tokens coded per iteration: c_k = round(sin(k/K * pi/2) * N),
/// n_k = c_k - c_{k-1}, with c_K pinned to N.
Schedule schedule_counts(int tokens, int steps);

/// u_i = yhat_i where m_i, else c_i.
Tensor compose_context(const Tensor& yhat, const Tensor& content, const MaskState& mask);

/// Certainty proxy per token in bits: sum_j -log2(2*Phi(0.5/sigma_ij) - 1).
std::vector<double> token_entropy(const GaussianField& field);

/// The n unestimated positions with the smallest entropy (ties -> lower
/// raster index), returned in raster order.
std::vector<int> select_tokens(std::span<const double> entropies, const MaskState& mask, int n);

/// Marks `selected` as estimated and bumps k. Reselecting a position is a
/// protocol error.
MaskState advance(const MaskState& mask, std::span<const int> selected);

}  // namespace camsic
