#include "camsic/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "camsic/kernels.hpp"

namespace camsic {

namespace {

Tensor add(Tensor a, const Tensor& b) {
  for (std::int64_t i = 0; i < a.numel(); ++i) a[i] += b[i];
  return a;
}

struct WindowLayout {
  int h, w, ws;
  int padded_h, padded_w;
  int shift_y, shift_x;

  WindowLayout(int h_, int w_, int ws_, bool shifted) : h(h_), w(w_), ws(ws_) {
    padded_h = (h + ws - 1) / ws * ws;
    padded_w = (w + ws - 1) / ws * ws;
    shift_y = shifted && padded_h > ws ? ws / 2 : 0;
    shift_x = shifted && padded_w > ws ? ws / 2 : 0;
  }

  int windows_y() const { return padded_h / ws; }
  int windows_x() const { return padded_w / ws; }

  // Cyclic-shift region of a shifted coordinate; keys attend only within
  // their own region so wrapped-around tokens never mix.
  static int region(int s, int padded, int ws, int shift) {
    if (shift == 0) return 0;
    if (s < padded - ws) return 0;
    return s < padded - shift ? 1 : 2;
  }
};

// Multi-head attention over one block; returns the concatenated head outputs
// before the output projection, [h*w, T].
Tensor windowed_attention(const TokenSequence& seq, int block_index, const WeightStore& weights,
                          const AttentionObserver* observer) {
  const auto& cfg = weights.config();
  const std::string p = "entropy.block" + std::to_string(block_index);
  const std::int64_t t = cfg.transformer_dim;
  const int heads = cfg.num_heads;
  const std::int64_t hd = t / heads;
  const int ws = cfg.window_size;
  const int span = 2 * ws - 1;
  const double scale = 1.0 / std::sqrt(double(hd));

  const Tensor qkv_t = nn::linear(seq.tokens, weights.at(p + ".qkv.weight"), weights.at(p + ".qkv.bias"));
  const float* qkv = qkv_t.data().data();
  const Tensor& rel = weights.at(p + ".rel_bias");
  const WindowLayout lay(seq.h, seq.w, ws, block_index % 2 == 1);

  Tensor out({std::int64_t(seq.h) * seq.w, t});
  const int n_windows = lay.windows_y() * lay.windows_x();
  const int wsq = ws * ws;

#pragma omp parallel for schedule(static) if (observer == nullptr)
  for (int win = 0; win < n_windows; ++win) {
    const int wy = win / lay.windows_x(), wx = win % lay.windows_x();
    // Token index (or -1 for padding) and region label per window slot.
    std::vector<int> token(wsq), label(wsq);
    for (int r = 0; r < ws; ++r) {
      for (int c = 0; c < ws; ++c) {
        const int sy = wy * ws + r, sx = wx * ws + c;
        const int oy = (sy + lay.shift_y) % lay.padded_h;
        const int ox = (sx + lay.shift_x) % lay.padded_w;
        token[r * ws + c] = (oy < seq.h && ox < seq.w) ? oy * seq.w + ox : -1;
        label[r * ws + c] = WindowLayout::region(sy, lay.padded_h, ws, lay.shift_y) * 3 +
                            WindowLayout::region(sx, lay.padded_w, ws, lay.shift_x);
      }
    }
    std::vector<double> logits(wsq), probs(wsq), acc(hd);
    for (int qi = 0; qi < wsq; ++qi) {
      const int q_tok = token[qi];
      if (q_tok < 0) continue;
      for (int head = 0; head < heads; ++head) {
        const float* q = &qkv[q_tok * 3 * t + head * hd];
        double mx = -std::numeric_limits<double>::infinity();
        for (int ki = 0; ki < wsq; ++ki) {
          const int k_tok = token[ki];
          double logit = 0.0;
          if (k_tok >= 0) {
            const float* k = &qkv[k_tok * 3 * t + t + head * hd];
            for (std::int64_t j = 0; j < hd; ++j) logit += double(q[j]) * double(k[j]);
            logit *= scale;
          }
          const int dy = qi / ws - ki / ws + ws - 1;
          const int dx = qi % ws - ki % ws + ws - 1;
          logit += rel[(dy * span + dx) * heads + head];
          if (k_tok < 0 || label[ki] != label[qi]) logit += kMaskedLogit;
          logits[ki] = logit;
          mx = std::max(mx, logit);
        }
        double sum = 0.0;
        for (int ki = 0; ki < wsq; ++ki) {
          probs[ki] = std::exp(logits[ki] - mx);
          sum += probs[ki];
        }
        for (int ki = 0; ki < wsq; ++ki) probs[ki] /= sum;
        if (observer) (*observer)(block_index, q_tok, token, probs);

        std::fill(acc.begin(), acc.end(), 0.0);
        for (int ki = 0; ki < wsq; ++ki) {
          const int k_tok = token[ki];
          if (k_tok < 0) continue;
          const float* v = &qkv[k_tok * 3 * t + 2 * t + head * hd];
          for (std::int64_t j = 0; j < hd; ++j) acc[j] += probs[ki] * double(v[j]);
        }
        for (std::int64_t j = 0; j < hd; ++j) out[q_tok * t + head * hd + j] = static_cast<float>(acc[j]);
      }
    }
  }
  return out;
}

}  // namespace

TokenSequence project(const Tensor& u, std::span<const std::uint8_t> flags, const WeightStore& weights) {
  const auto& cfg = weights.config();
  if (u.rank() != 3 || u.dim(2) != cfg.latent_dim) fail(ErrorCode::kDimension, "project expects [h,w,d]");
  const auto n = u.dim(0) * u.dim(1);
  if (std::int64_t(flags.size()) != n) fail(ErrorCode::kDimension, "flag count does not match token count");

  TokenSequence seq;
  seq.h = int(u.dim(0));
  seq.w = int(u.dim(1));
  seq.flags.assign(flags.begin(), flags.end());
  seq.tokens = nn::linear(u.reshaped({n, cfg.latent_dim}), weights.at("entropy.proj.weight"),
                          weights.at("entropy.proj.bias"));
  const Tensor& id_est = weights.at("entropy.id_estimated");
  const Tensor& id_con = weights.at("entropy.id_content");
  const std::int64_t t = cfg.transformer_dim;
  for (std::int64_t i = 0; i < n; ++i) {
    const Tensor& e = flags[std::size_t(i)] ? id_est : id_con;
    for (std::int64_t j = 0; j < t; ++j) seq.tokens[i * t + j] += e[j];
  }
  return seq;
}

TokenSequence swin_block(const TokenSequence& seq, int block_index, const WeightStore& weights,
                         const AttentionObserver* observer) {
  const auto& cfg = weights.config();
  if (block_index < 0 || block_index >= cfg.num_blocks) fail(ErrorCode::kParameter, "block index out of range");
  const std::string p = "entropy.block" + std::to_string(block_index);

  Tensor attn = windowed_attention(seq, block_index, weights, observer);
  attn = nn::linear(attn, weights.at(p + ".attn_proj.weight"), weights.at(p + ".attn_proj.bias"));
  Tensor x = nn::layer_norm(add(seq.tokens, attn), weights.at(p + ".norm1.gain"), weights.at(p + ".norm1.bias"));

  Tensor mlp = nn::gelu(nn::linear(x, weights.at(p + ".fc1.weight"), weights.at(p + ".fc1.bias")));
  mlp = nn::linear(mlp, weights.at(p + ".fc2.weight"), weights.at(p + ".fc2.bias"));
  x = nn::layer_norm(add(std::move(x), mlp), weights.at(p + ".norm2.gain"), weights.at(p + ".norm2.bias"));

  return TokenSequence{seq.h, seq.w, std::move(x), seq.flags};
}

GaussianField entropy_params(const TokenSequence& seq, const WeightStore& weights) {
  const auto& cfg = weights.config();
  Tensor x = nn::leaky_relu(
      nn::linear(seq.tokens, weights.at("entropy.epm.fc0.weight"), weights.at("entropy.epm.fc0.bias")));
  x = nn::leaky_relu(nn::linear(x, weights.at("entropy.epm.fc1.weight"), weights.at("entropy.epm.fc1.bias")));
  x = nn::linear(x, weights.at("entropy.epm.fc2.weight"), weights.at("entropy.epm.fc2.bias"));

  const int d = cfg.latent_dim;
  GaussianField f{seq.h, seq.w, d, Tensor({seq.h, seq.w, d}), Tensor({seq.h, seq.w, d})};
  const auto lo = static_cast<float>(cfg.sigma_min);
  const auto hi = static_cast<float>(cfg.sigma_max);
  // Rounded float bounds must not step outside [sigma_min, sigma_max].
  const float lo_f = double(lo) < cfg.sigma_min ? std::nextafter(lo, hi) : lo;
  const float hi_f = double(hi) > cfg.sigma_max ? std::nextafter(hi, lo) : hi;
  const std::int64_t n = std::int64_t(seq.h) * seq.w;
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      f.mu[i * d + j] = x[i * 2 * d + j];
      const float s = static_cast<float>(std::exp(double(x[i * 2 * d + d + j])));
      // A NaN exponent lands on sigma_min.
      f.sigma[i * d + j] = s > hi_f ? hi_f : (s >= lo_f ? s : lo_f);
    }
  }
  return f;
}

GaussianField model_forward(const Tensor& u, std::span<const std::uint8_t> flags, const WeightStore& weights) {
  TokenSequence seq = project(u, flags, weights);
  for (int b = 0; b < weights.config().num_blocks; ++b) seq = swin_block(seq, b, weights);
  return entropy_params(seq, weights);
}

}  // namespace camsic
