#include "fixture_weights.hpp"

#include <cmath>

namespace camsic::fixture {

namespace {

constexpr double kLatentScale = 20.0;   // symbols per unit of block mean
constexpr double kGeluOffset = 10.0;    // keeps GELU inputs in its linear range
constexpr double kAnchor = 1000.0;      // constant tokens that pin layer-norm scale
constexpr double kEpmOffset = 100.0;    // keeps LeakyReLU inputs positive
constexpr double kFirstViewSigma = 6.0;
constexpr double kConditionalSigma = 1.0;

// 2x2 taps of a 5x5 stride-2 kernel that cover exactly the aligned block.
void set_block_taps(Tensor& w, std::int64_t a, std::int64_t b, std::int64_t dim1, float value) {
  for (int ky = 2; ky <= 3; ++ky)
    for (int kx = 2; kx <= 3; ++kx) w[((a * dim1 + b) * 5 + ky) * 5 + kx] = value;
}

}  // namespace

WeightStore make_fixture_weights() {
  const ModelConfig cfg = ModelConfig::desk();
  cfg.validate();
  WeightStore ws(cfg);
  for (const auto& spec : weight_manifest(cfg)) {
    const bool gain = spec.name.size() > 5 && spec.name.compare(spec.name.size() - 5, 5, ".gain") == 0;
    ws.add(spec.name, Tensor(spec.shape, gain ? 1.0f : 0.0f));
  }
  const std::int64_t d = cfg.latent_dim, t = cfg.transformer_dim;
  const std::int64_t marker = d - 1;

  for (int i = 0; i < 4; ++i) {
    const std::string p = "analysis.conv" + std::to_string(i);
    Tensor& w = ws.mutable_at(p + ".weight");
    Tensor& b = ws.mutable_at(p + ".bias");
    const std::int64_t cin = i == 0 ? 3 : d;
    const float tap = i == 3 ? float(0.25 * kLatentScale) : 0.25f;
    for (int c = 0; c < 3; ++c) set_block_taps(w, c, c, cin, tap);
    for (int c = 0; c < 3; ++c) {
      if (i == 0) b[c] = float(kGeluOffset);
      if (i == 3) b[c] = float(-kLatentScale * (kGeluOffset + 0.5));
    }
  }
  for (int i = 0; i < 4; ++i) {
    const std::string p = "synthesis.deconv" + std::to_string(i);
    Tensor& w = ws.mutable_at(p + ".weight");
    Tensor& b = ws.mutable_at(p + ".bias");
    const std::int64_t cout = i == 3 ? 3 : d;
    const float tap = i == 0 ? float(1.0 / kLatentScale) : 1.0f;
    for (int c = 0; c < 3; ++c) set_block_taps(w, c, c, cout, tap);
    for (int c = 0; c < 3; ++c) {
      if (i == 0) b[c] = float(0.5 + kGeluOffset);
      if (i == 3) b[c] = float(-kGeluOffset);
    }
  }

  {
    Tensor& s = ws.mutable_at("hyper.scales");
    for (auto& v : s.data()) v = float(cfg.sigma_min);
  }
  {
    // Content tokens copy the disparity half of the concatenated input.
    Tensor& w = ws.mutable_at("fusion.conv_in.weight");
    for (std::int64_t c = 0; c < d; ++c) w[((c * 2 * d + d + c) * 3 + 1) * 3 + 1] = 1.0f;
  }
  ws.mutable_at("prior.first_view")[marker] = 1.0f;
  ws.mutable_at("prior.constant_token")[marker] = 1.0f;

  // Projection: slots 0..3 carry (colour 0..2, marker), slots 4..7 their
  // negatives, the rest +-kAnchor, so every token has zero mean and a
  // layer-norm scale dominated by the anchors.
  {
    Tensor& w = ws.mutable_at("entropy.proj.weight");
    Tensor& b = ws.mutable_at("entropy.proj.bias");
    const std::int64_t src[4] = {0, 1, 2, marker};
    for (int k = 0; k < 4; ++k) {
      w[k * d + src[k]] = 1.0f;
      w[(k + 4) * d + src[k]] = -1.0f;
    }
    const std::int64_t half = (t - 8) / 2;
    for (std::int64_t j = 8; j < t; ++j) b[j] = float(j < 8 + half ? kAnchor : -kAnchor);
  }
  // Blocks stay zero apart from unit gains: each reduces to LN(LN(x)).
  // Undo the layer-norm scale, then read out mu and log sigma.
  const double anchors = double(t - 8);
  const double ln_scale = kAnchor * std::sqrt(anchors / double(t));
  {
    Tensor& w0 = ws.mutable_at("entropy.epm.fc0.weight");
    Tensor& b0 = ws.mutable_at("entropy.epm.fc0.bias");
    Tensor& w1 = ws.mutable_at("entropy.epm.fc1.weight");
    for (int k = 0; k < 4; ++k) {
      w0[k * t + k] = float(ln_scale);
      b0[k] = float(kEpmOffset);
      w1[k * t + k] = 1.0f;
    }
    Tensor& w2 = ws.mutable_at("entropy.epm.fc2.weight");
    Tensor& b2 = ws.mutable_at("entropy.epm.fc2.bias");
    const double log_cond = std::log(kConditionalSigma);
    const double log_first = std::log(kFirstViewSigma);
    for (int c = 0; c < 3; ++c) {
      w2[c * t + c] = 1.0f;
      b2[c] = float(-kEpmOffset);
      // log sigma = log_cond + (log_first - log_cond) * marker
      const double slope = log_first - log_cond;
      w2[(d + c) * t + 3] = float(slope);
      b2[d + c] = float(log_cond - slope * kEpmOffset);
    }
    for (std::int64_t c = 3; c < d; ++c) b2[d + c] = -5.0f;  // clamps to sigma_min
  }
  validate_manifest(ws);
  return ws;
}

}  // namespace camsic::fixture
