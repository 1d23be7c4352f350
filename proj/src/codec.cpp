#include "camsic/codec.hpp"

#include <cstring>

namespace camsic {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'S', 'C'};

std::uint32_t context_digest(const Tensor& u, const MaskState& mask) {
  ByteWriter w;
  for (float v : u.data()) w.f32(v);
  w.raw(mask.m);
  return crc32(w.bytes());
}

void check_content(const Tensor& content, const WeightStore& weights, int h, int w) {
  if (content.rank() != 3 || content.dim(0) != h || content.dim(1) != w ||
      content.dim(2) != weights.config().latent_dim) {
    fail(ErrorCode::kDimension, "content tokens " + shape_string(content.shape()) + " do not match the latent grid");
  }
}

int resolve_steps(int steps, const ModelConfig& config) {
  const int k = steps == 0 ? config.decode_steps : steps;
  if (k < 1 || k > 255) fail(ErrorCode::kParameter, "steps must be in [1, 255]");
  return k;
}

}  // namespace

double ViewLog::estimated_bits() const {
  double b = 0.0;
  for (const auto& it : iterations) b += it.estimated_bits;
  return b;
}

double ViewLog::table_bits() const {
  double b = 0.0;
  for (const auto& it : iterations) b += it.table_bits;
  return b;
}

ViewEncoding encode_view(const LatentGrid& yhat, const Tensor& content, const WeightStore& weights, int steps) {
  const auto& cfg = weights.config();
  if (yhat.d != cfg.latent_dim) fail(ErrorCode::kDimension, "latent depth does not match the model");
  check_content(content, weights, yhat.h, yhat.w);
  const Schedule schedule = schedule_counts(yhat.tokens(), steps);
  const Tensor yq = yhat.dequantize();

  ViewEncoding out;
  RangeEncoder enc;
  MaskState mask = MaskState::empty(yhat.tokens());
  for (int n_k : schedule.counts) {
    const Tensor u = compose_context(yq, content, mask);
    IterationRecord rec;
    rec.count = n_k;
    rec.context_digest = context_digest(u, mask);
    const GaussianField field = model_forward(u, mask.m, weights);
    ++out.log.forward_calls;

    rec.selected = select_tokens(token_entropy(field), mask, n_k);
    for (int t : rec.selected) {
      for (int j = 0; j < yhat.d; ++j) {
        const CdfTable table = build_cdf(field.mu_at(t, j), field.sigma_at(t, j), cfg.symbol_min, cfg.symbol_max);
        const int s = yhat.at(t, j);
        rec.table_bits += table.bits(s);
        enc.encode(table, s);
      }
    }
    rec.estimated_bits = cross_entropy_bits(field, yhat, rec.selected, cfg);
    mask = camsic::advance(mask, rec.selected);
    out.log.iterations.push_back(std::move(rec));
  }
  if (!mask.full()) fail(ErrorCode::kProtocol, "schedule left tokens uncoded");
  out.payload = enc.finish();
  return out;
}

LatentGrid decode_view(std::span<const std::uint8_t> payload, const Tensor& content, const WeightStore& weights,
                       int steps, int h, int w, ViewLog* log) {
  const auto& cfg = weights.config();
  check_content(content, weights, h, w);
  const Schedule schedule = schedule_counts(h * w, steps);

  LatentGrid yhat(h, w, cfg.latent_dim);
  Tensor yq({h, w, cfg.latent_dim});
  RangeDecoder dec(payload);
  MaskState mask = MaskState::empty(h * w);
  for (int n_k : schedule.counts) {
    const Tensor u = compose_context(yq, content, mask);
    IterationRecord rec;
    rec.count = n_k;
    if (log) rec.context_digest = context_digest(u, mask);
    const GaussianField field = model_forward(u, mask.m, weights);

    rec.selected = select_tokens(token_entropy(field), mask, n_k);
    for (int t : rec.selected) {
      for (int j = 0; j < cfg.latent_dim; ++j) {
        const CdfTable table = build_cdf(field.mu_at(t, j), field.sigma_at(t, j), cfg.symbol_min, cfg.symbol_max);
        const int s = dec.decode(table);
        yhat.at(t, j) = s;
        yq[std::int64_t(t) * cfg.latent_dim + j] = static_cast<float>(s);
        if (log) rec.table_bits += table.bits(s);
      }
    }
    if (log) {
      rec.estimated_bits = cross_entropy_bits(field, yhat, rec.selected, cfg);
      ++log->forward_calls;
    }
    mask = camsic::advance(mask, rec.selected);
    if (log) log->iterations.push_back(std::move(rec));
  }
  if (!mask.full()) fail(ErrorCode::kProtocol, "schedule left tokens undecoded");
  dec.finish();
  return yhat;
}

Tensor view_content_tokens(const LatentGrid& hyper, const Tensor* previous, const WeightStore& weights,
                           PriorMode mode, int h, int w) {
  if (mode == PriorMode::kConstantToken) return constant_token_prior(weights, h, w);
  const Tensor hyper_features = hyper_decode(hyper, weights, h, w);
  const Tensor disparity = previous ? *previous : first_view_prior(weights, h, w);
  return fuse_priors(hyper_features, disparity, weights);
}

TwoStepRate two_step_rate(const LatentGrid& yhat, const Tensor& content, const MaskState& mask,
                          const WeightStore& weights) {
  const auto& cfg = weights.config();
  check_content(content, weights, yhat.h, yhat.w);
  if (int(mask.m.size()) != yhat.tokens()) fail(ErrorCode::kDimension, "mask length does not match token count");
  std::vector<int> visible, hidden;
  for (int i = 0; i < yhat.tokens(); ++i) (mask.m[std::size_t(i)] ? visible : hidden).push_back(i);

  TwoStepRate r;
  if (!visible.empty()) {
    const MaskState none = MaskState::empty(yhat.tokens());
    r.content_bits = cross_entropy_bits(model_forward(content, none.m, weights), yhat, visible, cfg);
  }
  if (!hidden.empty()) {
    const Tensor u = compose_context(yhat.dequantize(), content, mask);
    r.composite_bits = cross_entropy_bits(model_forward(u, mask.m, weights), yhat, hidden, cfg);
  }
  return r;
}

// ---------------------------------------------------------------------------

Bytes serialize_bitstream(const Bitstream& s) {
  ByteWriter out;
  out.raw(std::string_view(kMagic, 4));
  out.u16(s.version);
  out.u8(static_cast<std::uint8_t>(s.mode));
  out.u8(s.steps);
  out.u32(s.digest);
  for (const auto& v : s.views) {
    out.u32(v.height);
    out.u32(v.width);
    out.u32(static_cast<std::uint32_t>(v.hyper.size()));
    out.raw(v.hyper);
    out.u32(static_cast<std::uint32_t>(v.main.size()));
    out.raw(v.main);
  }
  out.u32(crc32(out.bytes()));
  return out.take();
}

std::size_t bitstream_overhead_bytes() { return 4 + 2 + 1 + 1 + 4 + 2 * 16 + 4; }

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, "not a CMSC bitstream");
  }
  ByteReader in(bytes.subspan(4));
  Bitstream s;
  s.version = in.u16();
  if (s.version != kBitstreamVersion) {
    fail(ErrorCode::kUnsupportedVersion, "CMSC version " + std::to_string(s.version));
  }
  const auto mode = in.u8();
  if (mode > 1) fail(ErrorCode::kFormat, "unknown prior mode " + std::to_string(mode));
  s.mode = static_cast<PriorMode>(mode);
  s.steps = in.u8();
  s.digest = in.u32();
  for (auto& v : s.views) {
    v.height = in.u32();
    v.width = in.u32();
    const auto hl = in.u32();
    const auto hyper = in.raw(hl);
    v.hyper.assign(hyper.begin(), hyper.end());
    const auto ml = in.u32();
    const auto main = in.raw(ml);
    v.main.assign(main.begin(), main.end());
  }
  const std::size_t body = 4 + in.position();
  const auto stored = in.u32();
  if (in.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after CMSC trailer");
  if (crc32(bytes.first(body)) != stored) fail(ErrorCode::kChecksum, "CMSC CRC mismatch");
  if (s.steps == 0) fail(ErrorCode::kFormat, "zero decode steps");
  return s;
}

// ---------------------------------------------------------------------------

PairEncoding encode_pair(const ImagePlane& left, const ImagePlane& right, const WeightStore& weights,
                         const CodecOptions& options) {
  const auto& cfg = weights.config();
  validate_manifest(weights);
  if (left.height != right.height || left.width != right.width) {
    fail(ErrorCode::kDimension, "stereo views must share extents");
  }
  const int steps = resolve_steps(options.steps, cfg);

  PairEncoding out;
  out.container.mode = options.mode;
  out.container.steps = static_cast<std::uint8_t>(steps);
  out.container.digest = weights_digest(weights);

  const Tensor& hyper_scales = weights.at("hyper.scales");
  Tensor previous;
  double est_bits = 0.0;
  for (int v = 0; v < 2; ++v) {
    const ImagePlane& x = v == 0 ? left : right;
    const PaddedImage padded = pad_image(x, cfg.downsample_factor);
    const Tensor y = analysis(padded.image, weights);
    const int h = int(y.dim(0)), w = int(y.dim(1));
    QuantizeResult q = quantize(y, cfg);
    out.saturated += q.saturated;
    out.hyper[v] = hyper_encode(y, weights);

    const Tensor content =
        view_content_tokens(out.hyper[v], v == 0 ? nullptr : &previous, weights, options.mode, h, w);
    ViewEncoding enc = encode_view(q.grid, content, weights, steps);

    auto& payload = out.container.views[v];
    payload.height = static_cast<std::uint32_t>(x.height);
    payload.width = static_cast<std::uint32_t>(x.width);
    payload.hyper = factorized_encode(out.hyper[v], hyper_scales, cfg);
    payload.main = std::move(enc.payload);

    out.hyper_bits_estimated[v] = factorized_bits(out.hyper[v], hyper_scales, cfg);
    est_bits += out.hyper_bits_estimated[v] + enc.log.estimated_bits();
    out.logs[v] = std::move(enc.log);

    previous = q.grid.dequantize();
    out.reconstructions[v] = quantize_to_8bit(synthesis(previous, weights, x.height, x.width));
    out.latents[v] = std::move(q.grid);
  }
  out.stream = serialize_bitstream(out.container);

  out.rd.bits_actual = static_cast<std::int64_t>(out.stream.size()) * 8;
  out.rd.bits_estimated = est_bits;
  out.rd.bpp = double(out.rd.bits_actual) / (2.0 * double(left.height) * double(left.width));
  out.rd.psnr = 0.5 * (psnr(left, out.reconstructions[0]) + psnr(right, out.reconstructions[1]));
  return out;
}

PairDecoding decode_pair(std::span<const std::uint8_t> stream, const WeightStore& weights) {
  const auto& cfg = weights.config();
  const Bitstream s = parse_bitstream(stream);
  if (s.digest != weights_digest(weights)) {
    fail(ErrorCode::kDigestMismatch, "bitstream was produced with different weights");
  }
  validate_manifest(weights);
  if (s.views[0].height != s.views[1].height || s.views[0].width != s.views[1].width) {
    fail(ErrorCode::kFormat, "views with different extents");
  }

  PairDecoding out;
  Tensor previous;
  const Tensor& hyper_scales = weights.at("hyper.scales");
  for (int v = 0; v < 2; ++v) {
    const auto& payload = s.views[v];
    const int f = cfg.downsample_factor;
    const int H = int(payload.height), W = int(payload.width);
    if (H <= 0 || W <= 0 || H > (1 << 16) || W > (1 << 16)) fail(ErrorCode::kFormat, "implausible image extents");
    const int h = (H + f - 1) / f, w = (W + f - 1) / f;

    const LatentGrid z = factorized_decode(payload.hyper, hyper_scales, (h + 3) / 4, (w + 3) / 4, cfg);
    const Tensor content = view_content_tokens(z, v == 0 ? nullptr : &previous, weights, s.mode, h, w);
    out.latents[v] = decode_view(payload.main, content, weights, s.steps, h, w, &out.logs[v]);
    previous = out.latents[v].dequantize();
    out.images[v] = quantize_to_8bit(synthesis(previous, weights, H, W));
  }
  return out;
}

}  // namespace camsic
