#include "camsic/weights.hpp"

#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <random>

namespace camsic {

namespace {

constexpr char kMagic[4] = {'C', 'W', 'T', 'S'};

// Portable uniform draw; std distributions differ across standard libraries.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = double(rng() >> 11) * (1.0 / 9007199254740992.0);
  return lo + (hi - lo) * u;
}

}  // namespace

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.latent_dim = 320;
  c.transformer_dim = 768;
  c.mlp_dim = 3072;
  c.num_blocks = 4;
  c.num_heads = 12;
  c.window_size = 8;
  c.hyper_dim = 192;
  return c;
}

void ModelConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kParameter, "model config: " + what); };
  if (latent_dim <= 0 || transformer_dim <= 0 || mlp_dim <= 0 || hyper_dim <= 0) bad("non-positive dimension");
  if (num_blocks < 0) bad("negative block count");
  if (num_heads <= 0 || transformer_dim % num_heads != 0) bad("transformer_dim not divisible by num_heads");
  if (window_size <= 0) bad("window_size must be positive");
  if (downsample_factor != 16) bad("downsample_factor must be 16 (four stride-2 stages)");
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) bad("sigma bounds");
  if (!(symbol_min < 0 && 0 < symbol_max)) bad("symbol bounds must straddle zero");
  if (alphabet_size() > 4096) bad("alphabet too large for 16-bit tables");
  if (decode_steps < 1 || decode_steps > 255) bad("decode_steps must be in [1, 255]");
}

void write_config(ByteWriter& out, const ModelConfig& c) {
  out.i32(c.latent_dim);
  out.i32(c.transformer_dim);
  out.i32(c.mlp_dim);
  out.i32(c.num_blocks);
  out.i32(c.num_heads);
  out.i32(c.window_size);
  out.i32(c.hyper_dim);
  out.i32(c.downsample_factor);
  out.f64(c.sigma_min);
  out.f64(c.sigma_max);
  out.i32(c.symbol_min);
  out.i32(c.symbol_max);
  out.i32(c.decode_steps);
}

ModelConfig read_config(ByteReader& in) {
  ModelConfig c;
  c.latent_dim = in.i32();
  c.transformer_dim = in.i32();
  c.mlp_dim = in.i32();
  c.num_blocks = in.i32();
  c.num_heads = in.i32();
  c.window_size = in.i32();
  c.hyper_dim = in.i32();
  c.downsample_factor = in.i32();
  c.sigma_min = in.f64();
  c.sigma_max = in.f64();
  c.symbol_min = in.i32();
  c.symbol_max = in.i32();
  c.decode_steps = in.i32();
  return c;
}

std::vector<EntrySpec> weight_manifest(const ModelConfig& c) {
  const std::int64_t d = c.latent_dim, t = c.transformer_dim, m = c.mlp_dim, hd = c.hyper_dim;
  const std::int64_t table = std::int64_t(2 * c.window_size - 1) * (2 * c.window_size - 1);
  std::vector<EntrySpec> specs;
  auto add = [&](std::string name, Shape shape) { specs.push_back({std::move(name), std::move(shape)}); };
  auto conv = [&](const std::string& base, Shape w, std::int64_t bias) {
    add(base + ".weight", std::move(w));
    add(base + ".bias", {bias});
  };

  for (int i = 0; i < 4; ++i) {
    conv("analysis.conv" + std::to_string(i), {d, i == 0 ? 3 : d, 5, 5}, d);
  }
  for (int i = 0; i < 4; ++i) {
    const std::int64_t out = i == 3 ? 3 : d;
    conv("synthesis.deconv" + std::to_string(i), {d, out, 5, 5}, out);
  }
  conv("hyper_encoder.conv0", {hd, d, 3, 3}, hd);
  conv("hyper_encoder.conv1", {hd, hd, 5, 5}, hd);
  conv("hyper_encoder.conv2", {hd, hd, 5, 5}, hd);
  conv("hyper_decoder.deconv0", {hd, hd, 5, 5}, hd);
  conv("hyper_decoder.deconv1", {hd, d, 5, 5}, d);
  conv("hyper_decoder.conv2", {d, d, 3, 3}, d);
  add("hyper.scales", {hd});

  conv("fusion.conv_in", {d, 2 * d, 3, 3}, d);
  for (int r = 0; r < 2; ++r) {
    for (int k = 0; k < 2; ++k) {
      conv("fusion.res" + std::to_string(r) + ".conv" + std::to_string(k), {d, d, 3, 3}, d);
    }
  }
  add("prior.first_view", {d});
  add("prior.constant_token", {d});

  conv("entropy.proj", {t, d}, t);
  add("entropy.id_estimated", {t});
  add("entropy.id_content", {t});
  for (int b = 0; b < c.num_blocks; ++b) {
    const std::string p = "entropy.block" + std::to_string(b);
    conv(p + ".qkv", {3 * t, t}, 3 * t);
    conv(p + ".attn_proj", {t, t}, t);
    add(p + ".rel_bias", {table, c.num_heads});
    add(p + ".norm1.gain", {t});
    add(p + ".norm1.bias", {t});
    conv(p + ".fc1", {m, t}, m);
    conv(p + ".fc2", {t, m}, t);
    add(p + ".norm2.gain", {t});
    add(p + ".norm2.bias", {t});
  }
  conv("entropy.epm.fc0", {t, t}, t);
  conv("entropy.epm.fc1", {t, t}, t);
  conv("entropy.epm.fc2", {2 * d, t}, 2 * d);
  return specs;
}

void WeightStore::add(std::string name, Tensor value) {
  if (name.empty() || name.size() > 0xFFFF) fail(ErrorCode::kSchema, "invalid entry name");
  if (index_.count(name)) fail(ErrorCode::kSchema, "duplicate entry " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

void WeightStore::set(const std::string& name, Tensor value) {
  Tensor& slot = mutable_at(name);
  if (slot.shape() != value.shape()) fail(ErrorCode::kSchema, "shape change for " + name);
  slot = std::move(value);
}

const Tensor& WeightStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::kSchema, "missing weight entry " + name);
  return entries_[it->second].second;
}

Tensor& WeightStore::mutable_at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::kSchema, "missing weight entry " + name);
  return entries_[it->second].second;
}

void validate_manifest(const WeightStore& store) {
  store.config().validate();
  for (const auto& spec : weight_manifest(store.config())) {
    if (!store.contains(spec.name)) fail(ErrorCode::kSchema, "missing weight entry " + spec.name);
    const auto& t = store.at(spec.name);
    if (t.shape() != spec.shape) {
      fail(ErrorCode::kSchema, spec.name + " has extents " + shape_string(t.shape()) + ", expected " +
                                   shape_string(spec.shape));
    }
  }
}

Bytes serialize_weights(const WeightStore& store) {
  ByteWriter out;
  out.raw(std::string_view(kMagic, 4));
  out.u32(kWeightsFormatVersion);
  write_config(out, store.config());
  out.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, t] : store.entries()) {
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.raw(name);
    out.u8(static_cast<std::uint8_t>(t.rank()));
    for (auto e : t.shape()) out.u32(static_cast<std::uint32_t>(e));
  }
  for (const auto& entry : store.entries()) {
    for (float v : entry.second.data()) out.f32(v);
  }
  const auto crc = crc32(out.bytes());
  out.u32(crc);
  return out.take();
}

WeightStore parse_weights(std::span<const std::uint8_t> bytes, ManifestCheck check) {
  ByteReader in(bytes);
  const auto magic = in.raw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) fail(ErrorCode::kBadMagic, "not a CWTS weight file");
  const auto version = in.u32();
  if (version != kWeightsFormatVersion) {
    fail(ErrorCode::kUnsupportedVersion, "CWTS version " + std::to_string(version));
  }
  const ModelConfig config = read_config(in);
  const auto count = in.u32();

  struct Header {
    std::string name;
    Shape shape;
  };
  std::vector<Header> headers;
  for (std::uint32_t i = 0; i < count; ++i) {
    Header h;
    const auto len = in.u16();
    const auto name = in.raw(len);
    h.name.assign(name.begin(), name.end());
    const auto rank = in.u8();
    if (rank > 4) fail(ErrorCode::kFormat, "entry rank above 4: " + h.name);
    for (int r = 0; r < rank; ++r) h.shape.push_back(in.u32());
    headers.push_back(std::move(h));
  }

  WeightStore store(config);
  for (auto& h : headers) {
    const auto n = shape_numel(h.shape);
    if (static_cast<std::uint64_t>(n) * 4 > in.remaining()) fail(ErrorCode::kTruncated, "payload of " + h.name);
    std::vector<float> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = in.f32();
    store.add(std::move(h.name), Tensor(std::move(h.shape), std::move(values)));
  }
  const auto body_size = in.position();
  const auto stored_crc = in.u32();
  if (in.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after CWTS trailer");
  if (crc32(bytes.first(body_size)) != stored_crc) fail(ErrorCode::kChecksum, "CWTS CRC mismatch");

  if (check == ManifestCheck::kRequired) validate_manifest(store);
  return store;
}

void save_weights(const WeightStore& store, std::ostream& sink) {
  const auto bytes = serialize_weights(store);
  sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!sink) fail(ErrorCode::kIo, "failed writing weights");
}

WeightStore load_weights(std::istream& source, ManifestCheck check) {
  Bytes bytes((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  if (source.bad()) fail(ErrorCode::kIo, "failed reading weights");
  return parse_weights(bytes, check);
}

WeightStore load_weights_file(const std::string& path, ManifestCheck check) {
  return parse_weights(read_file(path), check);
}

std::uint32_t weights_digest(const WeightStore& store) {
  // Not the whole image: CRC-32 over data followed by its own CRC is a
  // constant, so the trailing checksum field is left out.
  const Bytes image = serialize_weights(store);
  return crc32(std::span<const std::uint8_t>(image.data(), image.size() - 4));
}

WeightStore make_random_weights(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  WeightStore store(config);
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const auto& spec : weight_manifest(config)) {
    Tensor t(spec.shape);
    double lo = -0.1, hi = 0.1;
    if (ends_with(spec.name, ".weight")) {
      // Fan-in: everything but the output axis (axis 1 for transposed convs).
      const bool transposed = spec.name.find("deconv") != std::string::npos;
      const auto fan_in = transposed ? spec.shape[0] * spec.shape[2] * spec.shape[3]
                                     : shape_numel(spec.shape) / spec.shape[0];
      hi = 1.0 / std::sqrt(double(fan_in));
      lo = -hi;
    } else if (ends_with(spec.name, ".gain")) {
      lo = 0.9, hi = 1.1;
    } else if (spec.name == "hyper.scales") {
      lo = 0.5, hi = 4.0;
    } else if (ends_with(spec.name, "rel_bias") || spec.name.rfind("entropy.id_", 0) == 0 ||
               spec.name.rfind("prior.", 0) == 0) {
      lo = -1.0, hi = 1.0;
    }
    for (auto& v : t.data()) v = static_cast<float>(uniform(rng, lo, hi));
    store.add(spec.name, std::move(t));
  }
  return store;
}

}  // namespace camsic
