#pragma once

// Model configuration and the "CWTS" weight container.
//
// Layout (all integers little-endian):
//   "CWTS" | u32 version | config block | u32 entry count
//   | entry table: u16 name length, name bytes, u8 rank, u32 extents[rank]
//   | payload: float32 values of every entry, in table order
//   | u32 CRC-32 of every preceding byte
// Config block: i32 latent_dim, transformer_dim, mlp_dim, num_blocks,
// num_heads, window_size, hyper_dim, downsample_factor; f64 sigma_min,
// sigma_max; i32 symbol_min, symbol_max, decode_steps.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "camsic/bytes.hpp"
#include "camsic/tensor.hpp"

namespace camsic {

struct ModelConfig {
  int latent_dim = 32;
  int transformer_dim = 64;
  int mlp_dim = 128;
  int num_blocks = 2;
  int num_heads = 4;
  int window_size = 4;
  int hyper_dim = 32;
  int downsample_factor = 16;
  double sigma_min = 0.11;
  double sigma_max = 256.0;
  int symbol_min = -128;
  int symbol_max = 127;
  int decode_steps = 8;

  /// Trainable-on-a-desk defaults (the member initializers above).
  static ModelConfig desk() { return {}; }
  /// Published full-size dimensions; far too large for the toy trainer.
  static ModelConfig full_scale();

  int alphabet_size() const { return symbol_max - symbol_min + 1; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void write_config(ByteWriter& out, const ModelConfig& config);
ModelConfig read_config(ByteReader& in);

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

struct EntrySpec {
  std::string name;
  Shape shape;
};

/// Every entry the codec reads, with its required extents.
std::vector<EntrySpec> weight_manifest(const ModelConfig& config);

class WeightStore {
 public:
  WeightStore() = default;
  explicit WeightStore(ModelConfig config) : config_(config) {}

  const ModelConfig& config() const noexcept { return config_; }

  void add(std::string name, Tensor value);
  /// Replaces an existing entry's values; shape must be unchanged.
  void set(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor& at(const std::string& name) const;
  Tensor& mutable_at(const std::string& name);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }

 private:
  ModelConfig config_;
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Raises kSchema naming the first missing or misshapen entry.
void validate_manifest(const WeightStore& store);

enum class ManifestCheck { kRequired, kSkip };

Bytes serialize_weights(const WeightStore& store);
WeightStore parse_weights(std::span<const std::uint8_t> bytes,
                          ManifestCheck check = ManifestCheck::kRequired);

void save_weights(const WeightStore& store, std::ostream& sink);
WeightStore load_weights(std::istream& source, ManifestCheck check = ManifestCheck::kRequired);
WeightStore load_weights_file(const std::string& path,
                              ManifestCheck check = ManifestCheck::kRequired);

/// Binds a bitstream to the exact weights that produced it.
std::uint32_t weights_digest(const WeightStore& store);

/// Full manifest with fan-in scaled uniform values; deterministic per seed.
WeightStore make_random_weights(const ModelConfig& config, std::uint64_t seed);

}  // namespace camsic
