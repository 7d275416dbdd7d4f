#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sar2rgb/sargen/models.hpp"
#include "sar2rgb/trainer/config.hpp"

namespace sar2rgb::trainer {

using sargen::NamedTensor;

inline constexpr char kCheckpointMagic[4] = {'S', '2', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct AdamState {
  std::int64_t t = 0;
  std::vector<NamedTensor> m;
  std::vector<NamedTensor> v;
  bool operator==(const AdamState&) const = default;
};

// Position of the epoch-wise batch sampler.
struct SamplerState {
  std::uint64_t epoch = 0;
  std::uint64_t cursor = 0;
  bool operator==(const SamplerState&) const = default;
};

struct Checkpoint {
  TrainConfig config;
  std::int64_t step = 0;
  std::vector<NamedTensor> generator;
  std::optional<std::vector<NamedTensor>> discriminator;
  AdamState generator_opt;
  std::optional<AdamState> discriminator_opt;
  SamplerState sampler;

  bool operator==(const Checkpoint&) const = default;
};

// "S2CK" | u32 version | u32 section count | sections, each
//   u16 name_len | name | u64 payload_len | payload | u32 crc32(payload)
// Tensor sections: u32 count, then per tensor u16 name_len | name | u8 ndim |
// u32 dims[ndim] | f32 data. All little-endian.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sar2rgb::trainer
