#include "sar2rgb/trainer/checkpoint.hpp"

#include <cstring>
#include <map>

#include "sar2rgb/detail/bytes.hpp"
#include "sar2rgb/error.hpp"

namespace sar2rgb::trainer {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

std::vector<std::uint8_t> encode_tensors(const std::vector<NamedTensor>& tensors) {
  ByteWriter w;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.shape.size()));
    for (int d : t.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : t.data) w.put<float>(v);
  }
  return w.take();
}

std::vector<NamedTensor> decode_tensors(const std::vector<std::uint8_t>& bytes, const std::string& section) {
  ByteReader r(bytes.data(), bytes.size(), "checkpoint section '" + section + "'");
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.get_string(r.get<std::uint16_t>());
    const auto ndim = r.get<std::uint8_t>();
    std::uint64_t n = 1;
    for (unsigned d = 0; d < ndim; ++d) {
      t.shape.push_back(static_cast<int>(r.get<std::uint32_t>()));
      n *= static_cast<std::uint64_t>(t.shape.back());
    }
    if (n * sizeof(float) > r.remaining()) throw FormatError("tensor '" + t.name + "' overruns its section");
    t.data.resize(n);
    for (auto& v : t.data) v = r.get<float>();
    out.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint section '" + section + "'");
  return out;
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> sections;
  sections.emplace_back("config", to_bytes(nlohmann::json(ckpt.config).dump()));
  nlohmann::json state{{"step", ckpt.step},
                       {"sampler_epoch", ckpt.sampler.epoch},
                       {"sampler_cursor", ckpt.sampler.cursor},
                       {"generator_adam_t", ckpt.generator_opt.t}};
  if (ckpt.discriminator_opt) state["discriminator_adam_t"] = ckpt.discriminator_opt->t;
  sections.emplace_back("state", to_bytes(state.dump()));
  sections.emplace_back("generator", encode_tensors(ckpt.generator));
  sections.emplace_back("generator.adam_m", encode_tensors(ckpt.generator_opt.m));
  sections.emplace_back("generator.adam_v", encode_tensors(ckpt.generator_opt.v));
  if (ckpt.discriminator) sections.emplace_back("discriminator", encode_tensors(*ckpt.discriminator));
  if (ckpt.discriminator_opt) {
    sections.emplace_back("discriminator.adam_m", encode_tensors(ckpt.discriminator_opt->m));
    sections.emplace_back("discriminator.adam_v", encode_tensors(ckpt.discriminator_opt->v));
  }

  ByteWriter w;
  w.put_bytes(std::string_view(kCheckpointMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put<std::uint64_t>(payload.size());
    w.put_bytes(payload);
    w.put<std::uint32_t>(detail::crc32(payload.data(), payload.size()));
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("bad magic: not an S2CK checkpoint");
  }
  std::map<std::string, std::vector<std::uint8_t>> sections;
  try {
    ByteReader r(bytes.data(), bytes.size(), "checkpoint");
    r.take(4);
    const auto version = r.get<std::uint32_t>();
    if (version > kCheckpointVersion || version == 0) {
      throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (reader supports " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::string name = r.get_string(r.get<std::uint16_t>());
      const auto len = r.get<std::uint64_t>();
      if (len > r.remaining()) {
        throw FormatError("checksum failure: section '" + name + "' is truncated");
      }
      const auto* p = r.take(static_cast<std::size_t>(len));
      std::vector<std::uint8_t> payload(p, p + len);
      if (r.remaining() < 4) throw FormatError("checksum failure: section '" + name + "' lacks its checksum");
      const auto crc = r.get<std::uint32_t>();
      if (crc != detail::crc32(payload.data(), payload.size())) {
        throw FormatError("checksum failure in checkpoint section '" + name + "'");
      }
      sections.emplace(name, std::move(payload));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint sections");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    if (msg.find("version") != std::string::npos || msg.find("checksum") != std::string::npos) throw;
    throw FormatError("checksum failure: corrupt checkpoint (" + msg + ")");
  }

  auto section = [&](const std::string& name) -> const std::vector<std::uint8_t>& {
    const auto it = sections.find(name);
    if (it == sections.end()) throw FormatError("checkpoint lacks section '" + name + "'");
    return it->second;
  };
  Checkpoint ckpt;
  try {
    const auto& cfg = section("config");
    ckpt.config = nlohmann::json::parse(cfg.begin(), cfg.end()).get<TrainConfig>();
    const auto& st = section("state");
    const auto state = nlohmann::json::parse(st.begin(), st.end());
    ckpt.step = state.at("step").get<std::int64_t>();
    ckpt.sampler.epoch = state.at("sampler_epoch").get<std::uint64_t>();
    ckpt.sampler.cursor = state.at("sampler_cursor").get<std::uint64_t>();
    ckpt.generator_opt.t = state.at("generator_adam_t").get<std::int64_t>();
    ckpt.generator = decode_tensors(section("generator"), "generator");
    ckpt.generator_opt.m = decode_tensors(section("generator.adam_m"), "generator.adam_m");
    ckpt.generator_opt.v = decode_tensors(section("generator.adam_v"), "generator.adam_v");
    if (sections.contains("discriminator")) {
      ckpt.discriminator = decode_tensors(section("discriminator"), "discriminator");
      AdamState opt;
      opt.t = state.at("discriminator_adam_t").get<std::int64_t>();
      opt.m = decode_tensors(section("discriminator.adam_m"), "discriminator.adam_m");
      opt.v = decode_tensors(section("discriminator.adam_v"), "discriminator.adam_v");
      ckpt.discriminator_opt = std::move(opt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid checkpoint metadata: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid checkpoint config: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint '" + path.string() + "' does not exist");
  try {
    return decode_checkpoint(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace sar2rgb::trainer
