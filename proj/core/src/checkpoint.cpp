#include "vnoip/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "binio.hpp"
#include "vnoip/errors.hpp"

namespace vnoip {

using namespace binio;

namespace {

constexpr char kMagic[4] = {'V', 'N', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, ModelParams& params, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint " + path);

  std::uint64_t count = 0;
  params.visit([&count](const std::string&, Tensor&) { ++count; });

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_i64(out, meta.epoch);
  write_f64(out, meta.best_val_msle);
  write_u64(out, meta.config_hash);
  write_u64(out, count);
  params.visit([&out](const std::string& name, Tensor& t) {
    write_string(out, name);
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::int64_t e : t.shape()) write_i64(out, e);
    for (double v : t.values()) write_f64(out, v);
  });
  if (!out) throw ConfigError("short write to checkpoint " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, ModelParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("bad magic in checkpoint " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointMeta meta;
  meta.epoch = read_i64(in);
  meta.best_val_msle = read_f64(in);
  meta.config_hash = read_u64(in);

  const std::uint64_t count = read_u64(in);
  std::map<std::string, Tensor> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const std::uint32_t rank = read_u32(in);
    std::vector<std::int64_t> shape(rank);
    for (auto& e : shape) e = read_i64(in);
    std::vector<double> values(static_cast<std::size_t>(shape_size(shape)));
    for (double& v : values) v = read_f64(in);
    if (!in) throw ParseError("truncated checkpoint " + path);
    if (!entries.emplace(name, Tensor(std::move(shape), std::move(values))).second) {
      throw ParseError("duplicate checkpoint entry `" + name + "`");
    }
  }

  std::size_t matched = 0;
  params.visit([&](const std::string& name, Tensor& t) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      throw ParseError("checkpoint is missing parameter `" + name + "`");
    }
    if (it->second.shape() != t.shape()) {
      throw ParseError("checkpoint entry `" + name + "` has shape " +
                       it->second.shape_string() + ", expected " + t.shape_string());
    }
    t = it->second;
    ++matched;
  });
  if (matched != entries.size()) {
    for (const auto& [name, tensor] : entries) {
      bool known = false;
      params.visit([&](const std::string& n, Tensor&) { known |= (n == name); });
      if (!known) throw ParseError("checkpoint contains unknown parameter `" + name + "`");
    }
  }
  return meta;
}

}  // namespace vnoip
