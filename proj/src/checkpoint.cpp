#include "tbench/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "tbench/error.hpp"

namespace tbench {

namespace {

constexpr char kMagic[4] = {'T', 'B', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_tensor(std::ostream& out, const std::string& name,
                  const std::vector<double>& data) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(out, data.size());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::pair<std::string, std::vector<double>> read_tensor(std::istream& in) {
  std::uint32_t len = read_u32(in);
  if (len > 64) throw IoError("checkpoint: implausible tensor name length");
  std::string name(len, '\0');
  in.read(name.data(), len);
  std::uint64_t count = read_u64(in);
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError("checkpoint: truncated tensor data");
  return {name, data};
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  const Architecture& a = params.arch;
  write_u32(out, static_cast<std::uint32_t>(a.input_side));
  write_u32(out, static_cast<std::uint32_t>(a.input_channels));
  write_u32(out, static_cast<std::uint32_t>(a.conv1_channels));
  write_u32(out, static_cast<std::uint32_t>(a.conv2_channels));
  write_u32(out, static_cast<std::uint32_t>(a.dense1_units));
  write_u32(out, static_cast<std::uint32_t>(a.num_classes));
  write_u64(out, a.hash());

  for (LayerName n : kLayerOrder) {
    const LayerParams& lp = params.layer(n);
    write_tensor(out, std::string(to_string(n)) + ".weight", lp.weight);
    write_tensor(out, std::string(to_string(n)) + ".bias", lp.bias);
  }
  if (!out) throw IoError("checkpoint write failed: " + path.string());

  nlohmann::json side;
  side["format_version"] = kVersion;
  side["arch"] = {{"input_side", a.input_side},
                  {"input_channels", a.input_channels},
                  {"conv1_channels", a.conv1_channels},
                  {"conv2_channels", a.conv2_channels},
                  {"dense1_units", a.dense1_units},
                  {"num_classes", a.num_classes}};
  side["arch_hash"] = a.hash();
  nlohmann::json layers = nlohmann::json::array();
  for (LayerName n : kLayerOrder) {
    const LayerParams& lp = params.layer(n);
    layers.push_back({{"name", to_string(n)},
                      {"weight_count", lp.weight.size()},
                      {"bias_count", lp.bias.size()}});
  }
  side["layers"] = layers;
  std::ofstream sj(path.string() + ".json");
  sj << side.dump(1) << "\n";
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a checkpoint file: " + path.string());
  std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));

  Architecture a;
  a.input_side = static_cast<int>(read_u32(in));
  a.input_channels = static_cast<int>(read_u32(in));
  a.conv1_channels = static_cast<int>(read_u32(in));
  a.conv2_channels = static_cast<int>(read_u32(in));
  a.dense1_units = static_cast<int>(read_u32(in));
  a.num_classes = static_cast<int>(read_u32(in));
  std::uint64_t stored_hash = read_u64(in);
  if (stored_hash != a.hash())
    throw IoError("checkpoint arch hash mismatch: " + path.string());

  ModelParams p = zero_gradients(a);  // correct shapes, then overwrite
  for (LayerName n : kLayerOrder) {
    auto [wname, wdata] = read_tensor(in);
    auto [bname, bdata] = read_tensor(in);
    LayerParams& lp = p.layer(n);
    if (wname != std::string(to_string(n)) + ".weight" ||
        bname != std::string(to_string(n)) + ".bias" ||
        wdata.size() != lp.weight.size() || bdata.size() != lp.bias.size())
      throw IoError("checkpoint layer mismatch at '" + wname + "': " + path.string());
    lp.weight = std::move(wdata);
    lp.bias = std::move(bdata);
  }
  return p;
}

}  // namespace tbench
