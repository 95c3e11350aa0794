#include "sphonic/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sphonic/errors.hpp"

namespace sphonic {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'P', 'H', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_doubles(std::ofstream& f, const std::vector<cplx>& v) {
  for (const cplx& c : v) {
    const double re = c.real(), im = c.imag();
    f.write(reinterpret_cast<const char*>(&re), sizeof re);
    f.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

void read_doubles(std::ifstream& f, std::vector<cplx>* v) {
  for (cplx& c : *v) {
    double re = 0, im = 0;
    f.read(reinterpret_cast<char*>(&re), sizeof re);
    f.read(reinterpret_cast<char*>(&im), sizeof im);
    c = cplx{re, im};
  }
}

}  // namespace

void save_stages(const std::string& path, const std::vector<EstimatorStage>& stages, int order,
                 const std::string& config_hash) {
  nlohmann::ordered_json header;
  header["tool"] = "sphonic";
  header["container_version"] = kVersion;
  header["order"] = order;
  header["config_hash"] = config_hash;
  auto& js = header["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    if (s.kind != EstimatorKind::linear)
      throw ConfigError("save_stages: only linear stages are serializable");
    js.push_back({{"kind", "linear"},
                  {"bins", s.linear.bins},
                  {"out", s.linear.out_dim},
                  {"in", s.linear.in_dim}});
  }
  const std::string head = header.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_stages: cannot open " + path);
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  const std::uint64_t head_len = head.size();
  f.write(reinterpret_cast<const char*>(&head_len), sizeof head_len);
  f.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& s : stages) {
    write_doubles(f, s.linear.w);
    write_doubles(f, s.linear.bias);
  }
  if (!f) throw IoError("save_stages: write failed: " + path);
}

LoadedModel load_stages(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_stages: cannot open " + path);
  char magic[4] = {};
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("load_stages: not a model container: " + path);
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != kVersion) throw IoError("load_stages: unsupported container version");
  std::uint64_t head_len = 0;
  f.read(reinterpret_cast<char*>(&head_len), sizeof head_len);
  std::string head(head_len, '\0');
  f.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!f) throw IoError("load_stages: truncated header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_stages: bad header JSON: " + std::string(e.what()));
  }

  LoadedModel out;
  out.order = header.at("order").get<int>();
  out.config_hash = header.value("config_hash", "");
  for (const auto& js : header.at("stages")) {
    if (js.at("kind").get<std::string>() != "linear")
      throw IoError("load_stages: unsupported stage kind");
    EstimatorStage s;
    s.kind = EstimatorKind::linear;
    s.linear.bins = js.at("bins").get<std::size_t>();
    s.linear.out_dim = js.at("out").get<std::size_t>();
    s.linear.in_dim = js.at("in").get<std::size_t>();
    s.linear.w.assign(s.linear.bins * s.linear.out_dim * s.linear.in_dim, cplx{});
    s.linear.bias.assign(s.linear.bins * s.linear.out_dim, cplx{});
    out.stages.push_back(std::move(s));
  }
  for (auto& s : out.stages) {
    read_doubles(f, &s.linear.w);
    read_doubles(f, &s.linear.bias);
  }
  if (!f) throw IoError("load_stages: truncated parameter data: " + path);
  return out;
}

}  // namespace sphonic
