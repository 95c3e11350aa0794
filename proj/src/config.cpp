#include "sphonic/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sphonic/errors.hpp"

namespace sphonic {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + where + key + "'");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& where, const char* key, T* dst) {
  if (!obj.contains(key)) return;
  try {
    *dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value type for '" + where + key + "'");
  }
}

void read_vec3(const json& obj, const std::string& where, const char* key, Vec3* dst) {
  if (!obj.contains(key)) return;
  const auto& a = obj.at(key);
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number())
    throw ConfigError("config: '" + where + key + "' must be [x, y, z]");
  *dst = Vec3{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

ToolConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse failure: ") + e.what());
  }

  ToolConfig cfg;
  require_keys(root, "", {"seed", "fs", "order", "stft", "array", "room", "scene", "enhance",
                          "train"});
  read_field(root, "", "seed", &cfg.seed);
  read_field(root, "", "fs", &cfg.fs);
  read_field(root, "", "order", &cfg.order);

  if (root.contains("stft")) {
    const auto& s = root["stft"];
    require_keys(s, "stft.", {"win_len", "hop", "n_fft"});
    read_field(s, "stft.", "win_len", &cfg.stft.win_len);
    read_field(s, "stft.", "hop", &cfg.stft.hop);
    read_field(s, "stft.", "n_fft", &cfg.stft.n_fft);
  }
  if (root.contains("array")) {
    const auto& a = root["array"];
    require_keys(a, "array.", {"type", "count", "radius", "design_t"});
    read_field(a, "array.", "type", &cfg.array.type);
    read_field(a, "array.", "count", &cfg.array.count);
    read_field(a, "array.", "radius", &cfg.array.radius);
    read_field(a, "array.", "design_t", &cfg.array.design_t);
  }
  if (root.contains("room")) {
    const auto& r = root["room"];
    require_keys(r, "room.", {"dims", "c"});
    read_vec3(r, "room.", "dims", &cfg.room.dims);
    read_field(r, "room.", "c", &cfg.room.c);
  }
  if (root.contains("scene")) {
    const auto& s = root["scene"];
    require_keys(s, "scene.",
                 {"snr_grid", "rt60_grid", "scenes_per_cell", "duration_s", "source_distance",
                  "random_placement", "wall_margin", "noise", "noise_distance", "anechoic_target",
                  "ref_mic", "speech_wav", "noise_wav"});
    read_field(s, "scene.", "snr_grid", &cfg.scene.snr_grid);
    read_field(s, "scene.", "rt60_grid", &cfg.scene.rt60_grid);
    read_field(s, "scene.", "scenes_per_cell", &cfg.scene.scenes_per_cell);
    read_field(s, "scene.", "duration_s", &cfg.scene.duration_s);
    read_field(s, "scene.", "source_distance", &cfg.scene.source_distance);
    read_field(s, "scene.", "random_placement", &cfg.scene.random_placement);
    read_field(s, "scene.", "wall_margin", &cfg.scene.wall_margin);
    read_field(s, "scene.", "noise", &cfg.scene.noise);
    read_field(s, "scene.", "noise_distance", &cfg.scene.noise_distance);
    read_field(s, "scene.", "anechoic_target", &cfg.scene.anechoic_target);
    read_field(s, "scene.", "ref_mic", &cfg.scene.ref_mic);
    read_field(s, "scene.", "speech_wav", &cfg.scene.speech_wav);
    read_field(s, "scene.", "noise_wav", &cfg.scene.noise_wav);
  }
  if (root.contains("enhance")) {
    const auto& e = root["enhance"];
    require_keys(e, "enhance.", {"estimator", "wiener_floor", "encoder", "ridge", "model"});
    read_field(e, "enhance.", "estimator", &cfg.enhance.estimator);
    read_field(e, "enhance.", "wiener_floor", &cfg.enhance.wiener_floor);
    read_field(e, "enhance.", "encoder", &cfg.enhance.encoder);
    read_field(e, "enhance.", "ridge", &cfg.enhance.ridge);
    read_field(e, "enhance.", "model", &cfg.enhance.model);
  }
  if (root.contains("train")) {
    const auto& t = root["train"];
    require_keys(t, "train.",
                 {"optimizer", "lr", "epochs", "patience", "teacher_forcing", "joint",
                  "group_weights"});
    std::string opt = "adam";
    read_field(t, "train.", "optimizer", &opt);
    if (opt == "adam") {
      cfg.train.optimizer = TrainConfig::Optimizer::adam;
    } else if (opt == "sgd") {
      cfg.train.optimizer = TrainConfig::Optimizer::sgd;
    } else {
      throw ConfigError("config: train.optimizer must be 'adam' or 'sgd'");
    }
    read_field(t, "train.", "lr", &cfg.train.lr);
    read_field(t, "train.", "epochs", &cfg.train.epochs);
    read_field(t, "train.", "patience", &cfg.train.patience);
    read_field(t, "train.", "teacher_forcing", &cfg.train.teacher_forcing);
    read_field(t, "train.", "joint", &cfg.train.joint);
    read_field(t, "train.", "group_weights", &cfg.train.group_weights);
  }

  // range checks
  if (cfg.fs <= 0) throw ConfigError("config: fs must be positive");
  if (cfg.order < 1 || cfg.order > 8) throw ConfigError("config: order must be in [1, 8]");
  if (cfg.array.type != "uca" && cfg.array.type != "design")
    throw ConfigError("config: array.type must be 'uca' or 'design'");
  if (cfg.array.count < 1 || cfg.array.radius <= 0.0)
    throw ConfigError("config: bad array count or radius");
  if (cfg.scene.snr_grid.empty() || cfg.scene.rt60_grid.empty())
    throw ConfigError("config: snr_grid and rt60_grid must be non-empty");
  for (double rt : cfg.scene.rt60_grid) {
    if (rt < 0.05 || rt > 3.0) throw ConfigError("config: rt60 values must lie in [0.05, 3.0]");
  }
  if (cfg.scene.scenes_per_cell < 1) throw ConfigError("config: scenes_per_cell must be >= 1");
  if (cfg.scene.duration_s <= 0.0) throw ConfigError("config: duration_s must be positive");
  if (cfg.scene.noise != "white" && cfg.scene.noise != "pink" && cfg.scene.noise != "point")
    throw ConfigError("config: scene.noise must be white, pink, or point");
  if (cfg.scene.ref_mic < 0 || cfg.scene.ref_mic >= cfg.array.count)
    throw ConfigError("config: scene.ref_mic out of range");
  if (cfg.enhance.estimator != "oracle-sub" && cfg.enhance.estimator != "oracle-mag" &&
      cfg.enhance.estimator != "wiener" && cfg.enhance.estimator != "linear")
    throw ConfigError("config: enhance.estimator must be one of oracle-sub, oracle-mag, wiener, linear");
  if (cfg.enhance.encoder != "quadrature" && cfg.enhance.encoder != "ls")
    throw ConfigError("config: enhance.encoder must be 'quadrature' or 'ls'");
  if (cfg.enhance.ridge < 0.0) throw ConfigError("config: enhance.ridge must be >= 0");
  if (cfg.train.lr < 0.0) throw ConfigError("config: train.lr must be >= 0");
  if (cfg.train.epochs < 1) throw ConfigError("config: train.epochs must be >= 1");
  if (cfg.train.patience < 1) throw ConfigError("config: train.patience must be >= 1");
  return cfg;
}

ToolConfig load_config(const std::string& path) {
  if (path.empty()) return ToolConfig{};
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_snapshot(const ToolConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["fs"] = cfg.fs;
  j["order"] = cfg.order;
  j["stft"] = {{"win_len", cfg.stft.win_len}, {"hop", cfg.stft.hop}, {"n_fft", cfg.stft.n_fft}};
  j["array"] = {{"type", cfg.array.type},
                {"count", cfg.array.count},
                {"radius", cfg.array.radius},
                {"design_t", cfg.array.design_t}};
  j["room"] = {{"dims", {cfg.room.dims.x, cfg.room.dims.y, cfg.room.dims.z}}, {"c", cfg.room.c}};
  j["scene"] = {{"snr_grid", cfg.scene.snr_grid},
                {"rt60_grid", cfg.scene.rt60_grid},
                {"scenes_per_cell", cfg.scene.scenes_per_cell},
                {"duration_s", cfg.scene.duration_s},
                {"source_distance", cfg.scene.source_distance},
                {"random_placement", cfg.scene.random_placement},
                {"wall_margin", cfg.scene.wall_margin},
                {"noise", cfg.scene.noise},
                {"noise_distance", cfg.scene.noise_distance},
                {"anechoic_target", cfg.scene.anechoic_target},
                {"ref_mic", cfg.scene.ref_mic},
                {"speech_wav", cfg.scene.speech_wav},
                {"noise_wav", cfg.scene.noise_wav}};
  j["enhance"] = {{"estimator", cfg.enhance.estimator},
                  {"wiener_floor", cfg.enhance.wiener_floor},
                  {"encoder", cfg.enhance.encoder},
                  {"ridge", cfg.enhance.ridge},
                  {"model", cfg.enhance.model}};
  j["train"] = {{"optimizer", cfg.train.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd"},
                {"lr", cfg.train.lr},
                {"epochs", cfg.train.epochs},
                {"patience", cfg.train.patience},
                {"teacher_forcing", cfg.train.teacher_forcing},
                {"joint", cfg.train.joint},
                {"group_weights", cfg.train.group_weights}};
  return j.dump(2);
}

std::string config_hash(const ToolConfig& cfg) {
  const std::string s = config_snapshot(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

ArrayGeometry make_geometry(const ToolConfig& cfg) {
  if (cfg.array.type == "uca") return uca_geometry(cfg.array.count, cfg.array.radius);
  return design_geometry(cfg.array.design_t, cfg.array.radius);
}

}  // namespace sphonic
