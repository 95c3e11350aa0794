#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sphonic/scene.hpp"
#include "sphonic/train.hpp"

namespace sphonic {

// Every field defaults to the reference setup (16-mic UCA r=0.035, 6x5x4
// room, d=1 m, N=4, 400/200 STFT, SNR grid {-10..10}, RT60 grid {0.2..1.0}),
// so an empty config reproduces it.
struct ToolConfig {
  std::uint64_t seed = 0;
  int fs = 16000;
  int order = 4;
  StftConfig stft;

  struct Array {
    std::string type = "uca";  // uca | design
    int count = 16;
    double radius = 0.035;
    int design_t = 8;  // used when type == design
  } array;

  struct Room {
    Vec3 dims{6.0, 5.0, 4.0};
    double c = 343.0;
  } room;

  struct Scene {
    std::vector<double> snr_grid{-10.0, -5.0, 0.0, 5.0, 10.0};
    std::vector<double> rt60_grid{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    int scenes_per_cell = 1;
    double duration_s = 1.0;
    double source_distance = 1.0;
    bool random_placement = true;
    double wall_margin = 0.5;
    std::string noise = "white";  // white | pink | point
    double noise_distance = 1.0;
    bool anechoic_target = false;
    int ref_mic = 0;
    std::string speech_wav;  // optional external sources
    std::string noise_wav;
  } scene;

  struct Enhance {
    std::string estimator = "oracle-mag";  // oracle-sub | oracle-mag | wiener | linear
    double wiener_floor = 0.05;
    std::string encoder = "quadrature";  // quadrature | ls
    double ridge = 1e-8;
    std::string model;  // model container path for the linear estimator
  } enhance;

  TrainConfig train;
};

// Parses and validates a JSON config. Unknown keys, wrong types, and
// out-of-range values raise ConfigError. An empty path returns the defaults.
ToolConfig load_config(const std::string& path);
ToolConfig parse_config(const std::string& json_text);

// Canonical JSON snapshot (fixed key order) of every effective value.
std::string config_snapshot(const ToolConfig& cfg);

// FNV-1a 64 over the canonical snapshot, hex string.
std::string config_hash(const ToolConfig& cfg);

ArrayGeometry make_geometry(const ToolConfig& cfg);

}  // namespace sphonic
