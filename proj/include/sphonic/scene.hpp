#pragma once

#include <cstdint>
#include <vector>

#include "sphonic/rng.hpp"
#include "sphonic/sht.hpp"
#include "sphonic/stft.hpp"
#include "sphonic/tensor.hpp"

namespace sphonic {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

// Unit vector for a direction (theta from +z, phi from +x).
Vec3 unit_vector(const Direction& dir);

// Cartesian mic position relative to the array center.
Vec3 mic_position(const Mic& mic);

struct RoomSpec {
  Vec3 dims{6.0, 5.0, 4.0};
  double rt60 = 0.5;
  int fs = 16000;
  double c = 343.0;
};

struct PlaneWaveSource {
  Direction psi{kPi / 2.0, 0.0};
  ComplexMatrix spectrum;  // [frame][bin]
};

// 8 r^2 f / c: minimum source distance for the plane-wave approximation.
double far_field_threshold(double r, double f, double c);

// v_i(k) = exp(+j k (r_i . u(psi))) with u pointing toward the source;
// result is [mic][bin].
ComplexMatrix steering_vector(const ArrayGeometry& geom, const Direction& psi,
                              const FrequencyGrid& grid);

// p_i(k) = sum_l v_i(k, psi_l) s_l(k) + n_i(k). Pass nullptr for no noise.
TFSpectrum simulate_freefield(const std::vector<PlaneWaveSource>& sources,
                              const ArrayGeometry& geom, const FrequencyGrid& grid,
                              const TFSpectrum* noise);

// Sabine: alpha = 0.161 V / (S rt60), clamped to 0.9999. Throws when the
// requested rt60 is infeasible for the room (alpha > 1 before the clamp).
double sabine_absorption(const RoomSpec& room);

// Allen-Berkley image method, omnidirectional mics, uniform reflectivity
// sqrt(1 - alpha), 8-tap Hann-windowed-sinc fractional delays, no high-pass
// post-filter. max_order < 0 means all images that fit the response length.
Waveform image_method_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic, int max_order = -1);

struct MixResult {
  std::vector<std::vector<double>> mixture;
  std::vector<std::vector<double>> noise_scaled;
  double noise_scale = 1.0;
};

// Scales noise by one global factor so the reference channel hits snr_db.
MixResult mix_at_snr(const std::vector<std::vector<double>>& clean,
                     const std::vector<std::vector<double>>& noise, double snr_db, int ref_channel);

enum class NoiseKind { white, point };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::white;
  Direction dir{kPi / 2.0, kPi};  // point-source direction from array center
  double distance = 1.0;
};

struct SceneSpec {
  RoomSpec room;
  Vec3 array_center{3.0, 2.5, 2.0};
  ArrayGeometry geom = uca_geometry(16, 0.035);
  double source_distance = 1.0;
  Direction source_dir{kPi / 2.0, 0.0};
  NoiseSpec noise;
  double snr_db = 0.0;
  uint64_t seed = 0;
  bool anechoic_target = false;  // target direct path only instead of full reverb
  int ref_mic = 0;
};

struct SceneRender {
  std::vector<std::vector<double>> mixture;
  std::vector<std::vector<double>> clean_ref;
  std::vector<std::vector<double>> noise_scaled;
  Vec3 source_pos;
  Vec3 noise_pos;          // meaningful for point noise only
  double sabine_alpha = 0.0;
  double far_field_threshold_m = 0.0;
  bool far_field_ok = true;
  double noise_scale = 1.0;
};

// Convolves speech (and point noise, if configured) with per-mic RIRs, mixes
// at snr_db. White noise is independent Gaussian per mic drawn from the scene
// seed. All outputs are trimmed to the speech length.
SceneRender synth_scene(const SceneSpec& spec, const std::vector<double>& speech,
                        const std::vector<double>& noise_signal);

}  // namespace sphonic
