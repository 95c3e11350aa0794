#include "sphonic/scene.hpp"

#include <cmath>

#include "sphonic/errors.hpp"
#include "sphonic/fft.hpp"

namespace sphonic {

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 unit_vector(const Direction& dir) {
  const double st = std::sin(dir.theta);
  return {st * std::cos(dir.phi), st * std::sin(dir.phi), std::cos(dir.theta)};
}

Vec3 mic_position(const Mic& mic) { return mic.r * unit_vector(mic.dir); }

double far_field_threshold(double r, double f, double c) {
  if (r < 0.0 || f < 0.0 || c <= 0.0) throw DomainError("far_field_threshold: bad arguments");
  return 8.0 * r * r * f / c;
}

ComplexMatrix steering_vector(const ArrayGeometry& geom, const Direction& psi,
                              const FrequencyGrid& grid) {
  const Vec3 u = unit_vector(psi);
  ComplexMatrix v(static_cast<std::size_t>(geom.count()), static_cast<std::size_t>(grid.bins()));
  for (int i = 0; i < geom.count(); ++i) {
    const double proj = dot(mic_position(geom.mics[i]), u);
    for (int b = 0; b < grid.bins(); ++b) {
      const double phase = grid.wavenumber(b) * proj;
      v(i, b) = cplx{std::cos(phase), std::sin(phase)};
    }
  }
  return v;
}

TFSpectrum simulate_freefield(const std::vector<PlaneWaveSource>& sources,
                              const ArrayGeometry& geom, const FrequencyGrid& grid,
                              const TFSpectrum* noise) {
  std::size_t frames = 0;
  for (const auto& s : sources) {
    if (s.spectrum.cols() != static_cast<std::size_t>(grid.bins()))
      throw ShapeError("simulate_freefield: source bin count mismatch");
    if (frames == 0) frames = s.spectrum.rows();
    if (s.spectrum.rows() != frames) throw ShapeError("simulate_freefield: source frame counts differ");
  }
  if (noise) {
    if (noise->slots() != static_cast<std::size_t>(geom.count()) ||
        noise->bins() != static_cast<std::size_t>(grid.bins()))
      throw ShapeError("simulate_freefield: noise shape mismatch");
    if (frames == 0) frames = noise->frames();
    if (noise->frames() != frames) throw ShapeError("simulate_freefield: noise frame count mismatch");
  }

  TFSpectrum out(static_cast<std::size_t>(geom.count()), frames, static_cast<std::size_t>(grid.bins()));
  for (const auto& s : sources) {
    const auto v = steering_vector(geom, s.psi, grid);
    for (int i = 0; i < geom.count(); ++i) {
      for (std::size_t t = 0; t < frames; ++t) {
        for (int b = 0; b < grid.bins(); ++b) {
          out(static_cast<std::size_t>(i), t, b) += v(i, b) * s.spectrum(t, b);
        }
      }
    }
  }
  if (noise) {
    for (std::size_t i = 0; i < out.slots(); ++i) {
      const cplx* src = noise->slot(i);
      cplx* dst = out.slot(i);
      for (std::size_t p = 0; p < frames * out.bins(); ++p) dst[p] += src[p];
    }
  }
  return out;
}

double sabine_absorption(const RoomSpec& room) {
  if (room.dims.x <= 0.0 || room.dims.y <= 0.0 || room.dims.z <= 0.0)
    throw DomainError("sabine_absorption: room dimensions must be positive");
  if (room.rt60 < 0.05 || room.rt60 > 3.0)
    throw DomainError("sabine_absorption: rt60 outside [0.05, 3.0]");
  const double volume = room.dims.x * room.dims.y * room.dims.z;
  const double surface =
      2.0 * (room.dims.x * room.dims.y + room.dims.x * room.dims.z + room.dims.y * room.dims.z);
  const double alpha = 0.161 * volume / (surface * room.rt60);
  if (alpha > 1.0)
    throw DomainError("sabine_absorption: requested rt60 infeasible for this room (alpha > 1)");
  return std::min(alpha, 0.9999);
}

namespace {

bool inside_room(const RoomSpec& room, const Vec3& p) {
  return p.x > 0.0 && p.x < room.dims.x && p.y > 0.0 && p.y < room.dims.y && p.z > 0.0 &&
         p.z < room.dims.z;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// One axis of the image expansion: position offsets (in sample units) and
// accumulated reflection coefficients for every (m, q) pair.
struct AxisImages {
  std::vector<double> pos;
  std::vector<double> refl;
  std::vector<int> order;  // |2m - q|, for max_order filtering
};

AxisImages axis_images(double s, double r, double l, double beta, int n_range) {
  AxisImages ax;
  ax.pos.reserve(static_cast<std::size_t>(2 * n_range + 1) * 2);
  for (int m = -n_range; m <= n_range; ++m) {
    for (int q = 0; q <= 1; ++q) {
      ax.pos.push_back((1 - 2 * q) * s - r + 2.0 * m * l);
      ax.refl.push_back(std::pow(beta, std::abs(m - q)) * std::pow(beta, std::abs(m)));
      ax.order.push_back(std::abs(2 * m - q));
    }
  }
  return ax;
}

}  // namespace

Waveform image_method_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic, int max_order) {
  if (!inside_room(room, src) || !inside_room(room, mic))
    throw DomainError("image_method_rir: source or mic outside room");
  if (norm(src - mic) < 1e-9) throw DomainError("image_method_rir: source coincides with mic");

  const double alpha = sabine_absorption(room);
  const double beta = std::sqrt(1.0 - alpha);
  const double cTs = room.c / room.fs;
  const int n_samples = static_cast<int>(std::ceil(room.rt60 * room.fs));

  const double sx = src.x / cTs, sy = src.y / cTs, sz = src.z / cTs;
  const double rx = mic.x / cTs, ry = mic.y / cTs, rz = mic.z / cTs;
  const double lx = room.dims.x / cTs, ly = room.dims.y / cTs, lz = room.dims.z / cTs;

  const int n1 = static_cast<int>(std::ceil(n_samples / (2.0 * lx)));
  const int n2 = static_cast<int>(std::ceil(n_samples / (2.0 * ly)));
  const int n3 = static_cast<int>(std::ceil(n_samples / (2.0 * lz)));

  const auto ax = axis_images(sx, rx, lx, beta, n1);
  const auto ay = axis_images(sy, ry, ly, beta, n2);
  const auto az = axis_images(sz, rz, lz, beta, n3);

  constexpr int kTw = 8;        // interpolation filter taps
  constexpr double kFc = 0.5;   // normalized cut-off
  double lpi[kTw];

  Waveform rir;
  rir.fs = room.fs;
  rir.samples.assign(static_cast<std::size_t>(n_samples), 0.0);

  for (std::size_t ix = 0; ix < ax.pos.size(); ++ix) {
    for (std::size_t iy = 0; iy < ay.pos.size(); ++iy) {
      const double dxy2 = ax.pos[ix] * ax.pos[ix] + ay.pos[iy] * ay.pos[iy];
      const double rxy = ax.refl[ix] * ay.refl[iy];
      const int oxy = ax.order[ix] + ay.order[iy];
      for (std::size_t iz = 0; iz < az.pos.size(); ++iz) {
        if (max_order >= 0 && oxy + az.order[iz] > max_order) continue;
        const double dist = std::sqrt(dxy2 + az.pos[iz] * az.pos[iz]);
        const double fdist = std::floor(dist);
        if (fdist >= n_samples) continue;
        const double gain = rxy * az.refl[iz] / (4.0 * kPi * dist * cTs);
        for (int n = 0; n < kTw; ++n) {
          const double t = (n - 0.5 * kTw + 1) - (dist - fdist);
          lpi[n] = 0.5 * (1.0 + std::cos(2.0 * kPi * t / kTw)) * 2.0 * kFc * sinc(kPi * 2.0 * kFc * t);
        }
        const int start = static_cast<int>(fdist) - kTw / 2 + 1;
        for (int n = 0; n < kTw; ++n) {
          const int pos = start + n;
          if (pos >= 0 && pos < n_samples) rir.samples[pos] += gain * lpi[n];
        }
      }
    }
  }
  return rir;
}

MixResult mix_at_snr(const std::vector<std::vector<double>>& clean,
                     const std::vector<std::vector<double>>& noise, double snr_db, int ref_channel) {
  if (clean.size() != noise.size() || clean.empty())
    throw ShapeError("mix_at_snr: channel counts differ or empty");
  for (std::size_t c = 0; c < clean.size(); ++c) {
    if (clean[c].size() != noise[c].size()) throw ShapeError("mix_at_snr: channel lengths differ");
  }
  if (ref_channel < 0 || ref_channel >= static_cast<int>(clean.size()))
    throw DomainError("mix_at_snr: bad reference channel");

  double p_clean = 0.0, p_noise = 0.0;
  for (double v : clean[ref_channel]) p_clean += v * v;
  for (double v : noise[ref_channel]) p_noise += v * v;
  if (p_clean <= 0.0 || p_noise <= 0.0)
    throw DomainError("mix_at_snr: zero power on reference channel");

  const double scale = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));

  MixResult out;
  out.noise_scale = scale;
  out.mixture.resize(clean.size());
  out.noise_scaled.resize(clean.size());
  for (std::size_t c = 0; c < clean.size(); ++c) {
    out.noise_scaled[c].resize(noise[c].size());
    out.mixture[c].resize(clean[c].size());
    for (std::size_t i = 0; i < clean[c].size(); ++i) {
      out.noise_scaled[c][i] = scale * noise[c][i];
      out.mixture[c][i] = clean[c][i] + out.noise_scaled[c][i];
    }
  }
  return out;
}

SceneRender synth_scene(const SceneSpec& spec, const std::vector<double>& speech,
                        const std::vector<double>& noise_signal) {
  if (speech.empty()) throw DomainError("synth_scene: empty speech signal");
  if (spec.ref_mic < 0 || spec.ref_mic >= spec.geom.count())
    throw DomainError("synth_scene: bad reference mic");

  SceneRender out;
  out.sabine_alpha = sabine_absorption(spec.room);
  out.far_field_threshold_m =
      far_field_threshold(spec.geom.mics.empty() ? 0.0 : spec.geom.mics.front().r,
                          spec.room.fs / 2.0, spec.room.c);
  out.far_field_ok = spec.source_distance >= out.far_field_threshold_m;
  out.source_pos = spec.array_center + spec.source_distance * unit_vector(spec.source_dir);
  if (!inside_room(spec.room, out.source_pos))
    throw DomainError("synth_scene: source position outside room");
  if (!inside_room(spec.room, spec.array_center))
    throw DomainError("synth_scene: array center outside room");

  const std::size_t len = speech.size();
  const int n_mics = spec.geom.count();
  const int target_order = spec.anechoic_target ? 0 : -1;

  std::vector<std::vector<double>> clean(n_mics);
  for (int i = 0; i < n_mics; ++i) {
    const Vec3 mic_pos = spec.array_center + mic_position(spec.geom.mics[i]);
    if (!inside_room(spec.room, mic_pos)) throw DomainError("synth_scene: mic outside room");
    const auto rir = image_method_rir(spec.room, out.source_pos, mic_pos, target_order);
    auto conv = fft_convolve(speech, rir.samples);
    conv.resize(len, 0.0);
    clean[i] = std::move(conv);
  }

  std::vector<std::vector<double>> noise(n_mics);
  if (spec.noise.kind == NoiseKind::white) {
    Rng rng(Rng::derive(spec.seed, 0x6e6f697365));  // per-scene noise stream
    for (int i = 0; i < n_mics; ++i) {
      noise[i].resize(len);
      for (std::size_t s = 0; s < len; ++s) noise[i][s] = rng.gaussian();
    }
  } else {
    if (noise_signal.empty()) throw DomainError("synth_scene: point noise needs a noise signal");
    out.noise_pos = spec.array_center + spec.noise.distance * unit_vector(spec.noise.dir);
    if (!inside_room(spec.room, out.noise_pos))
      throw DomainError("synth_scene: noise position outside room");
    std::vector<double> padded(noise_signal);
    if (padded.size() < len) {
      // loop the noise to cover the speech
      padded.reserve(len);
      std::size_t i = 0;
      while (padded.size() < len) padded.push_back(noise_signal[i++ % noise_signal.size()]);
    }
    padded.resize(len);
    for (int i = 0; i < n_mics; ++i) {
      const Vec3 mic_pos = spec.array_center + mic_position(spec.geom.mics[i]);
      const auto rir = image_method_rir(spec.room, out.noise_pos, mic_pos, -1);
      auto conv = fft_convolve(padded, rir.samples);
      conv.resize(len, 0.0);
      noise[i] = std::move(conv);
    }
  }

  auto mixed = mix_at_snr(clean, noise, spec.snr_db, spec.ref_mic);
  out.mixture = std::move(mixed.mixture);
  out.noise_scaled = std::move(mixed.noise_scaled);
  out.noise_scale = mixed.noise_scale;
  out.clean_ref = std::move(clean);
  return out;
}

}  // namespace sphonic
