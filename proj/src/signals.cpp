#include "sphonic/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphonic/errors.hpp"
#include "sphonic/rng.hpp"

namespace sphonic {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Formant {
  double center;
  double bandwidth;
};

double formant_gain(double f, const Formant* formants, int count) {
  double g = 0.0;
  for (int i = 0; i < count; ++i) {
    const double d = (f - formants[i].center) / formants[i].bandwidth;
    g += 1.0 / (1.0 + d * d);
  }
  return g;
}

}  // namespace

std::vector<double> speechlike(double duration_s, int fs, uint64_t seed) {
  if (duration_s <= 0.0 || fs <= 0) throw DomainError("speechlike: bad duration or sample rate");
  const std::size_t total = static_cast<std::size_t>(duration_s * fs);
  std::vector<double> out(total, 0.0);
  Rng rng(seed);

  const double ramp_s = 0.010;
  std::size_t pos = 0;
  while (pos < total) {
    // voiced syllable
    const double seg_s = rng.uniform(0.15, 0.40);
    const std::size_t seg = std::min(total - pos, static_cast<std::size_t>(seg_s * fs));
    const double f0_a = rng.uniform(95.0, 210.0);
    const double f0_b = f0_a * rng.uniform(0.85, 1.2);
    const double am_rate = rng.uniform(2.0, 6.0);
    const double am_phase = rng.uniform(0.0, kTau);
    const double am_depth = rng.uniform(0.3, 0.7);
    Formant formants[3] = {
        {rng.uniform(300.0, 800.0), rng.uniform(80.0, 160.0)},
        {rng.uniform(900.0, 2200.0), rng.uniform(120.0, 260.0)},
        {rng.uniform(2300.0, 3400.0), rng.uniform(200.0, 400.0)},
    };
    const int n_harm = static_cast<int>(std::floor(std::min(4300.0, fs / 2.0 - 200.0) /
                                                   std::max(f0_a, f0_b)));
    std::vector<double> phases(static_cast<std::size_t>(n_harm));
    std::vector<double> gains(static_cast<std::size_t>(n_harm));
    for (int h = 0; h < n_harm; ++h) phases[h] = rng.uniform(0.0, kTau);

    const std::size_t ramp = std::min<std::size_t>(static_cast<std::size_t>(ramp_s * fs), seg / 2);
    for (std::size_t k = 0; k < seg; ++k) {
      const double u = seg > 1 ? static_cast<double>(k) / (seg - 1) : 0.0;
      const double f0 = f0_a + (f0_b - f0_a) * u;
      for (int h = 0; h < n_harm; ++h) gains[h] = formant_gain((h + 1) * f0, formants, 3);
      double v = 0.0;
      for (int h = 0; h < n_harm; ++h) {
        phases[h] += kTau * (h + 1) * f0 / fs;
        if (phases[h] > kTau) phases[h] -= kTau;
        v += gains[h] * std::sin(phases[h]) / (h + 1);
      }
      const double t = static_cast<double>(k) / fs;
      double env = 1.0 - am_depth + am_depth * 0.5 * (1.0 + std::sin(kTau * am_rate * t + am_phase));
      if (k < ramp) env *= static_cast<double>(k) / ramp;
      if (seg - 1 - k < ramp) env *= static_cast<double>(seg - 1 - k) / ramp;
      out[pos + k] = env * v;
    }
    pos += seg;
    // silence gap
    pos += static_cast<std::size_t>(rng.uniform(0.04, 0.12) * fs);
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double s = 0.5 / peak;
    for (double& v : out) v *= s;
  }
  return out;
}

std::vector<double> white_noise(std::size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = rng.gaussian();
  return out;
}

std::vector<double> pink_noise(std::size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  // Kellet-style pole cascade driven by white noise.
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.gaussian();
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    const double p = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
    out[i] = p;
    sumsq += p * p;
  }
  if (sumsq > 0.0) {
    const double s = 1.0 / std::sqrt(sumsq / n);
    for (double& v : out) v *= s;
  }
  return out;
}

}  // namespace sphonic
