#include "sphonic/stft.hpp"

#include <cmath>
#include <numbers>

#include "sphonic/errors.hpp"
#include "sphonic/fft.hpp"

namespace sphonic {

namespace {

void check_config(const StftConfig& cfg) {
  if (cfg.win_len < 2 || cfg.hop < 1 || cfg.n_fft < cfg.win_len)
    throw ConfigError("stft: need win_len >= 2, hop >= 1, n_fft >= win_len");
  if (cfg.win_len != 2 * cfg.hop)
    throw ConfigError("stft: sine-window overlap-add requires hop = win_len / 2");
}

}  // namespace

std::vector<double> sine_window(const StftConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.win_len));
  for (int k = 0; k < cfg.win_len; ++k) {
    w[k] = std::sin(std::numbers::pi * (k + 0.5) / cfg.win_len);
  }
  return w;
}

int stft_num_frames(std::size_t len, const StftConfig& cfg) {
  if (len == 0) return 0;
  return static_cast<int>((len + cfg.hop - 1) / cfg.hop);
}

ComplexMatrix stft(const std::vector<double>& samples, const StftConfig& cfg) {
  check_config(cfg);
  if (samples.empty()) throw DomainError("stft: empty input");
  const int frames = stft_num_frames(samples.size(), cfg);
  const auto win = sine_window(cfg);
  ComplexMatrix out(static_cast<std::size_t>(frames), static_cast<std::size_t>(cfg.bins()));
  std::vector<double> buf(static_cast<std::size_t>(cfg.win_len));
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int k = 0; k < cfg.win_len; ++k) {
      const std::size_t idx = start + k;
      buf[k] = idx < samples.size() ? samples[idx] * win[k] : 0.0;
    }
    const auto spec = rfft(buf, cfg.n_fft);
    for (int b = 0; b < cfg.bins(); ++b) out(t, b) = spec[b];
  }
  return out;
}

std::vector<double> istft(const ComplexMatrix& spectrum, const StftConfig& cfg, std::size_t out_len) {
  check_config(cfg);
  if (spectrum.cols() != static_cast<std::size_t>(cfg.bins()))
    throw ShapeError("istft: bin count does not match config");
  const std::size_t frames = spectrum.rows();
  const auto win = sine_window(cfg);
  const std::size_t padded =
      frames == 0 ? 0 : (frames - 1) * static_cast<std::size_t>(cfg.hop) + cfg.win_len;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> wsum(padded, 0.0);
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(cfg.bins()));
  for (std::size_t t = 0; t < frames; ++t) {
    for (int b = 0; b < cfg.bins(); ++b) bins[b] = spectrum(t, b);
    const auto frame = irfft(bins, cfg.n_fft);
    const std::size_t start = t * static_cast<std::size_t>(cfg.hop);
    for (int k = 0; k < cfg.win_len; ++k) {
      acc[start + k] += frame[k] * win[k];
      wsum[start + k] += win[k] * win[k];
    }
  }
  for (std::size_t i = 0; i < padded; ++i) {
    if (wsum[i] > 1e-12) acc[i] /= wsum[i];
  }
  acc.resize(out_len, 0.0);
  return acc;
}

ComplexCube stft_multi(const std::vector<std::vector<double>>& channels, const StftConfig& cfg) {
  check_config(cfg);
  if (channels.empty()) throw ShapeError("stft_multi: no channels");
  const std::size_t len = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != len) throw ShapeError("stft_multi: channel lengths differ");
  }
  const int frames = stft_num_frames(len, cfg);
  ComplexCube out(channels.size(), static_cast<std::size_t>(frames),
                  static_cast<std::size_t>(cfg.bins()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto spec = stft(channels[c], cfg);
    for (std::size_t t = 0; t < spec.rows(); ++t) {
      for (std::size_t b = 0; b < spec.cols(); ++b) out(c, t, b) = spec(t, b);
    }
  }
  return out;
}

std::vector<std::vector<double>> istft_multi(const ComplexCube& spectra, const StftConfig& cfg,
                                             std::size_t out_len) {
  std::vector<std::vector<double>> out(spectra.slots());
  ComplexMatrix plane(spectra.frames(), spectra.bins());
  for (std::size_t c = 0; c < spectra.slots(); ++c) {
    for (std::size_t t = 0; t < spectra.frames(); ++t) {
      for (std::size_t b = 0; b < spectra.bins(); ++b) plane(t, b) = spectra(c, t, b);
    }
    out[c] = istft(plane, cfg, out_len);
  }
  return out;
}

}  // namespace sphonic
