#pragma once

#include <vector>

#include "sphonic/tensor.hpp"

namespace sphonic {

struct Waveform {
  std::vector<double> samples;
  int fs = 16000;
};

struct StftConfig {
  int win_len = 400;
  int hop = 200;
  int n_fft = 400;

  int bins() const { return n_fft / 2 + 1; }
};

// Periodic sine window, w[k] = sin(pi (k + 0.5) / win_len). With hop =
// win_len/2 the squared window satisfies COLA, so analysis and synthesis use
// the same window.
std::vector<double> sine_window(const StftConfig& cfg);

// Frames covering the whole signal: ceil(len / hop), tail zero-padded.
int stft_num_frames(std::size_t len, const StftConfig& cfg);

// Single channel -> [frame][bin] (frames x n_fft/2+1).
ComplexMatrix stft(const std::vector<double>& samples, const StftConfig& cfg);

// Overlap-add inverse with sin^2 COLA normalization. `out_len` trims/pads the
// result (pass the original length to round-trip).
std::vector<double> istft(const ComplexMatrix& spectrum, const StftConfig& cfg, std::size_t out_len);

// Channels must share a length. Result is [channel][frame][bin].
ComplexCube stft_multi(const std::vector<std::vector<double>>& channels, const StftConfig& cfg);

std::vector<std::vector<double>> istft_multi(const ComplexCube& spectra, const StftConfig& cfg,
                                             std::size_t out_len);

}  // namespace sphonic
