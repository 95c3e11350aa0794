#pragma once

#include <vector>

#include "sphonic/sht.hpp"

namespace sphonic {

// Rational-ratio polyphase resampler: windowed-sinc prototype, 64 taps per
// branch, Kaiser beta = 12, group delay compensated.
std::vector<double> resample(const std::vector<double>& x, int fs_in, int fs_out);

// Short-time objective intelligibility (the classic correlation-based
// measure): 10 kHz internal rate, 40 dB VAD on the clean signal, 15
// third-octave bands from 150 Hz, 384 ms segments, -15 dB clipping. Returns
// a value in [0, 1] (small negatives clamped).
double stoi(const std::vector<double>& clean, const std::vector<double>& processed, int fs);

// 10 log10(||a s||^2 / ||a s - est||^2), a = <est, s>/||s||^2, capped +80 dB.
double si_sdr(const std::vector<double>& reference, const std::vector<double>& estimate);

// MSE over (degree, frame, bin) within each order 0..N.
std::vector<double> shc_order_mse(const ShcTensor& predicted, const ShcTensor& clean);

}  // namespace sphonic
