#pragma once

#include <cstdint>
#include <vector>

namespace sphonic {

// Speech-like test source: AM-modulated harmonic stacks with a pitch contour,
// formant-shaped spectra, and silence gaps between syllables. Peak-normalized
// to 0.5.
std::vector<double> speechlike(double duration_s, int fs, uint64_t seed);

std::vector<double> white_noise(std::size_t n, uint64_t seed);

// Approximate -3 dB/octave spectrum (pole-zero cascade), unit RMS.
std::vector<double> pink_noise(std::size_t n, uint64_t seed);

}  // namespace sphonic
