#pragma once

#include <complex>
#include <vector>

namespace sphonic {

// One-shot transforms backed by FFTW (plans are cached per size internally,
// guarded by a mutex; execution is thread-safe).

// Real input of length n -> n/2+1 complex bins (unscaled).
std::vector<std::complex<double>> rfft(const std::vector<double>& in, int n_fft);

// n/2+1 complex bins -> real output of length n_fft, scaled by 1/n_fft so it
// inverts rfft.
std::vector<double> irfft(const std::vector<std::complex<double>>& in, int n_fft);

// Linear convolution via zero-padded FFTs; output length a.size()+b.size()-1.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sphonic
