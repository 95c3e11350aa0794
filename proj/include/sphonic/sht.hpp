#pragma once

#include <vector>

#include "sphonic/sh.hpp"
#include "sphonic/tensor.hpp"

namespace sphonic {

struct Mic {
  double r = 0.0;  // meters from array center
  Direction dir{0.0, 0.0};
};

struct ArrayGeometry {
  std::vector<Mic> mics;

  int count() const { return static_cast<int>(mics.size()); }
};

// Planar circle in the theta = pi/2 plane, phi_i = 2*pi*i/I.
ArrayGeometry uca_geometry(int count, double radius);

// Mic directions form a bundled spherical t-design (t in {4, 6, 8, 10}).
ArrayGeometry design_geometry(int t, double radius);

struct FrequencyGrid {
  int fs = 16000;
  int n_fft = 400;
  double c = 343.0;

  int bins() const { return n_fft / 2 + 1; }
  double frequency(int bin) const { return static_cast<double>(bin) * fs / n_fft; }
  double wavenumber(int bin) const { return 2.0 * kPi * frequency(bin) / c; }
};

struct ShcTensor {
  ComplexCube data;  // [coefficient (ACN)][frame][bin]
  int order = 0;

  ShcTensor() = default;
  ShcTensor(int order_, std::size_t frames, std::size_t bins)
      : data(static_cast<std::size_t>(num_coeffs(order_)), frames, bins), order(order_) {}
};

struct GroupRange {
  int first = 0;  // ACN index of first coefficient
  int count = 0;
};

// Group 1 = orders {0, 1} (4 coefficients), then one group per order.
// Sizes for N=4: {4, 5, 7, 9}.
std::vector<GroupRange> order_groups(int order);

// Basis matrix Y with Y(i, nm) = Y_n^m(theta_i, phi_i), I x (N+1)^2.
ComplexMatrix sh_basis_matrix(const ArrayGeometry& geom, int order);

struct ShtResult {
  ShcTensor shc;
  bool underdetermined = false;  // (N+1)^2 > mic count
};

// Plain discrete quadrature: p_nm = (4*pi/I) sum_i p_i conj(Y_n^m(dir_i)).
ShtResult sht_forward(const TFSpectrum& spec, const ArrayGeometry& geom, int order);

// Per frame/bin ridge least squares: min ||Y p - spec||^2 + ridge ||p||^2.
ShtResult sht_forward_ls(const TFSpectrum& spec, const ArrayGeometry& geom, int order,
                         double ridge = 1e-8);

// p(dir) = sum_{n<=N, m} p_nm Y_n^m(dir) per frame/bin.
TFSpectrum sht_inverse(const ShcTensor& shc, const std::vector<Direction>& dirs);

// Group tensors are [group coeff][frame][bin] cubes; the pair round-trips
// bit-exactly.
std::vector<ComplexCube> partition_groups(const ShcTensor& shc);
ShcTensor merge_groups(const std::vector<ComplexCube>& groups, int order);

// [(N+1)^2][mic][frame x bin flattened]; summing over the mic axis gives
// sht_forward. Heavy: (N+1)^2 * I planes.
struct MicContributions {
  std::vector<ComplexCube> per_coeff;  // per_coeff[nm](i, frame, bin)
  int order = 0;
};

MicContributions per_mic_contributions(const TFSpectrum& spec, const ArrayGeometry& geom, int order);

}  // namespace sphonic
