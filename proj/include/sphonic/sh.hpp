#ifndef SPHONIC_SH_HPP
#define SPHONIC_SH_HPP

#include <complex>
#include <functional>
#include <vector>

#include "sphonic/errors.hpp"

namespace sphonic {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

/// A direction on the unit sphere. theta is the polar angle measured from
/// the z-axis in [0, pi]; phi is the azimuth measured counterclockwise from
/// the x-axis, normalized into [0, 2*pi).
struct Direction {
  double theta = 0.0;
  double phi = 0.0;

  /// Validates theta and wraps phi into [0, 2*pi).
  static Direction of(double theta, double phi);
};

/// Spherical harmonic order n >= 0 and degree m with |m| <= n.
struct HarmonicIndex {
  int n = 0;
  int m = 0;
};

/// ACN linear index: i = n^2 + n + m.
int acn_index(int n, int m);
HarmonicIndex acn_unindex(int i);
inline int num_coeffs(int order) { return (order + 1) * (order + 1); }

/// Fully normalized associated Legendre function with the Condon-Shortley
/// phase folded in, so that Y_n^m(theta, phi) = pbar(n, m, cos theta) * e^{i m phi}
/// for m >= 0. Evaluated by an upward recurrence that stays bounded for
/// large n (no raw factorial ratios).
double assoc_legendre_norm(int n, int m, double x);

/// Complex spherical harmonic Y_n^m. Negative degrees use the conjugate
/// symmetry Y_n^{-m} = (-1)^m conj(Y_n^m).
std::complex<double> sph_harm(int n, int m, double theta, double phi);
std::complex<double> sph_harm(const HarmonicIndex& idx, const Direction& dir);

/// Quadrature node set on the sphere. Weights are positive and sum to 4*pi;
/// `degree` is the highest polynomial degree the grid integrates exactly.
struct QuadratureGrid {
  std::vector<Direction> nodes;
  std::vector<double> weights;
  int degree = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (exact to degree 2n - 1).
void gauss_legendre(int n, std::vector<double>* nodes, std::vector<double>* weights);

/// Product grid: n_theta Gauss-Legendre latitudes x n_phi uniform azimuths.
/// Exact to degree min(2*n_theta - 1, n_phi - 1).
QuadratureGrid gauss_uniform_grid(int n_theta, int n_phi);

/// Bundled equal-weight spherical t-design, t in {4, 6, 8, 10}.
QuadratureGrid spherical_design_grid(int t);
const std::vector<Direction>& spherical_design_nodes(int t);

/// Result of discretizing the analysis integral on a quadrature grid.
struct ShAnalysis {
  std::vector<std::complex<double>> coeffs;  // ACN order, (order+1)^2 entries
  bool degree_warning = false;               // grid degree < 2 * order
};

/// p_nm = sum_j w_j * field(dir_j) * conj(Y_n^m(dir_j)) for all n <= order.
ShAnalysis sh_analyze_continuous(
    const std::function<std::complex<double>(const Direction&)>& field,
    const QuadratureGrid& grid, int order);

}  // namespace sphonic

#endif
