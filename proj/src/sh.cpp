#include "sphonic/sh.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

namespace sphonic {

Direction Direction::of(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("Direction: theta outside [0, pi]");
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  return Direction{theta, phi};
}

int acn_index(int n, int m) {
  if (n < 0 || std::abs(m) > n) throw DomainError("acn_index: need n >= 0 and |m| <= n");
  return n * n + n + m;
}

HarmonicIndex acn_unindex(int i) {
  if (i < 0) throw DomainError("acn_unindex: negative index");
  const int n = static_cast<int>(std::sqrt(static_cast<double>(i)));
  return HarmonicIndex{n, i - n * n - n};
}

double assoc_legendre_norm(int n, int m, double x) {
  if (n < 0 || m < 0 || m > n) throw DomainError("assoc_legendre_norm: need 0 <= m <= n");
  if (!(std::abs(x) <= 1.0)) throw DomainError("assoc_legendre_norm: |x| > 1");

  // Seed pbar_m^m, accumulating the normalization inside the product so the
  // running value never overflows.
  double pmm = 1.0;
  if (m > 0) {
    const double omx2 = (1.0 - x) * (1.0 + x);
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= omx2 * fact / (fact + 1.0);
      fact += 2.0;
    }
  }
  pmm = std::sqrt((2.0 * m + 1.0) * pmm / kFourPi);
  if (m & 1) pmm = -pmm;  // Condon-Shortley
  if (n == m) return pmm;

  double pmmp1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
  if (n == m + 1) return pmmp1;

  double oldfact = std::sqrt(2.0 * m + 3.0);
  double pll = 0.0;
  for (int ll = m + 2; ll <= n; ++ll) {
    const double fact =
        std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - static_cast<double>(m) * m));
    pll = (x * pmmp1 - pmm / oldfact) * fact;
    oldfact = fact;
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

std::complex<double> sph_harm(int n, int m, double theta, double phi) {
  const int ma = std::abs(m);
  if (n < 0 || ma > n) throw DomainError("sph_harm: need n >= 0 and |m| <= n");
  const double p = assoc_legendre_norm(n, ma, std::cos(theta));
  std::complex<double> y{p * std::cos(ma * phi), p * std::sin(ma * phi)};
  if (m < 0) {
    y = std::conj(y);
    if (ma & 1) y = -y;
  }
  return y;
}

std::complex<double> sph_harm(const HarmonicIndex& idx, const Direction& dir) {
  return sph_harm(idx.n, idx.m, dir.theta, dir.phi);
}

void gauss_legendre(int n, std::vector<double>* nodes, std::vector<double>* weights) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  nodes->assign(n, 0.0);
  weights->assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    (*nodes)[i] = -x;  // ascending order
    (*nodes)[n - 1 - i] = x;
    (*weights)[i] = w;
    (*weights)[n - 1 - i] = w;
  }
}

QuadratureGrid gauss_uniform_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw DomainError("gauss_uniform_grid: need n_theta, n_phi >= 1");
  std::vector<double> x, w;
  gauss_legendre(n_theta, &x, &w);
  QuadratureGrid grid;
  grid.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  grid.weights.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  const double wphi = 2.0 * kPi / n_phi;
  for (int j = 0; j < n_theta; ++j) {
    const double theta = std::acos(x[j]);
    for (int l = 0; l < n_phi; ++l) {
      grid.nodes.push_back(Direction{theta, wphi * l});
      grid.weights.push_back(w[j] * wphi);
    }
  }
  grid.degree = std::min(2 * n_theta - 1, n_phi - 1);
  return grid;
}

namespace {

// Equal-weight latitude x azimuth designs. Latitudes are Chebyshev-type
// quadrature nodes on [-1, 1] (equal-weight exactness to the listed 1-D
// degree); with s > t uniform azimuths the product is a spherical t-design.
struct DesignTable {
  int t;                          // design degree
  int n_az;                       // azimuths per latitude
  std::vector<double> cos_theta;  // latitudes, descending
};

const std::array<DesignTable, 4>& design_tables() {
  static const std::array<DesignTable, 4> tables = {{
      {4, 5, {0.832497487000981875895, 0.37454140955358106559, 0.0,
              -0.37454140955358106559, -0.832497487000981875895}},
      {6, 7, {0.883861700758049035706, 0.529656775285156811389, 0.323911810519907637514, 0.0,
              -0.323911810519907637514, -0.529656775285156811389, -0.883861700758049035706}},
      {8, 9, {0.911589307728434473667, 0.601018655380238071425, 0.528761783057879993264,
              0.167906184214803943069, 0.0, -0.167906184214803943069, -0.528761783057879993264,
              -0.601018655380238071425, -0.911589307728434473667}},
      {10, 11, {0.938969811150995424927, 0.721353993511206275228, 0.675468646855517892629,
                0.435153026625227531663, 0.281762922706545755177, 0.199108971121619803735, 0.0,
                -0.199108971121619803735, -0.281762922706545755177, -0.435153026625227531663,
                -0.675468646855517892629, -0.721353993511206275228, -0.938969811150995424927}},
  }};
  return tables;
}

const DesignTable& design_table(int t) {
  for (const auto& tab : design_tables()) {
    if (tab.t == t) return tab;
  }
  throw ConfigError("spherical design: unsupported degree (bundled: 4, 6, 8, 10)");
}

std::vector<Direction> build_design_nodes(const DesignTable& tab) {
  std::vector<Direction> nodes;
  nodes.reserve(tab.cos_theta.size() * tab.n_az);
  for (double ct : tab.cos_theta) {
    const double theta = std::acos(ct);
    for (int l = 0; l < tab.n_az; ++l) {
      nodes.push_back(Direction{theta, 2.0 * kPi * l / tab.n_az});
    }
  }
  return nodes;
}

}  // namespace

const std::vector<Direction>& spherical_design_nodes(int t) {
  static const std::vector<Direction> t4 = build_design_nodes(design_table(4));
  static const std::vector<Direction> t6 = build_design_nodes(design_table(6));
  static const std::vector<Direction> t8 = build_design_nodes(design_table(8));
  static const std::vector<Direction> t10 = build_design_nodes(design_table(10));
  switch (t) {
    case 4: return t4;
    case 6: return t6;
    case 8: return t8;
    case 10: return t10;
    default: throw ConfigError("spherical design: unsupported degree (bundled: 4, 6, 8, 10)");
  }
}

QuadratureGrid spherical_design_grid(int t) {
  QuadratureGrid grid;
  grid.nodes = spherical_design_nodes(t);
  grid.weights.assign(grid.nodes.size(), kFourPi / grid.nodes.size());
  grid.degree = t;
  return grid;
}

ShAnalysis sh_analyze_continuous(
    const std::function<std::complex<double>(const Direction&)>& field,
    const QuadratureGrid& grid, int order) {
  if (order < 0) throw DomainError("sh_analyze_continuous: negative order");
  ShAnalysis out;
  out.degree_warning = grid.degree < 2 * order;
  out.coeffs.assign(num_coeffs(order), {0.0, 0.0});
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    const std::complex<double> wf = grid.weights[j] * field(grid.nodes[j]);
    for (int n = 0; n <= order; ++n) {
      for (int m = -n; m <= n; ++m) {
        out.coeffs[acn_index(n, m)] += wf * std::conj(sph_harm(n, m, grid.nodes[j].theta, grid.nodes[j].phi));
      }
    }
  }
  return out;
}

}  // namespace sphonic
