#include "sphonic/sht.hpp"

#include <cmath>

#include "sphonic/errors.hpp"

namespace sphonic {

ArrayGeometry uca_geometry(int count, double radius) {
  if (count < 1) throw DomainError("uca_geometry: need at least one mic");
  if (radius <= 0.0) throw DomainError("uca_geometry: radius must be positive");
  ArrayGeometry geom;
  geom.mics.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    geom.mics.push_back(Mic{radius, Direction{kPi / 2.0, 2.0 * kPi * i / count}});
  }
  return geom;
}

ArrayGeometry design_geometry(int t, double radius) {
  if (radius <= 0.0) throw DomainError("design_geometry: radius must be positive");
  ArrayGeometry geom;
  for (const Direction& d : spherical_design_nodes(t)) {
    geom.mics.push_back(Mic{radius, d});
  }
  return geom;
}

std::vector<GroupRange> order_groups(int order) {
  if (order < 1) throw DomainError("order_groups: need order >= 1");
  std::vector<GroupRange> groups;
  groups.push_back(GroupRange{0, 4});  // orders 0 and 1 together
  for (int n = 2; n <= order; ++n) {
    groups.push_back(GroupRange{n * n, 2 * n + 1});
  }
  return groups;
}

ComplexMatrix sh_basis_matrix(const ArrayGeometry& geom, int order) {
  const int nc = num_coeffs(order);
  ComplexMatrix y(static_cast<std::size_t>(geom.count()), static_cast<std::size_t>(nc));
  for (int i = 0; i < geom.count(); ++i) {
    const Direction& d = geom.mics[i].dir;
    for (int n = 0; n <= order; ++n) {
      for (int m = -n; m <= n; ++m) {
        y(i, acn_index(n, m)) = sph_harm(n, m, d.theta, d.phi);
      }
    }
  }
  return y;
}

namespace {

void check_channels(const TFSpectrum& spec, const ArrayGeometry& geom) {
  if (spec.slots() != static_cast<std::size_t>(geom.count()))
    throw ShapeError("sht: channel count does not match geometry");
}

// Cholesky solve of (A + ridge I) X = B for Hermitian positive-definite A,
// column vectors B packed as B[col][row]. A is overwritten.
void cholesky_solve_inplace(ComplexMatrix& a, std::vector<cplx>& b) {
  const std::size_t n = a.rows();
  // decompose a = L L^H, storing L in the lower triangle
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(a(j, k));
    if (diag <= 0.0) throw NumericalError("sht: normal equations not positive definite");
    const double l_jj = std::sqrt(diag);
    a(j, j) = l_jj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * std::conj(a(j, k));
      a(i, j) = s / l_jj;
    }
  }
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i).real();
  }
  // L^H x = y
  for (std::size_t ii = n; ii-- > 0;) {
    cplx s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(a(k, ii)) * b[k];
    b[ii] = s / a(ii, ii).real();
  }
}

}  // namespace

ShtResult sht_forward(const TFSpectrum& spec, const ArrayGeometry& geom, int order) {
  check_channels(spec, geom);
  const int nc = num_coeffs(order);
  const auto y = sh_basis_matrix(geom, order);
  const double scale = kFourPi / geom.count();

  ShtResult out;
  out.underdetermined = nc > geom.count();
  out.shc = ShcTensor(order, spec.frames(), spec.bins());
  for (int nm = 0; nm < nc; ++nm) {
    for (int i = 0; i < geom.count(); ++i) {
      const cplx w = scale * std::conj(y(i, nm));
      const cplx* src = spec.slot(static_cast<std::size_t>(i));
      cplx* dst = out.shc.data.slot(static_cast<std::size_t>(nm));
      const std::size_t plane = spec.frames() * spec.bins();
      for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
    }
  }
  return out;
}

ShtResult sht_forward_ls(const TFSpectrum& spec, const ArrayGeometry& geom, int order, double ridge) {
  check_channels(spec, geom);
  if (ridge < 0.0) throw DomainError("sht_forward_ls: ridge must be >= 0");
  const int nc = num_coeffs(order);
  const int n_mic = geom.count();
  const auto y = sh_basis_matrix(geom, order);

  // Gram matrix G = Y^H Y + ridge I, shared across frames and bins.
  ComplexMatrix gram(static_cast<std::size_t>(nc), static_cast<std::size_t>(nc));
  for (int a = 0; a < nc; ++a) {
    for (int b = 0; b < nc; ++b) {
      cplx s = 0.0;
      for (int i = 0; i < n_mic; ++i) s += std::conj(y(i, a)) * y(i, b);
      gram(a, b) = s;
    }
    gram(a, a) += ridge;
  }

  ShtResult out;
  out.underdetermined = nc > n_mic;
  out.shc = ShcTensor(order, spec.frames(), spec.bins());
  std::vector<cplx> rhs(static_cast<std::size_t>(nc));
  ComplexMatrix chol(static_cast<std::size_t>(nc), static_cast<std::size_t>(nc));
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t b = 0; b < spec.bins(); ++b) {
      for (int a = 0; a < nc; ++a) {
        cplx s = 0.0;
        for (int i = 0; i < n_mic; ++i) s += std::conj(y(i, a)) * spec(static_cast<std::size_t>(i), t, b);
        rhs[a] = s;
      }
      chol = gram;
      cholesky_solve_inplace(chol, rhs);
      for (int a = 0; a < nc; ++a) out.shc.data(static_cast<std::size_t>(a), t, b) = rhs[a];
    }
  }
  return out;
}

TFSpectrum sht_inverse(const ShcTensor& shc, const std::vector<Direction>& dirs) {
  const int nc = num_coeffs(shc.order);
  if (shc.data.slots() != static_cast<std::size_t>(nc))
    throw ShapeError("sht_inverse: coefficient count does not match order");
  TFSpectrum out(dirs.size(), shc.data.frames(), shc.data.bins());
  const std::size_t plane = shc.data.frames() * shc.data.bins();
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    cplx* dst = out.slot(j);
    for (int nm = 0; nm < nc; ++nm) {
      const auto idx = acn_unindex(nm);
      const cplx yv = sph_harm(idx.n, idx.m, dirs[j].theta, dirs[j].phi);
      const cplx* src = shc.data.slot(static_cast<std::size_t>(nm));
      for (std::size_t p = 0; p < plane; ++p) dst[p] += yv * src[p];
    }
  }
  return out;
}

std::vector<ComplexCube> partition_groups(const ShcTensor& shc) {
  const auto ranges = order_groups(shc.order);
  std::vector<ComplexCube> groups;
  groups.reserve(ranges.size());
  const std::size_t plane = shc.data.frames() * shc.data.bins();
  for (const auto& g : ranges) {
    ComplexCube cube(static_cast<std::size_t>(g.count), shc.data.frames(), shc.data.bins());
    for (int c = 0; c < g.count; ++c) {
      const cplx* src = shc.data.slot(static_cast<std::size_t>(g.first + c));
      cplx* dst = cube.slot(static_cast<std::size_t>(c));
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p];
    }
    groups.push_back(std::move(cube));
  }
  return groups;
}

ShcTensor merge_groups(const std::vector<ComplexCube>& groups, int order) {
  const auto ranges = order_groups(order);
  if (groups.size() != ranges.size()) throw ShapeError("merge_groups: group count mismatch");
  if (groups.empty()) throw ShapeError("merge_groups: no groups");
  ShcTensor out(order, groups.front().frames(), groups.front().bins());
  const std::size_t plane = out.data.frames() * out.data.bins();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].slots() != static_cast<std::size_t>(ranges[g].count) ||
        groups[g].frames() != out.data.frames() || groups[g].bins() != out.data.bins())
      throw ShapeError("merge_groups: group shape mismatch");
    for (int c = 0; c < ranges[g].count; ++c) {
      const cplx* src = groups[g].slot(static_cast<std::size_t>(c));
      cplx* dst = out.data.slot(static_cast<std::size_t>(ranges[g].first + c));
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p];
    }
  }
  return out;
}

MicContributions per_mic_contributions(const TFSpectrum& spec, const ArrayGeometry& geom, int order) {
  check_channels(spec, geom);
  const int nc = num_coeffs(order);
  const auto y = sh_basis_matrix(geom, order);
  const double scale = kFourPi / geom.count();
  MicContributions out;
  out.order = order;
  out.per_coeff.reserve(static_cast<std::size_t>(nc));
  const std::size_t plane = spec.frames() * spec.bins();
  for (int nm = 0; nm < nc; ++nm) {
    ComplexCube cube(static_cast<std::size_t>(geom.count()), spec.frames(), spec.bins());
    for (int i = 0; i < geom.count(); ++i) {
      const cplx w = scale * std::conj(y(i, nm));
      const cplx* src = spec.slot(static_cast<std::size_t>(i));
      cplx* dst = cube.slot(static_cast<std::size_t>(i));
      for (std::size_t p = 0; p < plane; ++p) dst[p] = w * src[p];
    }
    out.per_coeff.push_back(std::move(cube));
  }
  return out;
}

}  // namespace sphonic
