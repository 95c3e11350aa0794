#include <doctest.h>

#include <cmath>

#include "sphonic/metrics.hpp"
#include "sphonic/rng.hpp"
#include "sphonic/signals.hpp"

using namespace sphonic;

namespace {

std::vector<double> add_noise_at_snr(const std::vector<double>& clean, double snr_db,
                                     std::uint64_t seed) {
  Rng rng(seed);
  double pc = 0.0;
  for (double v : clean) pc += v * v;
  std::vector<double> noise(clean.size());
  double pn = 0.0;
  for (auto& v : noise) {
    v = rng.gaussian();
    pn += v * v;
  }
  const double scale = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) out[i] = clean[i] + scale * noise[i];
  return out;
}

}  // namespace

TEST_CASE("resampler preserves a tone across the 16k to 10k conversion") {
  const int fs_in = 16000, fs_out = 10000;
  const double f0 = 440.0;
  std::vector<double> x(fs_in);
  for (int i = 0; i < fs_in; ++i) x[i] = std::sin(2.0 * 3.14159265358979323846 * f0 * i / fs_in);

  const auto y = resample(x, fs_in, fs_out);
  CHECK(y.size() == static_cast<std::size_t>((x.size() * 5 + 7) / 8));

  // correlate the interior against the ideal tone at the new rate
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 1000; i + 1000 < y.size(); ++i) {
    const double want = std::sin(2.0 * 3.14159265358979323846 * f0 * i / fs_out);
    num += want * y[i];
    dx += want * want;
    dy += y[i] * y[i];
  }
  CHECK(num / std::sqrt(dx * dy) > 0.999);

  // identity when the rates match
  const auto same = resample(x, 16000, 16000);
  CHECK(same == x);
  CHECK_THROWS_AS(resample(x, 0, 10000), DomainError);
}

TEST_CASE("stoi equals one on identical speech") {
  const auto x = speechlike(2.0, 16000, 11);
  CHECK(stoi(x, x, 16000) >= 0.999);
}

TEST_CASE("stoi increases strictly with snr") {
  const auto clean = speechlike(2.0, 16000, 12);
  const double lo = stoi(clean, add_noise_at_snr(clean, -10.0, 1), 16000);
  const double mid = stoi(clean, add_noise_at_snr(clean, 0.0, 1), 16000);
  const double hi = stoi(clean, add_noise_at_snr(clean, 10.0, 1), 16000);
  CHECK(lo < mid);
  CHECK(mid < hi);
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);
}

TEST_CASE("stoi input validation") {
  const auto x = speechlike(2.0, 16000, 13);
  auto y = x;
  y.pop_back();
  CHECK_THROWS_AS(stoi(x, y, 16000), ShapeError);
  CHECK_THROWS_AS(stoi({}, {}, 16000), DomainError);
  // 100 ms cannot contain 30 active frames
  const auto blip = speechlike(0.1, 16000, 14);
  CHECK_THROWS_AS(stoi(blip, blip, 16000), DomainError);
}

TEST_CASE("si_sdr analytic value for orthogonal noise") {
  const std::size_t n = 8000;
  std::vector<double> s(n), e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * 50.0 * i / 8000.0;
    s[i] = std::sin(t);
    // cosine at the same frequency is orthogonal over whole periods and a
    // tenth of the power puts the answer at exactly 10 dB
    e[i] = s[i] + std::sqrt(0.1) * std::cos(t);
  }
  CHECK(si_sdr(s, e) == doctest::Approx(10.0).epsilon(1e-9));

  // scaling the estimate must not move the score
  auto scaled = e;
  for (auto& v : scaled) v *= 3.7;
  CHECK(std::abs(si_sdr(s, scaled) - si_sdr(s, e)) < 1e-9);

  // a perfect estimate hits the cap
  CHECK(si_sdr(s, s) == doctest::Approx(80.0));

  CHECK_THROWS_AS(si_sdr(std::vector<double>(10, 0.0), e), ShapeError);
  CHECK_THROWS_AS(si_sdr(std::vector<double>(n, 0.0), e), DomainError);
}

TEST_CASE("per-order mse localizes and scales") {
  ShcTensor clean(4, 2, 3);
  ShcTensor pred = clean;
  // perturb one order-2 coefficient in one cell
  pred.data(acn_index(2, -1), 1, 2) += cplx{0.0, 3.0};
  const auto mse = shc_order_mse(pred, clean);
  REQUIRE(mse.size() == 5);
  CHECK(mse[0] == 0.0);
  CHECK(mse[1] == 0.0);
  CHECK(mse[2] == doctest::Approx(9.0 / (5.0 * 2.0 * 3.0)));
  CHECK(mse[3] == 0.0);
  CHECK(mse[4] == 0.0);

  ShcTensor other(3, 2, 3);
  CHECK_THROWS_AS(shc_order_mse(pred, other), ShapeError);
}
