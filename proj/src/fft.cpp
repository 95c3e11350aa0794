#include "sphonic/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

#include "sphonic/errors.hpp"

namespace sphonic {

namespace {

// FFTW plan creation is not thread-safe; execution with the new-array
// interface is. Plans use FFTW_ESTIMATE so results do not depend on
// machine-specific wisdom.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct R2cPlan {
  fftw_plan plan = nullptr;
  ~R2cPlan() {
    if (plan) fftw_destroy_plan(plan);
  }
};

fftw_plan get_r2c_plan(int n) {
  static std::map<int, R2cPlan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = plans.find(n);
  if (it == plans.end()) {
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<fftw_complex> out(static_cast<std::size_t>(n) / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
    if (!p) throw NumericalError("fftw: r2c plan creation failed");
    it = plans.emplace(n, R2cPlan{}).first;
    it->second.plan = p;
  }
  return it->second.plan;
}

fftw_plan get_c2r_plan(int n) {
  static std::map<int, R2cPlan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = plans.find(n);
  if (it == plans.end()) {
    std::vector<fftw_complex> in(static_cast<std::size_t>(n) / 2 + 1);
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_c2r_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
    if (!p) throw NumericalError("fftw: c2r plan creation failed");
    it = plans.emplace(n, R2cPlan{}).first;
    it->second.plan = p;
  }
  return it->second.plan;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& in, int n_fft) {
  if (n_fft < 1) throw DomainError("rfft: n_fft must be positive");
  if (static_cast<int>(in.size()) > n_fft) throw ShapeError("rfft: input longer than n_fft");
  fftw_plan plan = get_r2c_plan(n_fft);
  std::vector<double> buf(static_cast<std::size_t>(n_fft), 0.0);
  std::memcpy(buf.data(), in.data(), in.size() * sizeof(double));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n_fft) / 2 + 1);
  fftw_execute_dft_r2c(plan, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& in, int n_fft) {
  if (n_fft < 1) throw DomainError("irfft: n_fft must be positive");
  if (in.size() != static_cast<std::size_t>(n_fft) / 2 + 1)
    throw ShapeError("irfft: expected n_fft/2+1 bins");
  fftw_plan plan = get_c2r_plan(n_fft);
  std::vector<std::complex<double>> buf(in);  // c2r destroys its input
  std::vector<double> out(static_cast<std::size_t>(n_fft));
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  const double scale = 1.0 / n_fft;
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  auto fa = rfft(a, static_cast<int>(n));
  const auto fb = rfft(b, static_cast<int>(n));
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  auto full = irfft(fa, static_cast<int>(n));
  full.resize(out_len);
  return full;
}

}  // namespace sphonic
