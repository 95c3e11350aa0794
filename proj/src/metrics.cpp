#include "sphonic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sphonic/errors.hpp"
#include "sphonic/fft.hpp"

namespace sphonic {

namespace {

double bessel_i0(double x) {
  // power series; converges fast for the argument range a Kaiser window uses
  double sum = 1.0, term = 1.0;
  const double x2 = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= x2 / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

long long gcd_ll(long long a, long long b) { return b == 0 ? a : gcd_ll(b, a % b); }

}  // namespace

std::vector<double> resample(const std::vector<double>& x, int fs_in, int fs_out) {
  if (fs_in <= 0 || fs_out <= 0) throw DomainError("resample: sample rates must be positive");
  if (fs_in == fs_out) return x;
  const long long g = gcd_ll(fs_in, fs_out);
  const long long up = fs_out / g;    // L
  const long long down = fs_in / g;   // M

  constexpr int kTapsPerBranch = 64;
  const long long n_taps = kTapsPerBranch * up;
  const double beta = 12.0;
  const double cutoff = kPi / static_cast<double>(std::max(up, down));

  // Kaiser-windowed sinc prototype, passband gain L.
  std::vector<double> h(static_cast<std::size_t>(n_taps));
  const double center = (n_taps - 1) / 2.0;
  const double i0b = bessel_i0(beta);
  for (long long n = 0; n < n_taps; ++n) {
    const double t = n - center;
    const double sinc = t == 0.0 ? 1.0 : std::sin(cutoff * t) / (cutoff * t);
    const double u = 2.0 * n / (n_taps - 1) - 1.0;
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
    h[n] = static_cast<double>(up) * (cutoff / kPi) * sinc * win;
  }

  const long long in_len = static_cast<long long>(x.size());
  const long long out_len = (in_len * up + down - 1) / down;
  const long long delay = (n_taps - 1) / 2;
  std::vector<double> y(static_cast<std::size_t>(out_len), 0.0);
  for (long long j = 0; j < out_len; ++j) {
    const long long u_idx = j * down + delay;  // position on the upsampled lattice
    // x[k] contributes via h[u_idx - k*up]
    long long k_hi = u_idx / up;
    long long k_lo = (u_idx - (n_taps - 1)) / up - 1;
    double acc = 0.0;
    for (long long k = std::max(0LL, k_lo); k <= std::min(in_len - 1, k_hi); ++k) {
      const long long tap = u_idx - k * up;
      if (tap >= 0 && tap < n_taps) acc += x[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(tap)];
    }
    y[static_cast<std::size_t>(j)] = acc;
  }
  return y;
}

namespace {

constexpr int kStoiFs = 10000;
constexpr int kFrameLen = 256;
constexpr int kFrameHop = 128;
constexpr int kFftLen = 512;
constexpr int kNumBands = 15;
constexpr double kFirstBand = 150.0;
constexpr int kSegLen = 30;       // frames per comparison segment (384 ms)
constexpr double kDynRange = 40.0;
constexpr double kClipDb = -15.0;

// MATLAB-style symmetric Hann (no zero endpoints).
std::vector<double> hanning_matlab(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * (k + 1) / (n + 1)));
  return w;
}

// Drops frames whose clean-signal energy sits more than 40 dB below the
// loudest frame, then rebuilds both signals by overlap-add of the survivors.
void remove_silent_frames(std::vector<double>* x, std::vector<double>* y) {
  if (x->size() < kFrameLen) throw DomainError("stoi: signal shorter than one frame");
  const auto w = hanning_matlab(kFrameLen);
  const long long n_frames =
      1 + (static_cast<long long>(x->size()) - kFrameLen) / kFrameHop;

  std::vector<double> energy_db(static_cast<std::size_t>(n_frames));
  double max_db = -1e300;
  for (long long f = 0; f < n_frames; ++f) {
    double e = 0.0;
    for (int k = 0; k < kFrameLen; ++k) {
      const double v = (*x)[f * kFrameHop + k] * w[k];
      e += v * v;
    }
    energy_db[f] = 10.0 * std::log10(e + 1e-300);
    max_db = std::max(max_db, energy_db[f]);
  }

  std::vector<long long> kept;
  for (long long f = 0; f < n_frames; ++f) {
    if (energy_db[f] - max_db + kDynRange > 0.0) kept.push_back(f);
  }
  if (kept.empty()) throw DomainError("stoi: no active speech frames");

  std::vector<double> xs(kept.size() * kFrameHop + kFrameLen, 0.0);
  std::vector<double> ys(xs.size(), 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const long long src = kept[i] * kFrameHop;
    const std::size_t dst = i * kFrameHop;
    for (int k = 0; k < kFrameLen; ++k) {
      xs[dst + k] += (*x)[src + k] * w[k];
      ys[dst + k] += (*y)[src + k] * w[k];
    }
  }
  *x = std::move(xs);
  *y = std::move(ys);
}

// [frame][band] third-octave band magnitudes.
std::vector<std::vector<double>> band_spectrogram(const std::vector<double>& x) {
  const auto w = hanning_matlab(kFrameLen);
  const long long n_frames = 1 + (static_cast<long long>(x.size()) - kFrameLen) / kFrameHop;

  // band edges snapped to the nearest FFT bin
  std::vector<int> lo(kNumBands), hi(kNumBands);
  for (int j = 0; j < kNumBands; ++j) {
    const double cf = kFirstBand * std::pow(2.0, j / 3.0);
    const double fl = cf / std::pow(2.0, 1.0 / 6.0);
    const double fr = cf * std::pow(2.0, 1.0 / 6.0);
    const double bin_hz = static_cast<double>(kStoiFs) / kFftLen;
    lo[j] = static_cast<int>(std::lround(fl / bin_hz));
    hi[j] = static_cast<int>(std::lround(fr / bin_hz));
  }

  std::vector<std::vector<double>> bands(static_cast<std::size_t>(n_frames),
                                         std::vector<double>(kNumBands, 0.0));
  std::vector<double> buf(kFrameLen);
  for (long long f = 0; f < n_frames; ++f) {
    for (int k = 0; k < kFrameLen; ++k) buf[k] = x[f * kFrameHop + k] * w[k];
    const auto spec = rfft(buf, kFftLen);
    for (int j = 0; j < kNumBands; ++j) {
      double e = 0.0;
      for (int b = lo[j]; b < hi[j]; ++b) e += std::norm(spec[b]);
      bands[f][j] = std::sqrt(e);
    }
  }
  return bands;
}

}  // namespace

double stoi(const std::vector<double>& clean, const std::vector<double>& processed, int fs) {
  if (clean.size() != processed.size()) throw ShapeError("stoi: length mismatch");
  if (clean.empty()) throw DomainError("stoi: empty input");
  if (fs <= 0) throw DomainError("stoi: bad sample rate");

  std::vector<double> x = fs == kStoiFs ? clean : resample(clean, fs, kStoiFs);
  std::vector<double> y = fs == kStoiFs ? processed : resample(processed, fs, kStoiFs);
  remove_silent_frames(&x, &y);

  const auto xb = band_spectrogram(x);
  const auto yb = band_spectrogram(y);
  const long long n_frames = static_cast<long long>(xb.size());
  if (n_frames < kSegLen)
    throw DomainError("stoi: fewer than 30 active frames (need 384 ms of speech)");

  const double clip = std::pow(10.0, -kClipDb / 20.0);  // 10^(15/20)
  double acc = 0.0;
  long long count = 0;
  std::vector<double> xs(kSegLen), ys(kSegLen);
  for (long long m = kSegLen; m <= n_frames; ++m) {
    for (int j = 0; j < kNumBands; ++j) {
      double ex = 0.0, ey = 0.0;
      for (int t = 0; t < kSegLen; ++t) {
        xs[t] = xb[m - kSegLen + t][j];
        ys[t] = yb[m - kSegLen + t][j];
        ex += xs[t] * xs[t];
        ey += ys[t] * ys[t];
      }
      const double alpha = std::sqrt(ex / (ey + 1e-300));
      double mx = 0.0, my = 0.0;
      for (int t = 0; t < kSegLen; ++t) {
        ys[t] = std::min(alpha * ys[t], xs[t] * (1.0 + clip));
        mx += xs[t];
        my += ys[t];
      }
      mx /= kSegLen;
      my /= kSegLen;
      double num = 0.0, dx = 0.0, dy = 0.0;
      for (int t = 0; t < kSegLen; ++t) {
        num += (xs[t] - mx) * (ys[t] - my);
        dx += (xs[t] - mx) * (xs[t] - mx);
        dy += (ys[t] - my) * (ys[t] - my);
      }
      acc += num / (std::sqrt(dx * dy) + 1e-300);
      ++count;
    }
  }
  const double d = acc / static_cast<double>(count);
  return std::clamp(d, 0.0, 1.0);
}

double si_sdr(const std::vector<double>& reference, const std::vector<double>& estimate) {
  if (reference.size() != estimate.size()) throw ShapeError("si_sdr: length mismatch");
  double rr = 0.0, re = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += reference[i] * reference[i];
    re += reference[i] * estimate[i];
  }
  if (rr <= 0.0) throw DomainError("si_sdr: zero reference");
  const double alpha = re / rr;
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * reference[i];
    sig += s * s;
    const double e = s - estimate[i];
    err += e * e;
  }
  if (err <= 0.0 || 10.0 * std::log10(sig / err) > 80.0) return 80.0;
  return 10.0 * std::log10(sig / err);
}

std::vector<double> shc_order_mse(const ShcTensor& predicted, const ShcTensor& clean) {
  require_same_shape(predicted.data, clean.data, "shc_order_mse");
  if (predicted.order != clean.order) throw ShapeError("shc_order_mse: order mismatch");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(predicted.order) + 1);
  const std::size_t plane = predicted.data.frames() * predicted.data.bins();
  for (int n = 0; n <= predicted.order; ++n) {
    double acc = 0.0;
    for (int m = -n; m <= n; ++m) {
      const cplx* p = predicted.data.slot(static_cast<std::size_t>(acn_index(n, m)));
      const cplx* c = clean.data.slot(static_cast<std::size_t>(acn_index(n, m)));
      for (std::size_t i = 0; i < plane; ++i) acc += std::norm(p[i] - c[i]);
    }
    out.push_back(acc / (static_cast<double>(2 * n + 1) * plane));
  }
  return out;
}

}  // namespace sphonic
