// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Each check is self-contained and seeded.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sphonic/enhance.hpp"
#include "sphonic/metrics.hpp"
#include "sphonic/rng.hpp"
#include "sphonic/scene.hpp"
#include "sphonic/sh.hpp"
#include "sphonic/sht.hpp"
#include "sphonic/signals.hpp"
#include "sphonic/stft.hpp"
#include "sphonic/train.hpp"

using namespace sphonic;

namespace {

struct Failure {
  std::string detail;
};

using FailList = std::vector<Failure>;

void expect(FailList* fails, bool ok, const std::string& what) {
  if (!ok) fails->push_back({what});
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

void check_sh_identities(FailList* fails) {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = rng.uniform(0.0, kPi);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    for (int n = 0; n <= 4; ++n) {
      double sum = 0.0;
      for (int m = -n; m <= n; ++m) {
        const auto pos = sph_harm(n, std::abs(m), theta, phi);
        const auto neg = sph_harm(n, -std::abs(m), theta, phi);
        const double sign = m % 2 ? -1.0 : 1.0;
        if (std::abs(neg - sign * std::conj(pos)) > 1e-12) {
          expect(fails, false, "conjugate symmetry broken at n=" + std::to_string(n));
          return;
        }
        sum += std::norm(sph_harm(n, m, theta, phi));
      }
      const double want = (2.0 * n + 1.0) / kFourPi;
      if (std::abs(sum - want) > 1e-10) {
        expect(fails, false, "addition theorem off by " + num(std::abs(sum - want)));
        return;
      }
    }
  }

  const QuadratureGrid grid = gauss_uniform_grid(9, 19);  // exact beyond degree 8
  double worst = 0.0;
  for (int a = 0; a < num_coeffs(4); ++a) {
    for (int b = 0; b < num_coeffs(4); ++b) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
        acc += grid.weights[j] * sph_harm(acn_unindex(a), grid.nodes[j]) *
               std::conj(sph_harm(acn_unindex(b), grid.nodes[j]));
      }
      worst = std::max(worst, std::abs(acc - std::complex<double>(a == b ? 1.0 : 0.0)));
    }
  }
  expect(fails, worst <= 1e-9, "Gram residual " + num(worst) + " exceeds 1e-9");
}

// ---------------------------------------------------------------- criterion 2

void check_sht_roundtrip(FailList* fails) {
  const ArrayGeometry geom = design_geometry(8, 1.0);
  std::vector<Direction> dirs;
  for (const auto& m : geom.mics) dirs.push_back(m.dir);

  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(200 + trial);
    ShcTensor truth(4, 1, 2);
    for (auto& v : truth.data.values()) v = rng.gaussian_complex();
    const TFSpectrum field = sht_inverse(truth, dirs);
    const ShcTensor rec = sht_forward(field, geom, 4).shc;
    double nn = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < truth.data.size(); ++i) {
      nn += std::norm(rec.data.values()[i] - truth.data.values()[i]);
      dd += std::norm(truth.data.values()[i]);
    }
    worst = std::max(worst, std::sqrt(nn / dd));
  }
  expect(fails, worst <= 1e-8, "round-trip relative error " + num(worst) + " exceeds 1e-8");
}

// ---------------------------------------------------------------- criterion 3

void check_structure(FailList* fails) {
  expect(fails, num_coeffs(4) == 25, "order 4 coefficient count is not 25");
  const auto groups = order_groups(4);
  const int want[4] = {4, 5, 7, 9};
  bool sizes_ok = groups.size() == 4;
  for (std::size_t g = 0; sizes_ok && g < groups.size(); ++g) {
    sizes_ok = groups[g].count == want[g];
  }
  expect(fails, sizes_ok, "group sizes are not {4, 5, 7, 9}");
  expect(fails, StftConfig{}.bins() == 201, "stft bin count is not 201");
  const double threshold = far_field_threshold(0.035, 8000.0, 343.0);
  expect(fails, std::abs(threshold - 0.22857) < 1e-5,
         "far-field threshold " + num(threshold) + " is not 0.22857");
  expect(fails, threshold < 1.0, "far-field threshold does not clear the 1 m source distance");
}

// ---------------------------------------------------------------- criterion 4

void check_stft_reconstruction(FailList* fails) {
  const StftConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(400 + seed);
    std::vector<double> x(2000 + 537 * seed);
    for (auto& v : x) v = rng.gaussian();
    const auto y = istft(stft(x, cfg), cfg, x.size());
    double err = 0.0, sig = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      err += (x[i] - y[i]) * (x[i] - y[i]);
      sig += x[i] * x[i];
    }
    const double snr = err == 0.0 ? 300.0 : 10.0 * std::log10(sig / err);
    if (snr <= 120.0) {
      expect(fails, false, "reconstruction SNR " + num(snr) + " dB at seed " + std::to_string(seed));
      return;
    }
  }
}

// ---------------------------------------------------------------- criterion 5

double schroeder_estimate(const std::vector<double>& h, int fs) {
  std::vector<double> edc(h.size());
  double acc = 0.0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  // Fit the mid tail: above -25 dB the curve still carries the direct and
  // early-reflection knee, below -50 dB the finite response length steepens
  // the backward integral.
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / edc[0] + 1e-300);
    if (db > -25.0 || db < -50.0) continue;
    const double t = static_cast<double>(i) / fs;
    st += t;
    sy += db;
    stt += t * t;
    sty += t * db;
    ++n;
  }
  if (n < 2) return -1.0;
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return -60.0 / slope;
}

void check_simulation(FailList* fails) {
  Rng rng(500);
  std::vector<std::vector<double>> clean(2, std::vector<double>(4000));
  std::vector<std::vector<double>> noise(2, std::vector<double>(4000));
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 4000; ++i) {
      clean[c][i] = 0.4 * rng.gaussian();
      noise[c][i] = 1.5 * rng.gaussian();
    }
  }
  for (double target : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
    const MixResult mix = mix_at_snr(clean, noise, target, 0);
    double pc = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < 4000; ++i) {
      pc += clean[0][i] * clean[0][i];
      pn += mix.noise_scaled[0][i] * mix.noise_scaled[0][i];
    }
    const double got = 10.0 * std::log10(pc / pn);
    if (std::abs(got - target) >= 1e-6) {
      expect(fails, false, "snr error " + num(std::abs(got - target)) + " dB at " + num(target));
    }
  }

  RoomSpec room;
  const Vec3 src{2.0, 2.5, 2.0};
  const Vec3 mic{3.0, 2.5, 2.0};
  const Waveform h = image_method_rir(room, src, mic);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < h.samples.size(); ++i) {
    if (std::abs(h.samples[i]) > std::abs(h.samples[peak])) peak = i;
  }
  const double want_idx = norm(src - mic) * room.fs / room.c;
  expect(fails, std::abs(static_cast<double>(peak) - want_idx) <= 1.0,
         "direct path at sample " + std::to_string(peak) + ", expected near " + num(want_idx));

  const Vec3 mic2{4.0, 3.0, 2.0};
  for (double rt60 : {0.2, 0.5, 1.0}) {
    room.rt60 = rt60;
    const Waveform hh = image_method_rir(room, src, mic2);
    const double est = schroeder_estimate(hh.samples, room.fs);
    if (std::abs(est - rt60) > 0.25 * rt60) {
      expect(fails, false,
             "T60 estimate " + num(est) + " s outside 25% of requested " + num(rt60) + " s");
    }
  }
}

// ---------------------------------------------------------------- criterion 6

void check_pipeline_contracts(FailList* fails) {
  Rng rng(600);
  ShcTensor mixed(4, 4, 6), clean(4, 4, 6);
  for (auto& v : mixed.data.values()) v = rng.gaussian_complex();
  for (auto& v : clean.data.values()) v = rng.gaussian_complex();

  const auto oracle = oracle_stages(EstimatorKind::oracle_substitution, 4);
  const ShcTensor sub = run_pipeline(mixed, oracle, &clean);
  expect(fails, sub.data == clean.data, "oracle substitution is not exact end to end");

  auto stages = identity_linear_stages(4, 6);
  for (auto& st : stages) {
    for (auto& v : st.linear.w) v += 0.3 * rng.gaussian_complex();
    for (auto& v : st.linear.bias) v += 0.1 * rng.gaussian_complex();
  }
  ShcTensor cut = mixed;
  const auto ranges = order_groups(4);
  for (int c = ranges[2].first; c < num_coeffs(4); ++c) {
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t b = 0; b < 6; ++b) cut.data(c, t, b) = cplx{};
    }
  }
  const ShcTensor full_out = run_pipeline(mixed, stages, nullptr);
  const ShcTensor cut_out = run_pipeline(cut, stages, nullptr);
  bool causal = true;
  for (int c = 0; c < ranges[2].first && causal; ++c) {
    for (std::size_t t = 0; t < 4 && causal; ++t) {
      for (std::size_t b = 0; b < 6; ++b) {
        if (full_out.data(c, t, b) != cut_out.data(c, t, b)) {
          causal = false;
          break;
        }
      }
    }
  }
  expect(fails, causal, "zeroing higher mixed groups changed lower predictions");

  const auto pg = partition_groups(full_out);
  const auto cg = partition_groups(clean);
  const LossBreakdown lb = loss_total(pg, cg);
  double total = 0.0;
  for (double g : lb.per_group) total += g;
  expect(fails, std::abs(total - lb.total) < 1e-12 * std::max(1.0, std::abs(total)),
         "loss total is not the sum of group losses");
}

// ---------------------------------------------------------------- criterion 7

void check_optimization(FailList* fails) {
  Rng rng(700);
  ComplexCube lower(2, 3, 2), current(3, 3, 2), target(3, 3, 2);
  for (auto& v : lower.values()) v = rng.gaussian_complex();
  for (auto& v : current.values()) v = rng.gaussian_complex();
  for (auto& v : target.values()) v = rng.gaussian_complex();
  EstimatorStage stage;
  stage.kind = EstimatorKind::linear;
  stage.linear.bins = 2;
  stage.linear.out_dim = 3;
  stage.linear.in_dim = 5;
  stage.linear.w.resize(2 * 3 * 5);
  stage.linear.bias.resize(2 * 3);
  for (auto& v : stage.linear.w) v = rng.gaussian_complex();
  for (auto& v : stage.linear.bias) v = rng.gaussian_complex();
  StageInput input;
  input.predicted_lower = {&lower};
  input.mixed_current = &current;
  const double gerr = grad_check(stage, input, target, 7, 60);
  expect(fails, gerr < 1e-6, "grad check relative error " + num(gerr));

  // realizable target: clean tensors generated by a known stage set
  auto truth = identity_linear_stages(2, 4);
  Rng trng(701);
  for (auto& st : truth) {
    for (auto& v : st.linear.w) v += 0.25 * trng.gaussian_complex();
    for (auto& v : st.linear.bias) v += 0.25 * trng.gaussian_complex();
  }
  std::vector<TrainExample> dataset;
  for (int e = 0; e < 3; ++e) {
    TrainExample ex;
    ex.mixed = ShcTensor(2, 6, 4);
    Rng erng(710 + e);
    for (auto& v : ex.mixed.data.values()) v = erng.gaussian_complex();
    ex.clean = run_pipeline(ex.mixed, truth, nullptr);
    dataset.push_back(std::move(ex));
  }
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.epochs = 500;
  cfg.patience = 5;
  const TrainResult res = train_stages(dataset, {}, cfg);
  expect(fails, res.history.train.back().total < 1e-6,
         "realizable-target loss stalled at " + num(res.history.train.back().total));

  TrainConfig frozen = cfg;
  frozen.lr = 0.0;
  frozen.epochs = 3;
  const TrainResult fixed = train_stages(dataset, {}, frozen);
  const auto identity = identity_linear_stages(2, 4);
  bool unchanged = true;
  for (std::size_t g = 0; g < identity.size(); ++g) {
    unchanged = unchanged && fixed.stages[g].linear.w == identity[g].linear.w &&
                fixed.stages[g].linear.bias == identity[g].linear.bias;
  }
  expect(fails, unchanged, "lr = 0 moved the parameters");

  TrainConfig rep = cfg;
  rep.epochs = 30;
  const TrainResult a = train_stages(dataset, {}, rep);
  const TrainResult b = train_stages(dataset, {}, rep);
  bool same = a.history.val_total == b.history.val_total;
  for (std::size_t g = 0; same && g < a.stages.size(); ++g) {
    same = a.stages[g].linear.w == b.stages[g].linear.w;
  }
  expect(fails, same, "seeded training is not bit-reproducible");
}

// ---------------------------------------------------------------- criterion 8

struct EfficacyMeans {
  double d_sisdr_oracle = 0.0;
  double d_stoi_oracle = 0.0;
  double d_sisdr_wiener = 0.0;
  double d_stoi_wiener = 0.0;
};

EfficacyMeans run_scene_battery(double snr_db) {
  const StftConfig stft_cfg;
  const ArrayGeometry geom = uca_geometry(16, 0.035);
  const int n_scenes = 20;

  double base_sisdr = 0.0, base_stoi = 0.0;
  double om_sisdr = 0.0, om_stoi = 0.0;
  double wf_sisdr = 0.0, wf_stoi = 0.0;

  for (int s = 0; s < n_scenes; ++s) {
    SceneSpec spec;
    spec.geom = geom;
    spec.room.rt60 = 0.3;
    spec.snr_db = snr_db;
    spec.seed = Rng::derive(8800, static_cast<std::uint64_t>(s));
    const auto speech = speechlike(1.0, spec.room.fs, Rng::derive(spec.seed, 1));
    const SceneRender render = synth_scene(spec, speech, {});
    const std::size_t len = speech.size();

    const ShcTensor mixed = sht_forward(stft_multi(render.mixture, stft_cfg), geom, 4).shc;
    const ShcTensor clean = sht_forward(stft_multi(render.clean_ref, stft_cfg), geom, 4).shc;
    const ShcTensor noise = sht_forward(stft_multi(render.noise_scaled, stft_cfg), geom, 4).shc;

    const ShcTensor om = run_pipeline(
        mixed, oracle_stages(EstimatorKind::oracle_magnitude_mask, 4), &clean);
    const ShcTensor wf = run_pipeline(mixed, wiener_stages_from_noise(noise), nullptr);

    const auto clean_proc = shc_to_waveform(clean, geom, 0, stft_cfg, len, spec.room.fs).samples;
    const auto mix_proc = shc_to_waveform(mixed, geom, 0, stft_cfg, len, spec.room.fs).samples;
    const auto om_wav = shc_to_waveform(om, geom, 0, stft_cfg, len, spec.room.fs).samples;
    const auto wf_wav = shc_to_waveform(wf, geom, 0, stft_cfg, len, spec.room.fs).samples;

    base_sisdr += si_sdr(clean_proc, mix_proc);
    base_stoi += stoi(clean_proc, mix_proc, spec.room.fs);
    om_sisdr += si_sdr(clean_proc, om_wav);
    om_stoi += stoi(clean_proc, om_wav, spec.room.fs);
    wf_sisdr += si_sdr(clean_proc, wf_wav);
    wf_stoi += stoi(clean_proc, wf_wav, spec.room.fs);
  }

  EfficacyMeans out;
  out.d_sisdr_oracle = (om_sisdr - base_sisdr) / n_scenes;
  out.d_stoi_oracle = (om_stoi - base_stoi) / n_scenes;
  out.d_sisdr_wiener = (wf_sisdr - base_sisdr) / n_scenes;
  out.d_stoi_wiener = (wf_stoi - base_stoi) / n_scenes;
  return out;
}

void check_efficacy(FailList* fails) {
  for (double snr : {0.0, -10.0}) {
    const EfficacyMeans m = run_scene_battery(snr);
    const std::string at = " at " + num(snr) + " dB";
    expect(fails, m.d_sisdr_oracle >= 5.0,
           "oracle mask SI-SDR gain " + num(m.d_sisdr_oracle) + " dB < 5 dB" + at);
    expect(fails, m.d_stoi_oracle > 0.0,
           "oracle mask STOI gain " + num(m.d_stoi_oracle) + " not positive" + at);
    expect(fails, m.d_sisdr_wiener > 0.0,
           "wiener SI-SDR gain " + num(m.d_sisdr_wiener) + " dB not positive" + at);
    expect(fails, m.d_stoi_wiener > 0.0,
           "wiener STOI gain " + num(m.d_stoi_wiener) + " not positive" + at);
  }
}

// ---------------------------------------------------------------- criterion 9

void check_metric_sanity(FailList* fails) {
  const auto x = speechlike(2.0, 16000, 900);
  const double self = stoi(x, x, 16000);
  expect(fails, self >= 0.999, "stoi(x, x) = " + num(self));

  double prev = -1.0;
  for (double snr : {-10.0, 0.0, 10.0}) {
    Rng rng(901);
    double pc = 0.0;
    for (double v : x) pc += v * v;
    std::vector<double> noisy(x.size());
    double pn = 0.0;
    std::vector<double> nn(x.size());
    for (auto& v : nn) {
      v = rng.gaussian();
      pn += v * v;
    }
    const double scale = std::sqrt(pc / (pn * std::pow(10.0, snr / 10.0)));
    for (std::size_t i = 0; i < x.size(); ++i) noisy[i] = x[i] + scale * nn[i];
    const double score = stoi(x, noisy, 16000);
    if (score <= prev) {
      expect(fails, false, "stoi not strictly increasing at " + num(snr) + " dB snr");
    }
    prev = score;
  }

  std::vector<double> s(8000), e(8000);
  Rng rng(902);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.gaussian();
    e[i] = s[i] + 0.3 * rng.gaussian();
  }
  const double a = si_sdr(s, e);
  for (auto& v : e) v *= 123.456;
  const double b = si_sdr(s, e);
  expect(fails, std::abs(a - b) < 1e-9, "si_sdr scale variance " + num(std::abs(a - b)) + " dB");
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<void(FailList*)> run;
  };
  const std::vector<Criterion> criteria = {
      {"1. spherical harmonic identities (symmetry, addition, orthonormality)", check_sh_identities},
      {"2. transform round trip on a spherical 8-design (100 trials)", check_sht_roundtrip},
      {"3. reference configuration structure (25 coeffs, groups, bins, far field)", check_structure},
      {"4. stft perfect reconstruction (> 120 dB, 20 signals)", check_stft_reconstruction},
      {"5. room simulation (snr mixing, direct path, schroeder decay)", check_simulation},
      {"6. pipeline contracts (oracle exactness, causal conditioning, loss additivity)",
       check_pipeline_contracts},
      {"7. optimization (gradients, realizable convergence, frozen lr, reproducibility)",
       check_optimization},
      {"8. enhancement efficacy on seeded scenes (0 dB and -10 dB)", check_efficacy},
      {"9. metric sanity (stoi self/monotonic, si-sdr scale invariance)", check_metric_sanity},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    FailList fails;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(&fails);
    } catch (const std::exception& e) {
      fails.push_back({std::string("unexpected exception: ") + e.what()});
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (fails.empty()) {
      std::printf("[PASS] %s (%.2f s)\n", c.label, secs);
    } else {
      ++failures;
      std::printf("[FAIL] %s (%.2f s)\n", c.label, secs);
      for (const auto& f : fails) std::printf("       %s\n", f.detail.c_str());
    }
  }
  if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
