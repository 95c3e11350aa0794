#include "sphonic/enhance.hpp"

#include <cmath>

#include "sphonic/errors.hpp"

namespace sphonic {

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::oracle_substitution: return "oracle-sub";
    case EstimatorKind::oracle_magnitude_mask: return "oracle-mag";
    case EstimatorKind::wiener: return "wiener";
    case EstimatorKind::linear: return "linear";
  }
  return "unknown";
}

ComplexCube oracle_magnitude_mask(const ComplexCube& mixed_group, const ComplexCube& clean_group) {
  if (!mixed_group.same_shape(clean_group))
    throw ShapeError("oracle_magnitude_mask: shape mismatch");
  ComplexCube out(mixed_group.slots(), mixed_group.frames(), mixed_group.bins());
  const std::size_t n = mixed_group.size();
  const cplx* mx = mixed_group.data();
  const cplx* cl = clean_group.data();
  cplx* dst = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double gain = std::min(std::abs(cl[i]) / (std::abs(mx[i]) + 1e-12), 1.0);
    dst[i] = gain * mx[i];
  }
  return out;
}

ComplexCube wiener_stage(const ComplexCube& mixed_group, const EstimatorStage& stage) {
  ComplexCube out(mixed_group.slots(), mixed_group.frames(), mixed_group.bins());
  if (stage.force_unit_gain) {
    out = mixed_group;
    return out;
  }
  if (stage.noise_psd.rows() != mixed_group.slots() || stage.noise_psd.cols() != mixed_group.bins())
    throw ConfigError("wiener_stage: missing or mis-shaped noise PSD");
  for (std::size_t c = 0; c < mixed_group.slots(); ++c) {
    for (std::size_t t = 0; t < mixed_group.frames(); ++t) {
      for (std::size_t b = 0; b < mixed_group.bins(); ++b) {
        const cplx v = mixed_group(c, t, b);
        const double psd = stage.noise_psd(c, b);
        double gain = 1.0;
        if (psd > 0.0) {
          const double xi = std::max(std::norm(v) / psd - 1.0, 0.0);
          gain = std::max(xi / (1.0 + xi), stage.wiener_floor);
        }
        out(c, t, b) = gain * v;
      }
    }
  }
  return out;
}

ComplexCube linear_stage_apply(const EstimatorStage& stage, const StageInput& input) {
  if (stage.kind != EstimatorKind::linear) throw ConfigError("linear_stage_apply: not a linear stage");
  if (!input.mixed_current) throw ShapeError("linear_stage_apply: missing mixed_current");
  const ComplexCube& mixed = *input.mixed_current;
  std::size_t in_dim = mixed.slots();
  for (const ComplexCube* g : input.predicted_lower) {
    if (g->frames() != mixed.frames() || g->bins() != mixed.bins())
      throw ShapeError("linear_stage_apply: conditioning frame/bin mismatch");
    in_dim += g->slots();
  }
  const LinearParams& p = stage.linear;
  if (p.in_dim != in_dim || p.bins != mixed.bins())
    throw ShapeError("linear_stage_apply: parameter shape mismatch");

  ComplexCube out(p.out_dim, mixed.frames(), mixed.bins());
  std::vector<cplx> x(in_dim);
  for (std::size_t t = 0; t < mixed.frames(); ++t) {
    for (std::size_t b = 0; b < mixed.bins(); ++b) {
      std::size_t k = 0;
      for (const ComplexCube* g : input.predicted_lower) {
        for (std::size_t c = 0; c < g->slots(); ++c) x[k++] = (*g)(c, t, b);
      }
      for (std::size_t c = 0; c < mixed.slots(); ++c) x[k++] = mixed(c, t, b);
      for (std::size_t o = 0; o < p.out_dim; ++o) {
        cplx acc = p.bias[b * p.out_dim + o];
        const cplx* wrow = &p.w[(b * p.out_dim + o) * p.in_dim];
        for (std::size_t i = 0; i < in_dim; ++i) acc += wrow[i] * x[i];
        out(o, t, b) = acc;
      }
    }
  }
  return out;
}

ShcTensor run_pipeline(const ShcTensor& mixed, const std::vector<EstimatorStage>& stages,
                       const ShcTensor* clean) {
  const auto groups = order_groups(mixed.order);
  if (stages.size() != groups.size())
    throw ShapeError("run_pipeline: stage count does not match group count");
  if (clean && !clean->data.same_shape(mixed.data))
    throw ShapeError("run_pipeline: clean/mixed shape mismatch");

  const auto mixed_groups = partition_groups(mixed);
  std::vector<ComplexCube> clean_groups;
  if (clean) clean_groups = partition_groups(*clean);

  std::vector<ComplexCube> predicted;
  predicted.reserve(stages.size());
  for (std::size_t g = 0; g < stages.size(); ++g) {
    const EstimatorStage& stage = stages[g];
    const bool needs_clean = stage.kind == EstimatorKind::oracle_substitution ||
                             stage.kind == EstimatorKind::oracle_magnitude_mask;
    if (needs_clean && !clean)
      throw ConfigError("run_pipeline: oracle stage requires a clean reference");
    switch (stage.kind) {
      case EstimatorKind::oracle_substitution:
        predicted.push_back(clean_groups[g]);
        break;
      case EstimatorKind::oracle_magnitude_mask:
        predicted.push_back(oracle_magnitude_mask(mixed_groups[g], clean_groups[g]));
        break;
      case EstimatorKind::wiener:
        predicted.push_back(wiener_stage(mixed_groups[g], stage));
        break;
      case EstimatorKind::linear: {
        StageInput in;
        for (std::size_t l = 0; l < g; ++l) in.predicted_lower.push_back(&predicted[l]);
        in.mixed_current = &mixed_groups[g];
        predicted.push_back(linear_stage_apply(stage, in));
        break;
      }
    }
  }
  return merge_groups(predicted, mixed.order);
}

LossBreakdown loss_total(const std::vector<ComplexCube>& predicted,
                         const std::vector<ComplexCube>& clean,
                         const std::vector<double>& weights) {
  if (predicted.size() != clean.size()) throw ShapeError("loss_total: group count mismatch");
  if (!weights.empty() && weights.size() != predicted.size())
    throw ShapeError("loss_total: weight count mismatch");
  LossBreakdown out;
  out.per_group.reserve(predicted.size());
  for (std::size_t g = 0; g < predicted.size(); ++g) {
    if (!predicted[g].same_shape(clean[g])) throw ShapeError("loss_total: group shape mismatch");
    const std::size_t n = predicted[g].size();
    if (n == 0) throw ShapeError("loss_total: empty group");
    const cplx* p = predicted[g].data();
    const cplx* c = clean[g].data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(p[i] - c[i]);
    const double w = weights.empty() ? 1.0 : weights[g];
    const double mse = acc / static_cast<double>(n);
    out.per_group.push_back(w * mse);
  }
  for (double v : out.per_group) out.total += v;
  return out;
}

RealMatrix estimate_noise_psd(const ComplexCube& noise_group) {
  if (noise_group.frames() == 0) throw ShapeError("estimate_noise_psd: no frames");
  RealMatrix psd(noise_group.slots(), noise_group.bins());
  for (std::size_t c = 0; c < noise_group.slots(); ++c) {
    for (std::size_t b = 0; b < noise_group.bins(); ++b) {
      double acc = 0.0;
      for (std::size_t t = 0; t < noise_group.frames(); ++t) acc += std::norm(noise_group(c, t, b));
      psd(c, b) = acc / static_cast<double>(noise_group.frames());
    }
  }
  return psd;
}

std::vector<EstimatorStage> oracle_stages(EstimatorKind kind, int order) {
  if (kind != EstimatorKind::oracle_substitution && kind != EstimatorKind::oracle_magnitude_mask)
    throw ConfigError("oracle_stages: kind is not an oracle estimator");
  std::vector<EstimatorStage> stages(order_groups(order).size());
  for (auto& s : stages) s.kind = kind;
  return stages;
}

std::vector<EstimatorStage> wiener_stages_from_noise(const ShcTensor& noise, double floor) {
  const auto noise_groups = partition_groups(noise);
  std::vector<EstimatorStage> stages(noise_groups.size());
  for (std::size_t g = 0; g < stages.size(); ++g) {
    stages[g].kind = EstimatorKind::wiener;
    stages[g].noise_psd = estimate_noise_psd(noise_groups[g]);
    stages[g].wiener_floor = floor;
  }
  return stages;
}

std::vector<EstimatorStage> identity_linear_stages(int order, std::size_t bins) {
  const auto groups = order_groups(order);
  std::vector<EstimatorStage> stages(groups.size());
  std::size_t prefix = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t sz = static_cast<std::size_t>(groups[g].count);
    EstimatorStage& s = stages[g];
    s.kind = EstimatorKind::linear;
    s.linear.bins = bins;
    s.linear.out_dim = sz;
    s.linear.in_dim = prefix + sz;
    s.linear.w.assign(bins * sz * (prefix + sz), cplx{0.0, 0.0});
    s.linear.bias.assign(bins * sz, cplx{0.0, 0.0});
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t o = 0; o < sz; ++o) s.linear.weight(b, o, prefix + o) = 1.0;
    }
    prefix += sz;
  }
  return stages;
}

Waveform shc_to_waveform(const ShcTensor& enhanced, const ArrayGeometry& geom, int ref_mic,
                         const StftConfig& cfg, std::size_t out_len, int fs) {
  if (ref_mic < 0 || ref_mic >= geom.count()) throw DomainError("shc_to_waveform: bad reference mic");
  const auto field = sht_inverse(enhanced, {geom.mics[ref_mic].dir});
  ComplexMatrix plane(field.frames(), field.bins());
  for (std::size_t t = 0; t < field.frames(); ++t) {
    for (std::size_t b = 0; b < field.bins(); ++b) plane(t, b) = field(0, t, b);
  }
  Waveform out;
  out.fs = fs;
  out.samples = istft(plane, cfg, out_len);
  return out;
}

}  // namespace sphonic
