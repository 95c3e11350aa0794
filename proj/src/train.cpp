#include "sphonic/train.hpp"

#include <cmath>

#include "sphonic/errors.hpp"
#include "sphonic/rng.hpp"

namespace sphonic {

namespace {

struct StageGrad {
  std::vector<cplx> w;
  std::vector<cplx> bias;
  double loss_sum = 0.0;       // sum of |e|^2 over cells, this stage
  std::size_t cell_count = 0;  // cells contributing to the mean
};

// Accumulates sum |e|^2 and (optionally) d(sum |e|^2)/d(params) for one
// example. Gradients are complex pairs (d/dRe, d/dIm).
void stage_forward_backward(const EstimatorStage& stage, const StageInput& input,
                            const ComplexCube& target, StageGrad* grad, bool want_grad) {
  const LinearParams& p = stage.linear;
  const ComplexCube& mixed = *input.mixed_current;
  std::vector<cplx> x(p.in_dim);
  for (std::size_t t = 0; t < mixed.frames(); ++t) {
    for (std::size_t b = 0; b < mixed.bins(); ++b) {
      std::size_t k = 0;
      for (const ComplexCube* g : input.predicted_lower) {
        for (std::size_t c = 0; c < g->slots(); ++c) x[k++] = (*g)(c, t, b);
      }
      for (std::size_t c = 0; c < mixed.slots(); ++c) x[k++] = mixed(c, t, b);
      for (std::size_t o = 0; o < p.out_dim; ++o) {
        cplx e = p.bias[b * p.out_dim + o] - target(o, t, b);
        const cplx* wrow = &p.w[(b * p.out_dim + o) * p.in_dim];
        for (std::size_t i = 0; i < p.in_dim; ++i) e += wrow[i] * x[i];
        grad->loss_sum += std::norm(e);
        if (want_grad) {
          cplx* gw = &grad->w[(b * p.out_dim + o) * p.in_dim];
          const cplx e2 = 2.0 * e;
          for (std::size_t i = 0; i < p.in_dim; ++i) gw[i] += e2 * std::conj(x[i]);
          grad->bias[b * p.out_dim + o] += e2;
        }
      }
    }
  }
  grad->cell_count += p.out_dim * mixed.frames() * mixed.bins();
}

class Optimizer {
 public:
  Optimizer(TrainConfig::Optimizer kind, std::size_t n_real_params)
      : kind_(kind), m_(n_real_params, 0.0), v_(n_real_params, 0.0) {}

  void step(double lr, const std::vector<double>& grad, std::vector<double>* params) {
    if (kind_ == TrainConfig::Optimizer::sgd) {
      for (std::size_t i = 0; i < params->size(); ++i) (*params)[i] -= lr * grad[i];
      return;
    }
    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < params->size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      (*params)[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  TrainConfig::Optimizer kind_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

std::vector<double> flatten(const LinearParams& p) {
  std::vector<double> out;
  out.reserve(2 * (p.w.size() + p.bias.size()));
  for (const cplx& c : p.w) {
    out.push_back(c.real());
    out.push_back(c.imag());
  }
  for (const cplx& c : p.bias) {
    out.push_back(c.real());
    out.push_back(c.imag());
  }
  return out;
}

void unflatten(const std::vector<double>& flat, LinearParams* p) {
  std::size_t k = 0;
  for (cplx& c : p->w) {
    c = cplx{flat[k], flat[k + 1]};
    k += 2;
  }
  for (cplx& c : p->bias) {
    c = cplx{flat[k], flat[k + 1]};
    k += 2;
  }
}

std::vector<double> flatten_grad(const StageGrad& g, double scale) {
  std::vector<double> out;
  out.reserve(2 * (g.w.size() + g.bias.size()));
  for (const cplx& c : g.w) {
    out.push_back(scale * c.real());
    out.push_back(scale * c.imag());
  }
  for (const cplx& c : g.bias) {
    out.push_back(scale * c.real());
    out.push_back(scale * c.imag());
  }
  return out;
}

// Conditioning inputs for stage g of one example under the given mode.
// `predicted` holds this example's already-computed lower-stage outputs (used
// when free-running); `clean_groups` is used when teacher forcing.
StageInput conditioning(std::size_t g, const std::vector<ComplexCube>& mixed_groups,
                        const std::vector<ComplexCube>& clean_groups,
                        const std::vector<ComplexCube>& predicted, bool teacher_forcing) {
  StageInput in;
  const auto& lower = teacher_forcing ? clean_groups : predicted;
  for (std::size_t l = 0; l < g; ++l) in.predicted_lower.push_back(&lower[l]);
  in.mixed_current = &mixed_groups[g];
  return in;
}

}  // namespace

TrainResult train_stages(const std::vector<TrainExample>& dataset,
                         const std::vector<TrainExample>& validation, const TrainConfig& cfg) {
  if (dataset.empty()) throw ConfigError("train_stages: empty dataset");
  if (cfg.lr < 0.0 || cfg.epochs < 1) throw ConfigError("train_stages: bad lr or epoch budget");
  const int order = dataset.front().mixed.order;
  const std::size_t bins = dataset.front().mixed.data.bins();
  for (const auto& ex : dataset) {
    if (ex.mixed.order != order || ex.clean.order != order ||
        !ex.mixed.data.same_shape(ex.clean.data) || ex.mixed.data.bins() != bins)
      throw ShapeError("train_stages: inconsistent dataset shapes");
  }
  const auto ranges = order_groups(order);
  const std::size_t n_groups = ranges.size();
  if (!cfg.group_weights.empty() && cfg.group_weights.size() != n_groups)
    throw ConfigError("train_stages: group weight count mismatch");

  const std::vector<TrainExample>& val = validation.empty() ? dataset : validation;

  // Pre-partition every example once.
  std::vector<std::vector<ComplexCube>> mixed_parts, clean_parts, val_mixed, val_clean;
  for (const auto& ex : dataset) {
    mixed_parts.push_back(partition_groups(ex.mixed));
    clean_parts.push_back(partition_groups(ex.clean));
  }
  for (const auto& ex : val) {
    val_mixed.push_back(partition_groups(ex.mixed));
    val_clean.push_back(partition_groups(ex.clean));
  }

  TrainResult out;
  out.stages = identity_linear_stages(order, bins);

  std::vector<Optimizer> opts;
  for (const auto& s : out.stages) {
    opts.emplace_back(cfg.optimizer, 2 * (s.linear.w.size() + s.linear.bias.size()));
  }

  const auto weight_of = [&](std::size_t g) {
    return cfg.group_weights.empty() ? 1.0 : cfg.group_weights[g];
  };

  // Free-running forward over one partitioned example with current params.
  const auto forward_predicted = [&](const std::vector<ComplexCube>& mixed_groups) {
    std::vector<ComplexCube> pred;
    pred.reserve(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      StageInput in;
      for (std::size_t l = 0; l < g; ++l) in.predicted_lower.push_back(&pred[l]);
      in.mixed_current = &mixed_groups[g];
      pred.push_back(linear_stage_apply(out.stages[g], in));
    }
    return pred;
  };

  const auto eval_loss = [&](const std::vector<std::vector<ComplexCube>>& mixed_set,
                             const std::vector<std::vector<ComplexCube>>& clean_set) {
    std::vector<double> sums(n_groups, 0.0);
    std::vector<std::size_t> counts(n_groups, 0);
    for (std::size_t e = 0; e < mixed_set.size(); ++e) {
      const auto pred = forward_predicted(mixed_set[e]);
      // teacher-forced evaluation would hide cross-stage drift; score the
      // same free-running path inference uses
      for (std::size_t g = 0; g < n_groups; ++g) {
        const cplx* a = pred[g].data();
        const cplx* b = clean_set[e][g].data();
        for (std::size_t i = 0; i < pred[g].size(); ++i) sums[g] += std::norm(a[i] - b[i]);
        counts[g] += pred[g].size();
      }
    }
    LossBreakdown lb;
    for (std::size_t g = 0; g < n_groups; ++g) {
      lb.per_group.push_back(weight_of(g) * sums[g] / static_cast<double>(counts[g]));
      lb.total += lb.per_group.back();
    }
    return lb;
  };

  const int outer = cfg.joint ? 1 : static_cast<int>(n_groups);
  for (int pass = 0; pass < outer; ++pass) {
    // Each sequential pass optimizes a fresh stage, so the schedule restarts;
    // carrying a collapsed lr into an untrained stage would freeze it.
    double lr = cfg.lr;
    double best_val = -1.0;
    int stall = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<StageGrad> grads(n_groups);
      for (std::size_t g = 0; g < n_groups; ++g) {
        grads[g].w.assign(out.stages[g].linear.w.size(), cplx{});
        grads[g].bias.assign(out.stages[g].linear.bias.size(), cplx{});
      }
      for (std::size_t e = 0; e < dataset.size(); ++e) {
        std::vector<ComplexCube> predicted;
        if (!cfg.teacher_forcing) predicted = forward_predicted(mixed_parts[e]);
        for (std::size_t g = 0; g < n_groups; ++g) {
          const bool train_this = cfg.joint || static_cast<int>(g) == pass;
          const auto in =
              conditioning(g, mixed_parts[e], clean_parts[e], predicted, cfg.teacher_forcing);
          stage_forward_backward(out.stages[g], in, clean_parts[e][g], &grads[g], train_this);
        }
      }

      LossBreakdown train_lb;
      for (std::size_t g = 0; g < n_groups; ++g) {
        train_lb.per_group.push_back(weight_of(g) * grads[g].loss_sum /
                                     static_cast<double>(grads[g].cell_count));
        train_lb.total += train_lb.per_group.back();
      }

      for (std::size_t g = 0; g < n_groups; ++g) {
        if (!cfg.joint && static_cast<int>(g) != pass) continue;
        const double scale = weight_of(g) / static_cast<double>(grads[g].cell_count);
        auto flat_grad = flatten_grad(grads[g], scale);
        auto flat = flatten(out.stages[g].linear);
        opts[g].step(lr, flat_grad, &flat);
        unflatten(flat, &out.stages[g].linear);
      }

      const auto val_lb = eval_loss(val_mixed, val_clean);
      out.history.train.push_back(train_lb);
      out.history.val_total.push_back(val_lb.total);
      out.history.lr.push_back(lr);

      // Sequential passes schedule on the group being trained; the untrained
      // groups contribute a constant floor that would mask its progress.
      const double sched = cfg.joint ? val_lb.total : val_lb.per_group[pass];
      if (best_val < 0.0 || sched < best_val * (1.0 - 1e-7)) {
        best_val = sched;
        stall = 0;
      } else if (++stall >= cfg.patience) {
        lr *= 0.5;
        stall = 0;
      }
    }
  }
  return out;
}

double grad_check(const EstimatorStage& stage, const StageInput& input, const ComplexCube& target,
                  std::uint64_t seed, int n_params, double epsilon) {
  if (stage.kind != EstimatorKind::linear) throw ConfigError("grad_check: linear stages only");

  StageGrad grad;
  grad.w.assign(stage.linear.w.size(), cplx{});
  grad.bias.assign(stage.linear.bias.size(), cplx{});
  stage_forward_backward(stage, input, target, &grad, true);
  const double scale = 1.0 / static_cast<double>(grad.cell_count);
  const auto analytic = flatten_grad(grad, scale);

  EstimatorStage probe = stage;
  const auto loss_at = [&](const std::vector<double>& flat) {
    unflatten(flat, &probe.linear);
    StageGrad g;
    stage_forward_backward(probe, input, target, &g, false);
    return g.loss_sum / static_cast<double>(g.cell_count);
  };

  auto flat = flatten(stage.linear);
  Rng rng(seed);
  double max_rel = 0.0;
  for (int k = 0; k < n_params; ++k) {
    const std::size_t idx =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(flat.size()) - 1));
    const double saved = flat[idx];
    flat[idx] = saved + epsilon;
    const double lp = loss_at(flat);
    flat[idx] = saved - epsilon;
    const double lm = loss_at(flat);
    flat[idx] = saved;
    const double numeric = (lp - lm) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[idx]), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[idx] - numeric) / denom);
  }
  return max_rel;
}

}  // namespace sphonic
