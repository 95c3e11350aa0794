#pragma once

#include <string>
#include <vector>

#include "sphonic/sht.hpp"
#include "sphonic/stft.hpp"
#include "sphonic/tensor.hpp"

namespace sphonic {

enum class EstimatorKind { oracle_substitution, oracle_magnitude_mask, wiener, linear };

std::string estimator_name(EstimatorKind kind);

struct LinearParams {
  std::size_t bins = 0, out_dim = 0, in_dim = 0;
  std::vector<cplx> w;     // [bin][out][in]
  std::vector<cplx> bias;  // [bin][out]

  cplx& weight(std::size_t b, std::size_t o, std::size_t i) {
    return w[(b * out_dim + o) * in_dim + i];
  }
  const cplx& weight(std::size_t b, std::size_t o, std::size_t i) const {
    return w[(b * out_dim + o) * in_dim + i];
  }
};

struct EstimatorStage {
  EstimatorKind kind = EstimatorKind::oracle_magnitude_mask;
  LinearParams linear;          // used by the linear kind
  RealMatrix noise_psd;         // used by wiener: [group coeff][bin]
  double wiener_floor = 0.05;
  bool force_unit_gain = false;  // pins the wiener gain to 1 (identity stage)
};

// Conditioning contract for stage g: all predicted lower groups plus the
// mixed coefficients of group g itself. Nothing above g is visible.
struct StageInput {
  std::vector<const ComplexCube*> predicted_lower;
  const ComplexCube* mixed_current = nullptr;
};

// predicted = mixed * min(|clean| / (|mixed| + 1e-12), 1), mixed phase kept.
ComplexCube oracle_magnitude_mask(const ComplexCube& mixed_group, const ComplexCube& clean_group);

// gain = max(xi / (1 + xi), floor), xi = max(|mixed|^2 / psd - 1, 0).
ComplexCube wiener_stage(const ComplexCube& mixed_group, const EstimatorStage& stage);

// Per bin: out = W_b * stack(predicted lower, mixed current) + bias_b.
ComplexCube linear_stage_apply(const EstimatorStage& stage, const StageInput& input);

// Runs stages low-to-high. `clean` is required iff any stage is an oracle
// kind. Output is the merge of all predicted groups.
ShcTensor run_pipeline(const ShcTensor& mixed, const std::vector<EstimatorStage>& stages,
                       const ShcTensor* clean);

struct LossBreakdown {
  std::vector<double> per_group;
  double total = 0.0;
};

// Loss_g = mean over (coeff, frame, bin) of |pred - clean|^2; total is the
// weighted sum (weights default to 1).
LossBreakdown loss_total(const std::vector<ComplexCube>& predicted,
                         const std::vector<ComplexCube>& clean,
                         const std::vector<double>& weights = {});

// Mean |.|^2 over frames per (coeff, bin).
RealMatrix estimate_noise_psd(const ComplexCube& noise_group);

std::vector<EstimatorStage> oracle_stages(EstimatorKind kind, int order);
std::vector<EstimatorStage> wiener_stages_from_noise(const ShcTensor& noise, double floor = 0.05);

// Linear stages initialized to select mixed_current (identity pipeline).
std::vector<EstimatorStage> identity_linear_stages(int order, std::size_t bins);

// sht_inverse at the reference mic's direction, then istft.
Waveform shc_to_waveform(const ShcTensor& enhanced, const ArrayGeometry& geom, int ref_mic,
                         const StftConfig& cfg, std::size_t out_len, int fs);

}  // namespace sphonic
