#pragma once

#include <cstdint>
#include <vector>

#include "sphonic/enhance.hpp"

namespace sphonic {

struct TrainConfig {
  enum class Optimizer { sgd, adam };
  Optimizer optimizer = Optimizer::adam;
  double lr = 1e-3;
  int epochs = 200;
  int patience = 2;  // stalled validation epochs before the lr halves
  std::uint64_t seed = 0;
  bool teacher_forcing = true;  // condition on clean lower groups during training
  bool joint = true;            // false: train stages one at a time, low to high
  std::vector<double> group_weights;  // empty = all ones
};

struct TrainExample {
  ShcTensor mixed;
  ShcTensor clean;
};

struct TrainHistory {
  std::vector<LossBreakdown> train;  // one entry per epoch
  std::vector<double> val_total;
  std::vector<double> lr;
};

struct TrainResult {
  std::vector<EstimatorStage> stages;
  TrainHistory history;
};

// Full-batch gradient training of linear stages against the summed per-group
// MSE. Validation defaults to the training set when `validation` is empty.
TrainResult train_stages(const std::vector<TrainExample>& dataset,
                         const std::vector<TrainExample>& validation, const TrainConfig& cfg);

// Analytic gradient of the single-stage MSE loss vs central finite
// differences over >= n_params randomly chosen parameters (real and
// imaginary parts checked separately). Returns the max relative error.
double grad_check(const EstimatorStage& stage, const StageInput& input, const ComplexCube& target,
                  std::uint64_t seed, int n_params = 50, double epsilon = 1e-6);

}  // namespace sphonic
