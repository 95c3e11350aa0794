#pragma once

#include <string>
#include <vector>

#include "sphonic/enhance.hpp"

namespace sphonic {

struct LoadedModel {
  std::vector<EstimatorStage> stages;
  int order = 0;
  std::string config_hash;
};

// Versioned container: magic, version, JSON header (shapes, kinds, config
// hash), then little-endian float64 parameter blocks. Linear stages only.
void save_stages(const std::string& path, const std::vector<EstimatorStage>& stages, int order,
                 const std::string& config_hash);

LoadedModel load_stages(const std::string& path);

}  // namespace sphonic
