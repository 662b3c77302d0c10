#pragma once

#include <string>
#include <vector>

#include "corn/model.hpp"

namespace corn {

/// Versioned binary model checkpoint: config, standardization statistics and
/// raw float32 parameter arrays. Round trips are bit-exact.
void save_checkpoint(const std::string& path, MlpModel<float>& model,
                     const std::vector<double>& mean, const std::vector<double>& stddev);

struct LoadedCheckpoint {
    MlpModel<float> model;
    std::vector<double> mean;
    std::vector<double> stddev;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace corn
