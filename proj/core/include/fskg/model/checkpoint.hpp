#pragma once

#include <string>

#include "fskg/model/model.hpp"

namespace fskg::model {

// Self-describing binary container: named sections of 64-bit little-endian
// floats holding every parameter table plus the hyperparameters. Loading
// rejects unknown version tags.
void save_checkpoint(const std::string& path, const ModelState& state);
ModelState load_checkpoint(const std::string& path);

} // namespace fskg::model
