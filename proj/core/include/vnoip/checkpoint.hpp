#pragma once

#include <string>

#include "vnoip/model.hpp"

namespace vnoip {

struct CheckpointMeta {
  std::int64_t epoch = 0;
  double best_val_msle = 0.0;
  std::uint64_t config_hash = 0;
};

/// Binary checkpoint: named, shaped, row-major double entries plus training
/// metadata. Save/load round-trips are bit-exact.
void save_checkpoint(const std::string& path, ModelParams& params, const CheckpointMeta& meta);

/// Load into an allocated model. Entry names must match the model's parameter
/// set exactly: unknown names in the file and parameters missing from it are
/// both rejected.
CheckpointMeta load_checkpoint(const std::string& path, ModelParams& params);

}  // namespace vnoip
