//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>

#include "paccmann/model/model.hpp"

namespace paccmann::model {

struct VersionMismatch : common::InputError {
  using InputError::InputError;
};
struct CorruptCheckpoint : common::InputError {
  using InputError::InputError;
};

// Text manifest (key=value lines) followed by named row-major float32
// arrays and a trailing little-endian CRC32 over everything before it.
void save(Model<float>& m, const std::string& path);
Model<float> load(const std::string& path);

}  // namespace paccmann::model
