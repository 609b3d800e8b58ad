#pragma once

#include <string>

#include "hvv/model.hpp"

namespace hvv {

// Versioned binary container: magic, version, embedded model config text,
// then named f64 matrices with shape headers. Round-trips parameters
// bit-exactly.
void save_checkpoint(const std::string& path, const RoleClassifier& model);

RoleClassifier load_checkpoint(const std::string& path);

}  // namespace hvv
