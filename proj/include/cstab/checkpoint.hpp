#pragma once

#include <string>

#include "cstab/model.hpp"

namespace cstab {

// Versioned little-endian binary checkpoint: magic, version, config ints,
// then raw IEEE-754 doubles in parameters() order. Round-trips bit-exactly.
void save_checkpoint(const ToyTransformer& model, const std::string& path);
ToyTransformer load_checkpoint(const std::string& path);

uint64_t file_hash(const std::string& path);

}  // namespace cstab
