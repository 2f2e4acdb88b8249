#pragma once

#include <string>

#include "satnn/model.hpp"

namespace satnn {

// FNV-1a over the canonical config serialization; used to detect
// checkpoint/config mismatches at load time.
std::string config_hash(const ModelConfig& cfg);

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& text);

// Self-describing JSON container: model config + hash, every named parameter
// with its Adam moments and EMA shadow, and the optimizer step counter.
void save_checkpoint(const std::string& path, const GnnModel<float>& model);
GnnModel<float> load_checkpoint(const std::string& path);

}  // namespace satnn
