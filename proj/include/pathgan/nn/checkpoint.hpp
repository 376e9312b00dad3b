#pragma once

#include <string>

#include "pathgan/nn/param_store.hpp"

namespace pathgan {

// Versioned flat text checkpoint. Header line `pathgan-ckpt v1`, then one
// line per array: `name ndim dims... values...` with values printed to 17
// significant digits, which round-trips doubles exactly.
void save_checkpoint(const std::string& path, const ParamStore& arrays);
ParamStore load_checkpoint(const std::string& path);

std::string checkpoint_to_string(const ParamStore& arrays);
ParamStore checkpoint_from_string(const std::string& text);

}  // namespace pathgan
