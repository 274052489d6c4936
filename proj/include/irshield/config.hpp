// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "irshield/channel.hpp"
#include "irshield/experiments.hpp"

namespace irshield {

struct LoadedConfig {
  Scenario scenario;
  ExperimentConfig experiment;
  std::string source;       // file path or "<memory>"
  std::string config_hash;  // FNV-1a of the raw bytes, 16 hex digits
};

// YAML document with sections room, anchor, eavesdropper, irs, radio, defense,
// experiment plus a top-level seed. Omitted keys take the documented defaults;
// unknown keys are rejected.
// Throws ParseError (malformed YAML) or ValidationError (bad key or value).
LoadedConfig parse_config(std::string_view text, std::string source = "<memory>");
LoadedConfig load_scenario(const std::string& path);

// 64-bit FNV-1a, lowercase hex.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace irshield
