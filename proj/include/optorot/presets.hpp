#pragma once

#include "optorot/params.hpp"

#include <string>
#include <vector>

namespace optorot {

struct Preset {
  std::string name;
  std::string config_text;
  std::vector<std::string> provenance;  // which values are quoted vs assumed
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
const Preset& find_preset(const std::string& name);
SystemParams load_preset(const std::string& name);

}  // namespace optorot
