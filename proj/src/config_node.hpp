#pragma once

#include "dyntrack/config.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <string>

namespace dyntrack::detail {

[[noreturn]] void config_fail(const YAML::Node& node, const std::string& message);

ExperimentConfig config_from_node(const YAML::Node& root, const std::filesystem::path& base_dir);

/// Deep copy of `base` with maps from `overlay` merged key by key; scalars
/// and sequences in `overlay` replace those in `base`.
YAML::Node merge_nodes(const YAML::Node& base, const YAML::Node& overlay);

}  // namespace dyntrack::detail
