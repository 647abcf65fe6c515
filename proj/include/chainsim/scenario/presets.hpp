#pragma once

#include <span>
#include <string_view>

namespace chainsim {

/// Scenario files shipped with the tool, embedded at build time.
struct Preset {
    std::string_view name;
    std::string_view text;
};

std::span<const Preset> presets();
const Preset* find_preset(std::string_view name);

} // namespace chainsim
