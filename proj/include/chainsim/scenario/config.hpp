#pragma once

#include <chainsim/node/network.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace YAML {
class Node;
}

namespace chainsim {

/// Load-time validation failure listing every violation as "path: message".
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// One sweep dimension. Each level assigns values at one or more document
/// paths (dotted, with numeric indices into lists, e.g. "nodes.2.miner.hash_rate").
struct Factor {
    struct Level {
        std::string label;
        std::vector<std::pair<std::string, std::string>> assignments; // path -> YAML scalar/flow text
    };
    std::string name;
    std::vector<Level> levels;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    SimTime duration;
    std::uint64_t seed = 1;
    std::uint32_t repetitions = 1;
    NetworkParams network;
    std::vector<NodeConfig> nodes;
    std::vector<Factor> factors;
};

/// Parses and validates. `origin` names the source in error messages.
ScenarioConfig parse_scenario(std::string_view text, std::string_view origin = "<input>");
ScenarioConfig load_scenario(const std::string& path);
/// Accepts "preset:NAME" or a file path.
ScenarioConfig load_scenario_source(const std::string& source);
std::string read_scenario_text(const std::string& source);

/// One point of the factor product: the document with the level's assignments applied.
struct Configuration {
    std::size_t index = 0;
    std::vector<std::pair<std::string, std::string>> factor_values; // factor name -> level label
    ScenarioConfig config;
};

/// Expands factors as a Cartesian product (first factor varies slowest).
/// Without factors returns the base configuration alone.
std::vector<Configuration> expand_configurations(std::string_view text, std::string_view origin = "<input>");

/// Sets a value inside a YAML document at a dotted path, creating missing
/// mapping sections. Throws ConfigError for missing list elements or scalars in the way.
void assign_path(YAML::Node& root, const std::string& path, const std::string& value);

} // namespace chainsim
