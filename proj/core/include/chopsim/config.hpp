#pragma once

#include <string>
#include <string_view>

#include "chopsim/planner.hpp"
#include "chopsim/scene.hpp"

namespace chopsim {

/// Everything a config file can set.
struct SimConfig {
    SceneGenConfig scene;
    PlannerConfig planner;
    /// Cut style used for the multi-object task suite.
    CutStyle task_style = CutStyle::Long;
};

/// Thrown for malformed or out-of-range configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Canonical JSON (sorted keys). Every field is written.
std::string config_to_json(const SimConfig& config);
std::string planner_config_to_json(const PlannerConfig& config);

/// Fields absent from the file keep the values in `base`. Unknown keys are
/// rejected.
SimConfig config_from_json(std::string_view text, SimConfig base = {});

/// Success probabilities forced to 1 and stuck probability to 0.
SimConfig make_perfect(SimConfig config);

}  // namespace chopsim
