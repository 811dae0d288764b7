#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gridflow/reinforce.hpp"

namespace gridflow {

// Configuration problems carry the offending key path in the message and map
// to exit code 1 at the CLI.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One document fully determines a run: scenario, controller-independent
// simulation parameters, and training setup. The `profile` field selects the
// desk or paper default scale for horizon/batch/updates; explicit keys win.
struct ExperimentConfig {
    std::string profile = "desk";
    ScenarioConfig scenario;
    TrainConfig train;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment(const std::string& path);
void save_experiment(const ExperimentConfig& cfg, const std::string& path);

}  // namespace gridflow
