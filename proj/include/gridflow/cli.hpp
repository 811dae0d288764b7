#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridflow/baselines.hpp"
#include "gridflow/config.hpp"

namespace gridflow::cli {

// Parsed --controller NAME[:ARGS] value.
struct ControllerSpec {
    enum class Kind { AllIdm, Learned, Oracle, EqualPhase, MaxPressure, Priority };
    Kind kind = Kind::AllIdm;
    double tau_equal_s = 25.0;
    double tau_min_s = -1.0;  // <0: network default
    PriorityAxis axis = PriorityAxis::Vertical;
    std::string plan_file;    // oracle: pre-computed plan
    std::string checkpoint;   // learned
    std::string name;         // as given, for file naming
};

ControllerSpec parse_controller(const std::string& text, const std::string& checkpoint_flag);

// Applies a controller to a scenario; Oracle without a plan file runs the
// hill-climbing search for this inflow configuration first.
struct ResolvedController {
    ScenarioConfig scenario;
    std::optional<PolicyNet> net;
};
ResolvedController resolve_controller(const ScenarioConfig& base, const ControllerSpec& spec,
                                      int oracle_budget, int threads);

SignalPlan load_plan_file(const std::string& path);

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string profile;  // empty: keep the config's profile
    int seeds = 10;
    int threads = 0;
    int oracle_budget = 48;
};

ExperimentConfig load_with_profile(const CommonOptions& opt);

int cmd_train(const CommonOptions& opt, const std::string& init_checkpoint);
int cmd_eval(const CommonOptions& opt, const ControllerSpec& controller,
             const std::string& oracle_table);
int cmd_oracle_search(const CommonOptions& opt);
int cmd_sweep(const CommonOptions& opt, const std::vector<ControllerSpec>& controllers);
int cmd_timespace(const CommonOptions& opt, const ControllerSpec& controller,
                  int entry_lane, int steps, bool raw_dump, bool obs_dump);

}  // namespace gridflow::cli
