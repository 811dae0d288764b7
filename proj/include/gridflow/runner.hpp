#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridflow/reinforce.hpp"

namespace gridflow {

// Evaluation burn-in before the measured window, in steps.
inline constexpr int kEvalBurnInSteps = 500;

// Run fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
// Work items must be independent; callers keep determinism by writing into
// index-addressed slots.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Sample one action per controllable AV from the shared policy, consuming
// the environment's RNG stream in ascending AV-id order.
std::vector<std::pair<int, int>> policy_actions(SimState& env, const PolicyNet& net);

// One training episode: reset (fresh warmup), then `horizon` policy-driven
// steps. Rewards are raw only; normalization happens in batch order later.
Trajectory rollout_policy(SimState& env, const PolicyNet& net, int horizon,
                          double lambda_o, double lambda_c);

struct EvalStats {
    std::vector<double> outflows_vph;       // one per trajectory
    std::vector<double> collisions_per_hr;  // one per trajectory
    double mean_outflow_vph = 0.0;
    double std_outflow_vph = 0.0;
    double mean_collisions_per_hr = 0.0;
    double std_collisions_per_hr = 0.0;
};

// Equilibrium performance of a controller on one scenario: n trajectories
// seeded base_seed + i, each 500 + H steps after warmup with only the last H
// analyzed. Pass nullptr for the all-IDM / baseline-control case (the
// scenario's ControlMode then fully determines behavior).
EvalStats evaluate(const ScenarioConfig& cfg, const PolicyNet* net, int n_trajectories,
                   std::uint64_t base_seed, int threads = 0);

struct TrainResult {
    std::vector<CheckpointInfo> checkpoints;
    std::size_t best_index = 0;
    PolicyNet final_net;
    PolicyNet best_net;
};

// Multi-task REINFORCE: one persistent environment per inflow configuration
// (RNG stream seed ^ env_index, continuing across episodes), B trajectories
// per update spread evenly with the remainder rotating across updates,
// RMSprop ascent, a checkpoint every checkpoint_interval updates credited
// with the batch outflow measured under those parameters. Checkpoints and
// training_log.csv land in out_dir; pass initial parameters to finetune.
TrainResult train(const ScenarioConfig& base, const TrainConfig& tc,
                  const std::string& out_dir, const PolicyNet* initial = nullptr,
                  const std::function<void(int, double)>& progress = {});

}  // namespace gridflow
