#pragma once

#include <cstdint>
#include <vector>

#include "gridflow/runner.hpp"

namespace gridflow {

struct OracleCandidate {
    double tau_h_s;
    double tau_v_s;
    double mean_outflow_vph;  // search-protocol score
};

struct OracleResult {
    SignalPlan plan;                        // best plan found
    double outflow_vph = 0.0;               // full-protocol rescore of plan
    double start_outflow_vph = 0.0;         // full-protocol rescore of (25, 25)
    std::vector<OracleCandidate> visited;   // in evaluation order
    int evaluations = 0;
};

// Coordinate hill climbing over integer-second phase lengths starting from
// (25, 25) with step sizes 8 -> 4 -> 2 -> 1, all vehicles car-following.
// Candidate scoring reuses the same seeds (search_trajectories of them) so
// comparisons are paired; the final plan and the starting plan are both
// rescored with final_trajectories and the better one is returned.
// eval_budget caps the number of distinct candidate evaluations.
OracleResult oracle_search(const ScenarioConfig& base, int eval_budget,
                           std::uint64_t seed, int search_trajectories = 3,
                           int final_trajectories = 10, int threads = 0);

// Paper defaults for the MaxPressure minimum phase duration by network shape.
double default_tau_min_s(const NetworkSpec& spec);

}  // namespace gridflow
