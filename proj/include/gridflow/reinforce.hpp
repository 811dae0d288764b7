#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridflow/policy.hpp"
#include "gridflow/sim.hpp"

namespace gridflow {

struct TrainConfig {
    double gamma = 0.99;
    double alpha = 0.001;
    double lambda_outflow = 1.0;
    double lambda_collision = 5.0;
    int batch_trajectories = 32;  // B; paper scale is 640
    int max_updates = 60;         // paper scale is 200
    int checkpoint_interval = 5;
    std::vector<std::pair<double, double>> inflows;  // (f_H, f_V) per environment
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
};

// The 16 paper inflow configurations, veh/hr/lane.
const std::vector<std::pair<double, double>>& table16_inflows();

inline double raw_reward(const StepMetrics& m, double lambda_o = 1.0, double lambda_c = 5.0) {
    return lambda_o * m.outflow - lambda_c * m.collisions;
}

// Reward centering and normalization: r = (r' - mean(r')) / std(R') where
// R' <- gamma*R' + r' accumulates within an episode and the statistics run
// across episodes and updates. The std floor keeps the first samples finite.
class RewardNormalizer {
public:
    explicit RewardNormalizer(double gamma, double sigma_floor = 1e-4)
        : gamma_(gamma), floor_(sigma_floor) {}

    void begin_episode() { ret_ = 0.0; }

    double normalize(double r_prime) {
        ++n_;
        mean_ += (r_prime - mean_) / static_cast<double>(n_);
        ret_ = gamma_ * ret_ + r_prime;
        ++m_;
        const double d = ret_ - ret_mean_;
        ret_mean_ += d / static_cast<double>(m_);
        ret_m2_ += d * (ret_ - ret_mean_);
        return (r_prime - mean_) / std::max(ret_std(), floor_);
    }

    double mean() const { return mean_; }
    double ret_std() const {
        return m_ > 0 ? std::sqrt(ret_m2_ / static_cast<double>(m_)) : 0.0;
    }
    double cumulative() const { return ret_; }
    long long samples() const { return n_; }

private:
    double gamma_;
    double floor_;
    long long n_ = 0;
    double mean_ = 0.0;
    double ret_ = 0.0;
    long long m_ = 0;
    double ret_mean_ = 0.0;
    double ret_m2_ = 0.0;
};

struct AgentSample {
    int av_id;
    Observation obs;
    int action;
    std::array<double, kActions> probs;
};

struct StepRecord {
    std::vector<AgentSample> agents;
    StepMetrics metrics;
    double raw_reward = 0.0;
    double reward = 0.0;  // normalized, filled in batch order after collection
};

struct Trajectory {
    std::vector<StepRecord> steps;
    int env_index = 0;

    double outflow_rate_vph(double delta_t) const {
        if (steps.empty()) return 0.0;
        long exits = 0;
        for (const auto& s : steps) exits += s.metrics.outflow;
        return static_cast<double>(exits) * 3600.0 /
               (static_cast<double>(steps.size()) * delta_t);
    }
    long total_collisions() const {
        long c = 0;
        for (const auto& s : steps) c += s.metrics.collisions;
        return c;
    }
};

// G_t = sum_{t' >= t} gamma^{t'-t} r_{t'}, by backward recursion.
std::vector<double> reward_to_go(std::span<const double> rewards, double gamma);

// Batch policy gradient: mean over trajectories of
// sum_t sum_agents G_t * grad log pi(a^i_t | o^i_t). Throws on empty batch.
std::vector<double> reinforce_gradient(const std::vector<Trajectory>& batch,
                                       const PolicyNet& net, double gamma);

struct CheckpointInfo {
    int update = 0;
    std::string path;
    double batch_outflow_vph = 0.0;
};

// Argmax of batch outflow; ties broken earliest. Throws on empty history.
std::size_t select_best(const std::vector<CheckpointInfo>& history);

}  // namespace gridflow
