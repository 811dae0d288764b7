#include "gridflow/reinforce.hpp"

#include <stdexcept>

namespace gridflow {

const std::vector<std::pair<double, double>>& table16_inflows() {
    static const std::vector<std::pair<double, double>> k = {
        {1000, 400}, {1000, 550}, {1000, 700}, {1000, 850},
        {850, 400},  {850, 550},  {850, 700},  {850, 850},  {850, 1000},
        {700, 700},  {700, 850},  {700, 1000},
        {550, 850},  {550, 1000},
        {400, 850},  {400, 1000},
    };
    return k;
}

std::vector<double> reward_to_go(std::span<const double> rewards, double gamma) {
    std::vector<double> g(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc = rewards[i] + gamma * acc;
        g[i] = acc;
    }
    return g;
}

std::vector<double> reinforce_gradient(const std::vector<Trajectory>& batch,
                                       const PolicyNet& net, double gamma) {
    if (batch.empty()) throw std::invalid_argument("reinforce_gradient: empty batch");
    std::vector<double> grad(PolicyNet::param_count(), 0.0);
    std::vector<double> rewards;
    for (const auto& traj : batch) {
        rewards.clear();
        for (const auto& s : traj.steps) rewards.push_back(s.reward);
        const auto g = reward_to_go(rewards, gamma);
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            for (const auto& a : traj.steps[t].agents)
                net.accumulate_logprob_grad(a.obs, a.action, g[t], grad);
        }
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (double& v : grad) v *= inv_b;
    return grad;
}

std::size_t select_best(const std::vector<CheckpointInfo>& history) {
    if (history.empty()) throw std::invalid_argument("select_best: empty history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        const double cur = history[i].batch_outflow_vph;
        const double ref = history[best].batch_outflow_vph;
        if (std::isnan(cur)) continue;
        if (std::isnan(ref) || cur > ref) best = i;
    }
    return best;
}

}  // namespace gridflow
