#include "gridflow/baselines.hpp"

#include <algorithm>
#include <map>

namespace gridflow {

double default_tau_min_s(const NetworkSpec& spec) {
    if (spec.topology == Topology::FourWay) return 12.0;
    if (spec.rows >= 3 || spec.cols >= 3) return 6.0;
    return 4.0;
}

namespace {

ScenarioConfig with_plan(const ScenarioConfig& base, double tau_h, double tau_v) {
    ScenarioConfig cfg = base;
    cfg.control.mode = ControlMode::FixedSignal;
    cfg.control.plan = {tau_h, tau_v, 0.0};
    return cfg;
}

}  // namespace

OracleResult oracle_search(const ScenarioConfig& base, int eval_budget,
                           std::uint64_t seed, int search_trajectories,
                           int final_trajectories, int threads) {
    OracleResult result;
    std::map<std::pair<int, int>, double> cache;

    // Outflow is a count over the measured window; window-boundary and
    // schedule-alignment effects give the objective a systematic texture of a
    // couple of vehicles per window even where service is demand-limited. A
    // move must beat that granularity to count as an improvement, otherwise
    // the climb wanders along measurement texture instead of throughput.
    const double min_improvement_vph =
        3.0 * 3600.0 / (static_cast<double>(base.horizon_steps) * base.delta_t_s);

    auto score = [&](int tau_h, int tau_v) {
        const auto key = std::make_pair(tau_h, tau_v);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        const auto stats = evaluate(with_plan(base, tau_h, tau_v), nullptr,
                                    search_trajectories, seed, threads);
        cache[key] = stats.mean_outflow_vph;
        ++result.evaluations;
        result.visited.push_back({static_cast<double>(tau_h), static_cast<double>(tau_v),
                                  stats.mean_outflow_vph});
        return stats.mean_outflow_vph;
    };

    int cur_h = 25, cur_v = 25;
    double cur_score = score(cur_h, cur_v);

    static constexpr int kSteps[] = {8, 4, 2, 1};
    for (int step : kSteps) {
        bool improved = true;
        while (improved && result.evaluations < eval_budget) {
            improved = false;
            const int candidates[4][2] = {{cur_h + step, cur_v},
                                          {cur_h - step, cur_v},
                                          {cur_h, cur_v + step},
                                          {cur_h, cur_v - step}};
            int best_h = cur_h, best_v = cur_v;
            double best = cur_score;
            for (const auto& c : candidates) {
                if (c[0] < 1 || c[1] < 1) continue;
                if (result.evaluations >= eval_budget) break;
                const double s = score(c[0], c[1]);
                if (s > best + min_improvement_vph) {
                    best = s;
                    best_h = c[0];
                    best_v = c[1];
                }
            }
            if (best > cur_score + min_improvement_vph) {
                cur_h = best_h;
                cur_v = best_v;
                cur_score = best;
                improved = true;
            }
        }
        if (result.evaluations >= eval_budget) break;
    }

    // Rescore under the full evaluation protocol; keep whichever of the found
    // plan and the starting plan actually holds up.
    const auto final_stats =
        evaluate(with_plan(base, cur_h, cur_v), nullptr, final_trajectories, seed, threads);
    double final_outflow = final_stats.mean_outflow_vph;
    double start_outflow = final_outflow;
    if (cur_h != 25 || cur_v != 25) {
        const auto start_stats =
            evaluate(with_plan(base, 25, 25), nullptr, final_trajectories, seed, threads);
        start_outflow = start_stats.mean_outflow_vph;
        if (start_outflow > final_outflow) {
            cur_h = 25;
            cur_v = 25;
            final_outflow = start_outflow;
        }
    }
    result.plan = {static_cast<double>(cur_h), static_cast<double>(cur_v), 0.0};
    result.outflow_vph = final_outflow;
    result.start_outflow_vph = start_outflow;
    return result;
}

}  // namespace gridflow
