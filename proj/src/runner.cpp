#include "gridflow/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "gridflow/csv.hpp"

namespace gridflow {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

namespace {

std::vector<std::pair<int, int>> sample_actions(SimState& env, const PolicyNet& net,
                                                StepRecord* record) {
    std::vector<std::pair<int, int>> actions;
    for (int id : env.controllable_av_ids()) {
        const Observation obs = observe(env, id);
        const auto probs = net.forward(obs);
        const int a = env.rng().categorical(probs);
        actions.emplace_back(id, a);
        if (record) record->agents.push_back({id, obs, a, probs});
    }
    return actions;
}

struct MeanStd {
    double mean = 0.0, stdev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

}  // namespace

std::vector<std::pair<int, int>> policy_actions(SimState& env, const PolicyNet& net) {
    return sample_actions(env, net, nullptr);
}

Trajectory rollout_policy(SimState& env, const PolicyNet& net, int horizon,
                          double lambda_o, double lambda_c) {
    env.reset();
    env.set_policy_control(true);
    Trajectory traj;
    traj.steps.reserve(horizon);
    for (int t = 0; t < horizon; ++t) {
        StepRecord rec;
        const auto actions = sample_actions(env, net, &rec);
        rec.metrics = env.step(actions);
        rec.raw_reward = raw_reward(rec.metrics, lambda_o, lambda_c);
        traj.steps.push_back(std::move(rec));
    }
    return traj;
}

EvalStats evaluate(const ScenarioConfig& cfg, const PolicyNet* net, int n_trajectories,
                   std::uint64_t base_seed, int threads) {
    auto network = std::make_shared<const Network>(Network::build_grid(cfg.network));
    EvalStats stats;
    stats.outflows_vph.resize(n_trajectories);
    stats.collisions_per_hr.resize(n_trajectories);
    const double window_hr =
        static_cast<double>(cfg.horizon_steps) * cfg.delta_t_s / 3600.0;

    parallel_for(n_trajectories, threads, [&](int i) {
        ScenarioConfig c = cfg;
        c.seed = base_seed + static_cast<std::uint64_t>(i);
        SimState env(network, c);
        if (net) env.set_policy_control(true);
        long exits = 0, collisions = 0;
        const int total = kEvalBurnInSteps + c.horizon_steps;
        for (int t = 0; t < total; ++t) {
            const auto actions =
                net ? sample_actions(env, *net, nullptr) : std::vector<std::pair<int, int>>{};
            const StepMetrics m = env.step(actions);
            if (t >= kEvalBurnInSteps) {
                exits += m.outflow;
                collisions += m.collisions;
            }
        }
        stats.outflows_vph[i] = static_cast<double>(exits) / window_hr;
        stats.collisions_per_hr[i] = static_cast<double>(collisions) / window_hr;
    });

    const auto o = mean_std(stats.outflows_vph);
    const auto c = mean_std(stats.collisions_per_hr);
    stats.mean_outflow_vph = o.mean;
    stats.std_outflow_vph = o.stdev;
    stats.mean_collisions_per_hr = c.mean;
    stats.std_collisions_per_hr = c.stdev;
    return stats;
}

TrainResult train(const ScenarioConfig& base, const TrainConfig& tc,
                  const std::string& out_dir, const PolicyNet* initial,
                  const std::function<void(int, double)>& progress) {
    if (tc.inflows.empty()) throw std::invalid_argument("train: no inflow configurations");
    if (tc.batch_trajectories < static_cast<int>(tc.inflows.size()))
        throw std::invalid_argument("train: batch smaller than environment count");
    std::filesystem::create_directories(out_dir);

    auto network = std::make_shared<const Network>(Network::build_grid(base.network));
    const int n_envs = static_cast<int>(tc.inflows.size());
    std::vector<std::unique_ptr<SimState>> envs;
    envs.reserve(n_envs);
    for (int e = 0; e < n_envs; ++e) {
        ScenarioConfig c = base;
        c.inflow_horizontal_vph = tc.inflows[e].first;
        c.inflow_vertical_vph = tc.inflows[e].second;
        c.seed = tc.seed ^ static_cast<std::uint64_t>(e);
        envs.push_back(std::make_unique<SimState>(network, c));
    }

    TrainResult result;
    PolicyNet net;
    if (initial) {
        net = *initial;
    } else {
        Rng init_rng(splitmix64(tc.seed));
        net.init(init_rng);
    }
    RmsProp opt(PolicyNet::param_count(), tc.alpha);
    RewardNormalizer normalizer(tc.gamma);

    CsvWriter log(out_dir + "/training_log.csv",
                  {"update", "batch_mean_outflow_vph", "batch_std_outflow_vph",
                   "batch_mean_collisions", "grad_norm", "wall_s"});

    auto save_checkpoint = [&](int update, double batch_outflow) {
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%04d.bin", update);
        const std::string path = out_dir + "/" + name;
        net.update_index = static_cast<std::uint64_t>(update);
        net.save(path);
        result.checkpoints.push_back({update, path, batch_outflow});
    };

    const int per_env = tc.batch_trajectories / n_envs;
    const int remainder = tc.batch_trajectories % n_envs;

    for (int u = 0; u < tc.max_updates; ++u) {
        const auto wall_start = std::chrono::steady_clock::now();

        // Trajectories per environment; the remainder rotates across updates.
        std::vector<int> quota(n_envs, per_env);
        for (int j = 0; j < remainder; ++j) quota[(u + j) % n_envs] += 1;

        std::vector<std::vector<Trajectory>> per_env_trajs(n_envs);
        parallel_for(n_envs, tc.threads, [&](int e) {
            per_env_trajs[e].reserve(quota[e]);
            for (int k = 0; k < quota[e]; ++k) {
                Trajectory t = rollout_policy(*envs[e], net, base.horizon_steps,
                                              tc.lambda_outflow, tc.lambda_collision);
                t.env_index = e;
                per_env_trajs[e].push_back(std::move(t));
            }
        });

        // Normalize rewards in a fixed order so the shared running statistics
        // are reproducible regardless of worker count.
        std::vector<Trajectory> batch;
        batch.reserve(tc.batch_trajectories);
        for (auto& env_trajs : per_env_trajs)
            for (auto& t : env_trajs) batch.push_back(std::move(t));
        for (auto& t : batch) {
            normalizer.begin_episode();
            for (auto& s : t.steps) s.reward = normalizer.normalize(s.raw_reward);
        }

        std::vector<double> outflows;
        double collisions = 0.0;
        for (const auto& t : batch) {
            outflows.push_back(t.outflow_rate_vph(base.delta_t_s));
            collisions += static_cast<double>(t.total_collisions());
        }
        const auto batch_stats = mean_std(outflows);
        collisions /= static_cast<double>(batch.size());

        if (u % tc.checkpoint_interval == 0) save_checkpoint(u, batch_stats.mean);

        const auto grad = reinforce_gradient(batch, net, tc.gamma);
        double grad_norm = 0.0;
        for (double g : grad) grad_norm += g * g;
        grad_norm = std::sqrt(grad_norm);
        opt.update(net.params(), grad);
        net.update_index = static_cast<std::uint64_t>(u + 1);

        const double wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        log.row({std::to_string(u), csv_num(batch_stats.mean), csv_num(batch_stats.stdev),
                 csv_num(collisions), csv_num(grad_norm), csv_num(wall_s, 3)});
        log.flush();
        if (progress) progress(u, batch_stats.mean);
    }

    if (result.checkpoints.empty())
        save_checkpoint(0, std::numeric_limits<double>::quiet_NaN());

    result.best_index = select_best(result.checkpoints);
    {
        std::ofstream best(out_dir + "/best");
        best << result.checkpoints[result.best_index].path << "\n"
             << csv_num(result.checkpoints[result.best_index].batch_outflow_vph) << "\n";
    }
    result.final_net = net;
    result.best_net = PolicyNet::load(result.checkpoints[result.best_index].path);
    return result;
}

}  // namespace gridflow
