// Acceptance suite: runs every acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "gridflow/baselines.hpp"
#include "gridflow/observation.hpp"
#include "gridflow/runner.hpp"

using namespace gridflow;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

std::shared_ptr<const Network> shared_net(const NetworkSpec& spec) {
    return std::make_shared<const Network>(Network::build_grid(spec));
}

PolicyNet random_params(Rng& rng) {
    PolicyNet net;
    net.init(rng);
    const int w3 = PolicyNet::param_count() - (3 * kHidden + 3);
    for (int i = w3; i < PolicyNet::param_count(); ++i)
        net.params()[i] = rng.uniform(-0.3, 0.3);
    return net;
}

// ---------------------------------------------------------------------------
// 1. log-prob gradient vs central finite differences
void criterion_gradient() {
    Rng rng(2024);
    double worst = 0.0;
    int triples = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PolicyNet net = random_params(rng);
        Observation obs;
        for (auto& x : obs) x = rng.uniform();
        const int action = static_cast<int>(rng.next_u64() % 3);
        std::vector<double> grad(PolicyNet::param_count(), 0.0);
        net.accumulate_logprob_grad(obs, action, 1.0, grad);
        const double eps = 1e-5;
        // full sweep on a third of the triples, strided spot checks elsewhere
        const int stride = (trial % 3 == 0) ? 1 : 37;
        for (int i = 0; i < PolicyNet::param_count(); i += stride) {
            const double orig = net.params()[i];
            net.params()[i] = orig + eps;
            const double up = std::log(net.forward(obs)[action]);
            net.params()[i] = orig - eps;
            const double dn = std::log(net.forward(obs)[action]);
            net.params()[i] = orig;
            const double fd = (up - dn) / (2.0 * eps);
            const double scale = std::max({1.0, std::abs(fd), std::abs(grad[i])});
            worst = std::max(worst, std::abs(fd - grad[i]) / scale);
        }
        ++triples;
    }
    report(1, worst < 1e-4 && triples >= 100,
           fmt("gradient vs finite differences, %d triples, max rel err %.3g (< 1e-4)",
               triples, worst));
}

// ---------------------------------------------------------------------------
// 2. decompose/observe vs an independent brute-force re-derivation
Observation brute_force_observe(const SimState& state, int av_id) {
    const Network& net = state.network();
    const Vehicle& ego = *state.find_vehicle(av_id);
    const Intersection& node = net.intersection(net.lane(ego.lane).downstream);
    const double v_max = state.config().network.speed_limit_mps;
    auto vehicles_on = [&](LaneId lane) {
        std::vector<const Vehicle*> vs;
        for (const auto& v : state.vehicles())
            if (v.lane == lane) vs.push_back(&v);
        std::sort(vs.begin(), vs.end(),
                  [](const Vehicle* a, const Vehicle* b) { return a->position > b->position; });
        return vs;
    };
    auto feature = [&](const Vehicle* v, double* out) {
        if (!v) {
            out[0] = 0.0;
            out[1] = 1.0;
            return;
        }
        const Lane& l = net.lane(v->lane);
        out[0] = v->speed / v_max;
        out[1] = (l.length_m - v->position) / l.length_m;
    };
    Observation obs{};
    {
        const auto vs = vehicles_on(ego.lane);
        std::size_t i = 0;
        while (vs[i]->id != av_id) ++i;
        const Vehicle* tail = vs[i];
        for (std::size_t j = i + 1; j < vs.size() && vs[j]->cls == VehicleClass::Idm; ++j)
            tail = vs[j];
        feature(vs[i], &obs[0]);
        feature(tail, &obs[2]);
    }
    for (int k = 1; k <= 3; ++k) {
        double* slot = &obs[4 + 6 * (k - 1)];
        const Heading h = rotate_cw(net.lane(ego.lane).heading, k);
        const LaneId lane = node.approach[heading_index(h)];
        if (lane == kNoLane) {
            feature(nullptr, slot);
            feature(nullptr, slot + 2);
            feature(nullptr, slot + 4);
            continue;
        }
        const auto vs = vehicles_on(lane);
        std::size_t first_av = 0;
        while (first_av < vs.size() && vs[first_av]->cls != VehicleClass::Av) ++first_av;
        feature(first_av == 0 ? nullptr : vs[first_av - 1], slot);
        if (first_av == vs.size()) {
            feature(nullptr, slot + 2);
            feature(nullptr, slot + 4);
        } else {
            const Vehicle* tail = vs[first_av];
            for (std::size_t j = first_av + 1; j < vs.size() && vs[j]->cls == VehicleClass::Idm;
                 ++j)
                tail = vs[j];
            feature(vs[first_av], slot + 2);
            feature(tail, slot + 4);
        }
    }
    return obs;
}

bool brute_force_decompose_matches(const SimState& state, LaneId lane) {
    const auto dec = decompose(state, lane);
    std::vector<const Vehicle*> vs;
    for (const auto& v : state.vehicles())
        if (v.lane == lane) vs.push_back(&v);
    std::sort(vs.begin(), vs.end(),
              [](const Vehicle* a, const Vehicle* b) { return a->position > b->position; });
    std::size_t i = 0;
    for (; i < vs.size() && vs[i]->cls == VehicleClass::Idm; ++i) {
        if (i >= dec.leading_half_chain.size() || dec.leading_half_chain[i] != vs[i]->id)
            return false;
    }
    if (dec.leading_half_chain.size() != i) return false;
    std::size_t chain = 0;
    while (i < vs.size()) {
        if (chain >= dec.chains.size()) return false;
        if (dec.chains[chain].head != vs[i]->id) return false;
        std::size_t tail = i;
        for (std::size_t j = i + 1; j < vs.size() && vs[j]->cls == VehicleClass::Idm; ++j)
            tail = j;
        if (dec.chains[chain].tail != vs[tail]->id) return false;
        i = tail + 1;
        ++chain;
    }
    return chain == dec.chains.size();
}

void criterion_observation_oracle() {
    Rng rng(77);
    long states = 0, mismatches = 0;
    for (const auto topo : {Topology::TwoWay, Topology::FourWay}) {
        ScenarioConfig cfg;
        cfg.network = {topo, 2, 2};
        cfg.inflow_horizontal_vph = 900;
        cfg.inflow_vertical_vph = 800;
        cfg.penetration = 0.4;
        cfg.warmup_steps = 30;
        cfg.seed = 11 + static_cast<std::uint64_t>(topo);
        SimState state(shared_net(cfg.network), cfg);
        state.set_policy_control(true);
        for (int t = 0; t < 500; ++t) {
            std::vector<std::pair<int, int>> actions;
            for (int id : state.controllable_av_ids())
                actions.emplace_back(id, static_cast<int>(rng.next_u64() % 3));
            state.step(actions);
            ++states;
            for (int id : state.controllable_av_ids())
                if (observe(state, id) != brute_force_observe(state, id)) ++mismatches;
            for (const auto& lane : state.network().lanes())
                if (!brute_force_decompose_matches(state, lane.id)) ++mismatches;
        }
    }
    report(2, states >= 1000 && mismatches == 0,
           fmt("decompose/observe vs brute force on %ld states, %ld mismatches", states,
               mismatches));
}

// ---------------------------------------------------------------------------
// 3. conservation and bit-identical determinism
void criterion_conservation_determinism() {
    Rng rng(555);
    int bad_conservation = 0, bad_determinism = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioConfig cfg;
        cfg.network.topology = (trial % 2) ? Topology::FourWay : Topology::TwoWay;
        cfg.network.rows = 1 + static_cast<int>(rng.next_u64() % 3);
        cfg.network.cols = 1 + static_cast<int>(rng.next_u64() % 2);
        cfg.inflow_horizontal_vph = 400 + 150 * static_cast<double>(rng.next_u64() % 5);
        cfg.inflow_vertical_vph = 400 + 150 * static_cast<double>(rng.next_u64() % 5);
        cfg.penetration = 0.25 + 0.25 * static_cast<double>(rng.next_u64() % 3);
        cfg.warmup_steps = 50;
        cfg.seed = rng.next_u64();
        auto net = shared_net(cfg.network);
        SimState a(net, cfg);
        SimState b(net, cfg);
        for (int t = 0; t < 250; ++t) {
            a.step({});
            b.step({});
            if (a.entered() !=
                a.exited() + a.collision_removed() + static_cast<long>(a.vehicles().size()))
                ++bad_conservation;
            const auto& va = a.vehicles();
            const auto& vb = b.vehicles();
            if (va.size() != vb.size()) {
                ++bad_determinism;
                continue;
            }
            for (std::size_t i = 0; i < va.size(); ++i) {
                if (va[i].id != vb[i].id || va[i].position != vb[i].position ||
                    va[i].speed != vb[i].speed || va[i].lane != vb[i].lane)
                    ++bad_determinism;
            }
        }
    }
    report(3, bad_conservation == 0 && bad_determinism == 0,
           fmt("20 random (config, seed) pairs: conservation violations %d, determinism "
               "violations %d",
               bad_conservation, bad_determinism));
}

// ---------------------------------------------------------------------------
// 4. IDM safety under signal baselines, noise 0, full protocol
void criterion_idm_safety() {
    long trajectories_with_collisions = 0, runs = 0;
    const NetworkSpec nets[] = {{Topology::TwoWay, 2, 1},
                                {Topology::TwoWay, 3, 3},
                                {Topology::FourWay, 1, 1}};
    for (const auto& spec : nets) {
        for (const auto& [fh, fv] : table16_inflows()) {
            for (int baseline = 0; baseline < 2; ++baseline) {
                ScenarioConfig cfg;
                cfg.network = spec;
                cfg.inflow_horizontal_vph = fh;
                cfg.inflow_vertical_vph = fv;
                cfg.idm.noise_sigma = 0.0;
                cfg.horizon_steps = 2000;
                if (baseline == 0) {
                    cfg.control.mode = ControlMode::FixedSignal;
                    cfg.control.plan = {25.0, 25.0, 0.0};
                } else {
                    cfg.control.mode = ControlMode::MaxPressure;
                    cfg.control.tau_min_s = default_tau_min_s(spec);
                }
                const auto stats = evaluate(cfg, nullptr, 3, 17);
                for (double c : stats.collisions_per_hr)
                    if (c > 0.0) ++trajectories_with_collisions;
                runs += 3;
            }
        }
    }
    report(4, trajectories_with_collisions == 0,
           fmt("noise-free IDM, 3 networks x 16 inflows x {equal-phase, max-pressure}: %ld "
               "of %ld full 500+2000-step trajectories had collisions",
               trajectories_with_collisions, runs));
}

// ---------------------------------------------------------------------------
// 5. inflow fidelity
void criterion_inflow_fidelity() {
    bool ok = true;
    std::string detail;
    for (double f : {400.0, 700.0, 1000.0}) {
        ScenarioConfig cfg;
        cfg.network = {Topology::TwoWay, 1, 1};
        cfg.inflow_horizontal_vph = f;
        cfg.inflow_vertical_vph = 0.0;  // keep the lane uncongested
        cfg.warmup_steps = 0;
        cfg.idm.noise_sigma = 0.0;
        SimState s(shared_net(cfg.network), cfg);
        std::map<int, double> entry_times;
        const int steps = 2000;  // 1000 s
        for (int t = 0; t < steps; ++t) {
            s.step({});
            for (const auto& v : s.vehicles()) entry_times.emplace(v.id, v.entry_time_s);
        }
        const double headway = 3600.0 / f;
        double prev = -1.0;
        for (const auto& [id, ts] : entry_times) {
            if (prev >= 0.0 && std::abs(ts - prev - headway) > 1e-9) ok = false;
            prev = ts;
        }
        const double window_s = steps * cfg.delta_t_s;
        const double expect = f * window_s / 3600.0;
        const double realized = static_cast<double>(s.entered());
        if (std::abs(realized - expect) > 1.0) ok = false;
        detail += fmt("f=%g: %g vs %.1f; ", f, realized, expect);
    }
    report(5, ok, "exact scheduled headways, realized counts within 1 (" + detail + ")");
}

// ---------------------------------------------------------------------------
// 6. oracle symmetry on a symmetric scenario
void criterion_oracle_symmetry() {
    ScenarioConfig cfg;
    cfg.network = {Topology::TwoWay, 1, 1};
    cfg.inflow_horizontal_vph = 700;
    cfg.inflow_vertical_vph = 700;
    cfg.horizon_steps = 2000;  // full evaluation protocol
    const auto r = oracle_search(cfg, 48, 90, 3, 10);
    const bool symmetric = std::abs(r.plan.tau_h_s - r.plan.tau_v_s) <= 1.0;
    const bool improves = r.outflow_vph >= r.start_outflow_vph - 1e-9;
    report(6, symmetric && improves,
           fmt("oracle on symmetric (700,700): plan (%g, %g), outflow %.1f >= start %.1f",
               r.plan.tau_h_s, r.plan.tau_v_s, r.outflow_vph, r.start_outflow_vph));
}

// ---------------------------------------------------------------------------
// 7. baseline ordering at high demand
void criterion_baseline_ordering() {
    ScenarioConfig base;
    base.network = {Topology::TwoWay, 2, 1};
    base.inflow_horizontal_vph = 1000;
    base.inflow_vertical_vph = 1000;
    base.horizon_steps = 2000;

    const auto oracle = oracle_search(base, 48, 33, 3, 10);
    ScenarioConfig oc = base;
    oc.control.mode = ControlMode::FixedSignal;
    oc.control.plan = oracle.plan;
    const auto o = evaluate(oc, nullptr, 10, 33);

    ScenarioConfig mp = base;
    mp.control.mode = ControlMode::MaxPressure;
    mp.control.tau_min_s = 4.0;
    const auto m = evaluate(mp, nullptr, 10, 33);

    ScenarioConfig pr = base;
    pr.control.mode = ControlMode::Priority;
    pr.control.priority = PriorityAxis::Vertical;
    const auto p = evaluate(pr, nullptr, 10, 33);

    const double margin_mp = o.mean_outflow_vph - m.mean_outflow_vph;
    const double margin_pr = o.mean_outflow_vph - p.mean_outflow_vph;
    const bool ok_mp = margin_mp > 2.0 * std::max(o.std_outflow_vph, m.std_outflow_vph);
    const bool ok_pr = margin_pr > 2.0 * std::max(o.std_outflow_vph, p.std_outflow_vph);
    report(7, ok_mp && ok_pr,
           fmt("(1000,1000) 2x1: oracle(%g,%g) %.0f±%.0f vs max-pressure %.0f±%.0f vs "
               "priority %.0f±%.0f veh/hr",
               oracle.plan.tau_h_s, oracle.plan.tau_v_s, o.mean_outflow_vph,
               o.std_outflow_vph, m.mean_outflow_vph, m.std_outflow_vph, p.mean_outflow_vph,
               p.std_outflow_vph));
}

// ---------------------------------------------------------------------------
// 9. reward pipeline
void criterion_reward_pipeline() {
    bool ok = true;
    ok &= raw_reward({2, 0, 0, 0}) == 2.0;
    ok &= raw_reward({0, 1, 0, 0}) == -5.0;
    ok &= raw_reward({3, 1, 0, 0}) == -2.0;

    Rng rng(4242);
    RewardNormalizer n(0.99);
    std::vector<double> stream, returned;
    std::vector<int> starts;
    for (int ep = 0; ep < 6; ++ep) {
        starts.push_back(static_cast<int>(stream.size()));
        n.begin_episode();
        if (n.cumulative() != 0.0) ok = false;  // R' resets exactly
        const int len = 40 + static_cast<int>(rng.next_u64() % 80);
        for (int i = 0; i < len; ++i) {
            const double r = rng.uniform(-6.0, 3.0);
            stream.push_back(r);
            returned.push_back(n.normalize(r));
        }
    }
    double worst = 0.0;
    {
        std::vector<double> rets;
        double ret = 0.0;
        std::size_t ep = 0;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            if (ep < starts.size() && static_cast<int>(i) == starts[ep]) {
                ret = 0.0;
                ++ep;
            }
            ret = 0.99 * ret + stream[i];
            rets.push_back(ret);
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            mean += (stream[i] - mean) / static_cast<double>(i + 1);
            double rm = 0.0;
            for (std::size_t j = 0; j <= i; ++j) rm += rets[j];
            rm /= static_cast<double>(i + 1);
            double rs = 0.0;
            for (std::size_t j = 0; j <= i; ++j) rs += (rets[j] - rm) * (rets[j] - rm);
            rs = std::sqrt(rs / static_cast<double>(i + 1));
            const double expect = (stream[i] - mean) / std::max(rs, 1e-4);
            worst = std::max(worst, std::abs(expect - returned[i]));
        }
    }
    ok &= worst < 1e-10;
    report(9, ok,
           fmt("raw reward cases exact; normalizer vs offline recomputation max err %.2g "
               "(< 1e-10); R' resets at episodes",
               worst));
}

// ---------------------------------------------------------------------------
// 8 + 10. desk-scale learning, then zero-shot transfer of the same checkpoint
void criterion_learning_and_transfer() {
    ScenarioConfig cfg;
    cfg.network = {Topology::TwoWay, 2, 1};
    cfg.inflow_horizontal_vph = 700;
    cfg.inflow_vertical_vph = 700;
    cfg.penetration = 1.0 / 3.0;
    cfg.horizon_steps = 500;

    PolicyNet initial;
    Rng ir(splitmix64(1));
    initial.init(ir);
    const auto init_eval = evaluate(cfg, &initial, 10, 1000);

    TrainConfig tc;
    tc.inflows = {{700, 700}};
    tc.batch_trajectories = 32;
    tc.max_updates = 60;
    tc.seed = 1;
    const std::string out_dir =
        (std::filesystem::temp_directory_path() / "gridflow_acceptance_train").string();
    std::filesystem::remove_all(out_dir);
    const auto result = train(cfg, tc, out_dir, nullptr);
    const auto best_eval = evaluate(cfg, &result.best_net, 10, 1000);

    const auto oracle = oracle_search(cfg, 48, 1000, 3, 10);

    const bool beats_initial = best_eval.mean_outflow_vph > 1.2 * init_eval.mean_outflow_vph;
    const bool near_oracle = best_eval.mean_outflow_vph >= 0.8 * oracle.outflow_vph;
    report(8, beats_initial && near_oracle,
           fmt("trained %.0f veh/hr vs initial %.0f (x%.2f > 1.2) and oracle %.0f "
               "(%.0f%% >= 80%%), best update %d",
               best_eval.mean_outflow_vph, init_eval.mean_outflow_vph,
               best_eval.mean_outflow_vph / std::max(init_eval.mean_outflow_vph, 1.0),
               oracle.outflow_vph, 100.0 * best_eval.mean_outflow_vph / oracle.outflow_vph,
               result.checkpoints[result.best_index].update));

    // zero-shot transfer of this 2x1 checkpoint onto the 3x3 grid
    ScenarioConfig big = cfg;
    big.network = {Topology::TwoWay, 3, 3};
    bool transferred = true;
    double policy_mean = 0.0, idm_mean = 0.0;
    try {
        const PolicyNet loaded = PolicyNet::load(result.checkpoints[result.best_index].path);
        const auto zs = evaluate(big, &loaded, 10, 2000);
        const auto idm = evaluate(big, nullptr, 10, 2000);
        policy_mean = zs.mean_outflow_vph;
        idm_mean = idm.mean_outflow_vph;
    } catch (const std::exception&) {
        transferred = false;
    }
    report(10, transferred && policy_mean > idm_mean,
           fmt("zero-shot 2x1 -> 3x3 at (700,700): policy %.0f veh/hr vs all-IDM %.0f",
               policy_mean, idm_mean));
}

}  // namespace

int main() {
    std::printf("== acceptance suite (kernels: %s) ==\n",
                kernels::backend_name(kernels::active_backend()).c_str());
    criterion_gradient();
    criterion_observation_oracle();
    criterion_conservation_determinism();
    criterion_idm_safety();
    criterion_inflow_fidelity();
    criterion_oracle_symmetry();
    criterion_baseline_ordering();
    criterion_reward_pipeline();
    criterion_learning_and_transfer();
    std::printf("== %d criterion(s) failed ==\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
