#include "gridflow/config.hpp"

#include <fstream>
#include <set>

namespace gridflow {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
    throw ConfigError("config: key '" + path + "' " + why);
}

void require_known_keys(const json& j, const std::string& path,
                        const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key))
            bad_key(path.empty() ? key : path + "." + key, "is not a recognized key");
    }
}

template <typename T>
T read(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_key(path.empty() ? key : path + "." + key, "has the wrong type");
    }
}


}  // namespace

ExperimentConfig experiment_from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
    require_known_keys(root, "",
                       {"profile", "network", "inflow", "inflows", "penetration", "delta_t_s",
                        "warmup_steps", "horizon_steps", "seed", "idm", "av_limits",
                        "vehicle_length_m", "t_gap_s", "control", "train"});

    ExperimentConfig cfg;
    cfg.profile = read<std::string>(root, "", "profile", "desk");
    if (cfg.profile != "desk" && cfg.profile != "paper")
        bad_key("profile", "must be \"desk\" or \"paper\"");
    const bool paper = cfg.profile == "paper";

    ScenarioConfig& sc = cfg.scenario;
    sc.horizon_steps = paper ? 2000 : 500;

    if (root.contains("network")) {
        const json& n = root.at("network");
        const std::string p = "network";
        require_known_keys(n, p, {"topology", "rows", "cols", "lane_length_m", "speed_limit_mps"});
        const auto topo = read<std::string>(n, p, "topology", "two_way");
        if (topo == "two_way") sc.network.topology = Topology::TwoWay;
        else if (topo == "four_way") sc.network.topology = Topology::FourWay;
        else bad_key("network.topology", "must be \"two_way\" or \"four_way\"");
        sc.network.rows = read<int>(n, p, "rows", 1);
        sc.network.cols = read<int>(n, p, "cols", 1);
        sc.network.lane_length_m = read<double>(n, p, "lane_length_m", 100.0);
        sc.network.speed_limit_mps = read<double>(n, p, "speed_limit_mps", 13.0);
    }
    if (root.contains("inflow")) {
        const json& f = root.at("inflow");
        require_known_keys(f, "inflow", {"horizontal_vph", "vertical_vph"});
        sc.inflow_horizontal_vph = read<double>(f, "inflow", "horizontal_vph", 700.0);
        sc.inflow_vertical_vph = read<double>(f, "inflow", "vertical_vph", 700.0);
    }
    sc.penetration = read<double>(root, "", "penetration", 1.0 / 3.0);
    sc.delta_t_s = read<double>(root, "", "delta_t_s", 0.5);
    sc.warmup_steps = read<int>(root, "", "warmup_steps", 100);
    sc.horizon_steps = read<int>(root, "", "horizon_steps", sc.horizon_steps);
    sc.seed = read<std::uint64_t>(root, "", "seed", 1);
    sc.vehicle_length_m = read<double>(root, "", "vehicle_length_m", 5.0);
    sc.t_gap_s = read<double>(root, "", "t_gap_s", 3.0);

    if (root.contains("idm")) {
        const json& i = root.at("idm");
        const std::string p = "idm";
        require_known_keys(i, p, {"v0", "headway_s", "min_gap_m", "a_max", "b_comf",
                                  "delta_exp", "noise_sigma"});
        sc.idm.v0 = read<double>(i, p, "v0", sc.idm.v0);
        sc.idm.headway_s = read<double>(i, p, "headway_s", sc.idm.headway_s);
        sc.idm.min_gap_m = read<double>(i, p, "min_gap_m", sc.idm.min_gap_m);
        sc.idm.a_max = read<double>(i, p, "a_max", sc.idm.a_max);
        sc.idm.b_comf = read<double>(i, p, "b_comf", sc.idm.b_comf);
        sc.idm.delta_exp = read<double>(i, p, "delta_exp", sc.idm.delta_exp);
        sc.idm.noise_sigma = read<double>(i, p, "noise_sigma", sc.idm.noise_sigma);
    }
    if (root.contains("av_limits")) {
        const json& a = root.at("av_limits");
        require_known_keys(a, "av_limits", {"accel", "decel"});
        sc.av_limits.accel = read<double>(a, "av_limits", "accel", sc.av_limits.accel);
        sc.av_limits.decel = read<double>(a, "av_limits", "decel", sc.av_limits.decel);
    }
    if (root.contains("control")) {
        const json& c = root.at("control");
        const std::string p = "control";
        require_known_keys(c, p, {"mode", "tau_h_s", "tau_v_s", "offset_s", "tau_min_s",
                                  "priority"});
        const auto mode = read<std::string>(c, p, "mode", "none");
        if (mode == "none") sc.control.mode = ControlMode::None;
        else if (mode == "fixed_signal") sc.control.mode = ControlMode::FixedSignal;
        else if (mode == "max_pressure") sc.control.mode = ControlMode::MaxPressure;
        else if (mode == "priority") sc.control.mode = ControlMode::Priority;
        else bad_key("control.mode", "must be none|fixed_signal|max_pressure|priority");
        sc.control.plan.tau_h_s = read<double>(c, p, "tau_h_s", 25.0);
        sc.control.plan.tau_v_s = read<double>(c, p, "tau_v_s", 25.0);
        sc.control.plan.offset_s = read<double>(c, p, "offset_s", 0.0);
        sc.control.tau_min_s = read<double>(c, p, "tau_min_s", 4.0);
        const auto prio = read<std::string>(c, p, "priority", "vertical");
        if (prio == "vertical") sc.control.priority = PriorityAxis::Vertical;
        else if (prio == "horizontal") sc.control.priority = PriorityAxis::Horizontal;
        else bad_key("control.priority", "must be \"vertical\" or \"horizontal\"");
    }

    TrainConfig& tr = cfg.train;
    tr.batch_trajectories = paper ? 640 : 32;
    tr.max_updates = paper ? 200 : 60;
    if (root.contains("train")) {
        const json& t = root.at("train");
        const std::string p = "train";
        require_known_keys(t, p, {"gamma", "alpha", "lambda_outflow", "lambda_collision",
                                  "batch_trajectories", "max_updates", "checkpoint_interval",
                                  "threads"});
        tr.gamma = read<double>(t, p, "gamma", tr.gamma);
        tr.alpha = read<double>(t, p, "alpha", tr.alpha);
        tr.lambda_outflow = read<double>(t, p, "lambda_outflow", tr.lambda_outflow);
        tr.lambda_collision = read<double>(t, p, "lambda_collision", tr.lambda_collision);
        tr.batch_trajectories = read<int>(t, p, "batch_trajectories", tr.batch_trajectories);
        tr.max_updates = read<int>(t, p, "max_updates", tr.max_updates);
        tr.checkpoint_interval = read<int>(t, p, "checkpoint_interval", tr.checkpoint_interval);
        tr.threads = read<int>(t, p, "threads", tr.threads);
    }
    tr.seed = sc.seed;

    if (root.contains("inflows")) {
        const json& f = root.at("inflows");
        if (f.is_string()) {
            if (f.get<std::string>() != "table16")
                bad_key("inflows", "string form must be \"table16\"");
            tr.inflows = table16_inflows();
        } else if (f.is_array()) {
            for (const auto& pair : f) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                    !pair[1].is_number())
                    bad_key("inflows", "entries must be [horizontal_vph, vertical_vph] pairs");
                tr.inflows.emplace_back(pair[0].get<double>(), pair[1].get<double>());
            }
            if (tr.inflows.empty()) bad_key("inflows", "must not be empty");
        } else {
            bad_key("inflows", "must be an array of pairs or \"table16\"");
        }
    } else {
        tr.inflows = {{sc.inflow_horizontal_vph, sc.inflow_vertical_vph}};
    }

    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

json experiment_to_json(const ExperimentConfig& cfg) {
    const ScenarioConfig& sc = cfg.scenario;
    json j;
    j["profile"] = cfg.profile;
    j["network"] = {
        {"topology", sc.network.topology == Topology::TwoWay ? "two_way" : "four_way"},
        {"rows", sc.network.rows},
        {"cols", sc.network.cols},
        {"lane_length_m", sc.network.lane_length_m},
        {"speed_limit_mps", sc.network.speed_limit_mps},
    };
    j["inflow"] = {{"horizontal_vph", sc.inflow_horizontal_vph},
                   {"vertical_vph", sc.inflow_vertical_vph}};
    j["penetration"] = sc.penetration;
    j["delta_t_s"] = sc.delta_t_s;
    j["warmup_steps"] = sc.warmup_steps;
    j["horizon_steps"] = sc.horizon_steps;
    j["seed"] = sc.seed;
    j["vehicle_length_m"] = sc.vehicle_length_m;
    j["t_gap_s"] = sc.t_gap_s;
    j["idm"] = {{"v0", sc.idm.v0},
                {"headway_s", sc.idm.headway_s},
                {"min_gap_m", sc.idm.min_gap_m},
                {"a_max", sc.idm.a_max},
                {"b_comf", sc.idm.b_comf},
                {"delta_exp", sc.idm.delta_exp},
                {"noise_sigma", sc.idm.noise_sigma}};
    j["av_limits"] = {{"accel", sc.av_limits.accel}, {"decel", sc.av_limits.decel}};
    const char* mode = "none";
    switch (sc.control.mode) {
        case ControlMode::None: mode = "none"; break;
        case ControlMode::FixedSignal: mode = "fixed_signal"; break;
        case ControlMode::MaxPressure: mode = "max_pressure"; break;
        case ControlMode::Priority: mode = "priority"; break;
    }
    j["control"] = {
        {"mode", mode},
        {"tau_h_s", sc.control.plan.tau_h_s},
        {"tau_v_s", sc.control.plan.tau_v_s},
        {"offset_s", sc.control.plan.offset_s},
        {"tau_min_s", sc.control.tau_min_s},
        {"priority", sc.control.priority == PriorityAxis::Vertical ? "vertical" : "horizontal"},
    };
    const TrainConfig& tr = cfg.train;
    j["train"] = {{"gamma", tr.gamma},
                  {"alpha", tr.alpha},
                  {"lambda_outflow", tr.lambda_outflow},
                  {"lambda_collision", tr.lambda_collision},
                  {"batch_trajectories", tr.batch_trajectories},
                  {"max_updates", tr.max_updates},
                  {"checkpoint_interval", tr.checkpoint_interval},
                  {"threads", tr.threads}};
    json inflows = json::array();
    for (const auto& [h, v] : tr.inflows) inflows.push_back(json::array({h, v}));
    j["inflows"] = inflows;
    return j;
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return experiment_from_json(j);
}

void save_experiment(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write file: " + path);
    out << experiment_to_json(cfg).dump(2) << "\n";
}

}  // namespace gridflow
