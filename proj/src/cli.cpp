#include "gridflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "gridflow/csv.hpp"
#include "gridflow/runner.hpp"

namespace gridflow::cli {

namespace {

namespace fs = std::filesystem;

std::string class_name(VehicleClass c) { return c == VehicleClass::Av ? "av" : "idm"; }

std::string sanitize(const std::string& name) {
    std::string s = name;
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return s;
}

// Column names for the 22 observation entries: ego chain head/tail, then the
// three clockwise lanes' half-chain tail and next chain head/tail.
std::string fmt_obs_col(int i) {
    static const char* slots[] = {"ego_head", "ego_tail",
                                  "cw1_half_tail", "cw1_head", "cw1_tail",
                                  "cw2_half_tail", "cw2_head", "cw2_tail",
                                  "cw3_half_tail", "cw3_head", "cw3_tail"};
    return std::string(slots[i / 2]) + (i % 2 == 0 ? "_speed" : "_dist");
}

}  // namespace

ControllerSpec parse_controller(const std::string& text, const std::string& checkpoint_flag) {
    ControllerSpec spec;
    std::string head = text, arg;
    if (const auto pos = text.find(':'); pos != std::string::npos) {
        head = text.substr(0, pos);
        arg = text.substr(pos + 1);
    }
    // output files are named after the controller; keep paths out of that
    spec.name = (arg.empty() || arg.find('/') != std::string::npos) ? head : text;
    if (head == "all_idm") {
        spec.kind = ControllerSpec::Kind::AllIdm;
    } else if (head == "learned") {
        spec.kind = ControllerSpec::Kind::Learned;
        spec.checkpoint = arg.empty() ? checkpoint_flag : arg;
        if (spec.checkpoint.empty())
            throw ConfigError("controller 'learned' requires a checkpoint (--checkpoint)");
    } else if (head == "oracle") {
        spec.kind = ControllerSpec::Kind::Oracle;
        spec.plan_file = arg;
    } else if (head == "equal_phase") {
        spec.kind = ControllerSpec::Kind::EqualPhase;
        if (!arg.empty()) spec.tau_equal_s = std::stod(arg);
    } else if (head == "max_pressure") {
        spec.kind = ControllerSpec::Kind::MaxPressure;
        if (!arg.empty()) spec.tau_min_s = std::stod(arg);
    } else if (head == "priority") {
        spec.kind = ControllerSpec::Kind::Priority;
        if (arg == "horizontal") spec.axis = PriorityAxis::Horizontal;
        else if (arg == "vertical" || arg.empty()) spec.axis = PriorityAxis::Vertical;
        else throw ConfigError("controller 'priority' takes vertical|horizontal");
    } else {
        throw ConfigError("unknown controller: " + text);
    }
    return spec;
}

SignalPlan load_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open plan file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid plan file: ") + e.what());
    }
    const nlohmann::json& c = j.contains("control") ? j.at("control") : j;
    SignalPlan plan;
    if (!c.contains("tau_h_s") || !c.contains("tau_v_s"))
        throw ConfigError("plan file needs tau_h_s and tau_v_s");
    plan.tau_h_s = c.at("tau_h_s").get<double>();
    plan.tau_v_s = c.at("tau_v_s").get<double>();
    plan.offset_s = c.value("offset_s", 0.0);
    return plan;
}

ResolvedController resolve_controller(const ScenarioConfig& base, const ControllerSpec& spec,
                                      int oracle_budget, int threads) {
    ResolvedController r;
    r.scenario = base;
    switch (spec.kind) {
        case ControllerSpec::Kind::AllIdm:
            r.scenario.control.mode = ControlMode::None;
            break;
        case ControllerSpec::Kind::Learned:
            r.scenario.control.mode = ControlMode::None;
            r.net = PolicyNet::load(spec.checkpoint);
            break;
        case ControllerSpec::Kind::Oracle:
            r.scenario.control.mode = ControlMode::FixedSignal;
            if (!spec.plan_file.empty()) {
                r.scenario.control.plan = load_plan_file(spec.plan_file);
            } else {
                const auto search =
                    oracle_search(r.scenario, oracle_budget, base.seed, 3, 10, threads);
                r.scenario.control.plan = search.plan;
            }
            break;
        case ControllerSpec::Kind::EqualPhase:
            r.scenario.control.mode = ControlMode::FixedSignal;
            r.scenario.control.plan = {spec.tau_equal_s, spec.tau_equal_s, 0.0};
            break;
        case ControllerSpec::Kind::MaxPressure:
            r.scenario.control.mode = ControlMode::MaxPressure;
            r.scenario.control.tau_min_s =
                spec.tau_min_s > 0 ? spec.tau_min_s : default_tau_min_s(base.network);
            break;
        case ControllerSpec::Kind::Priority:
            r.scenario.control.mode = ControlMode::Priority;
            r.scenario.control.priority = spec.axis;
            break;
    }
    return r;
}

ExperimentConfig load_with_profile(const CommonOptions& opt) {
    if (opt.config_path.empty()) throw ConfigError("a --config file is required");
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("config: cannot open file: " + opt.config_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!opt.profile.empty()) j["profile"] = opt.profile;
    return experiment_from_json(j);
}

int cmd_train(const CommonOptions& opt, const std::string& init_checkpoint) {
    ExperimentConfig cfg = load_with_profile(opt);
    if (cfg.scenario.control.mode != ControlMode::None)
        throw ConfigError("training requires control.mode = none");
    cfg.train.threads = opt.threads > 0 ? opt.threads : cfg.train.threads;
    fs::create_directories(opt.out_dir);

    std::optional<PolicyNet> init;
    if (!init_checkpoint.empty()) init = PolicyNet::load(init_checkpoint);

    std::cerr << "training: " << cfg.train.inflows.size() << " environment(s), batch "
              << cfg.train.batch_trajectories << ", " << cfg.train.max_updates
              << " updates\n";
    const auto result = train(cfg.scenario, cfg.train, opt.out_dir,
                              init ? &*init : nullptr, [](int u, double outflow) {
                                  std::cerr << "update " << u << ": batch outflow "
                                            << outflow << " veh/hr\n";
                              });
    std::cerr << "best checkpoint: " << result.checkpoints[result.best_index].path
              << " (batch outflow "
              << result.checkpoints[result.best_index].batch_outflow_vph << " veh/hr)\n";
    return 0;
}

namespace {

std::map<std::pair<double, double>, double> load_oracle_table(const std::string& path) {
    // Expects a metrics CSV produced by cmd_eval for an oracle run; keeps the
    // per-configuration mean rows.
    std::map<std::pair<double, double>, double> table;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle table: " + path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() >= 4 && f[2] == "mean")
            table[{std::stod(f[0]), std::stod(f[1])}] = std::stod(f[3]);
    }
    return table;
}

}  // namespace

int cmd_eval(const CommonOptions& opt, const ControllerSpec& controller,
             const std::string& oracle_table_path) {
    const ExperimentConfig cfg = load_with_profile(opt);
    fs::create_directories(opt.out_dir);

    std::map<std::pair<double, double>, double> oracle_table;
    const bool normalized = !oracle_table_path.empty();
    if (normalized) oracle_table = load_oracle_table(oracle_table_path);

    std::vector<std::string> header = {"inflow_h_vph", "inflow_v_vph", "seed",
                                       "outflow_vph", "collisions_per_hr"};
    if (normalized) header.push_back("pct_of_oracle");
    const std::string out_path =
        opt.out_dir + "/eval_" + sanitize(controller.name) + ".csv";
    CsvWriter csv(out_path, header);

    for (const auto& [fh, fv] : cfg.train.inflows) {
        ScenarioConfig sc = cfg.scenario;
        sc.inflow_horizontal_vph = fh;
        sc.inflow_vertical_vph = fv;
        const auto resolved = resolve_controller(sc, controller, opt.oracle_budget, opt.threads);
        const auto stats = evaluate(resolved.scenario, resolved.net ? &*resolved.net : nullptr,
                                    opt.seeds, sc.seed, opt.threads);
        const double oracle =
            normalized && oracle_table.count({fh, fv}) ? oracle_table.at({fh, fv}) : 0.0;
        auto pct = [&](double v) {
            return oracle > 0.0 ? csv_num(100.0 * v / oracle) : std::string();
        };
        for (int i = 0; i < opt.seeds; ++i) {
            std::vector<std::string> row = {csv_num(fh), csv_num(fv), std::to_string(i),
                                            csv_num(stats.outflows_vph[i]),
                                            csv_num(stats.collisions_per_hr[i])};
            if (normalized) row.push_back(pct(stats.outflows_vph[i]));
            csv.row(row);
        }
        std::vector<std::string> mean_row = {csv_num(fh), csv_num(fv), "mean",
                                             csv_num(stats.mean_outflow_vph),
                                             csv_num(stats.mean_collisions_per_hr)};
        std::vector<std::string> std_row = {csv_num(fh), csv_num(fv), "std",
                                            csv_num(stats.std_outflow_vph),
                                            csv_num(stats.std_collisions_per_hr)};
        if (normalized) {
            mean_row.push_back(pct(stats.mean_outflow_vph));
            std_row.push_back("");
        }
        csv.row(mean_row);
        csv.row(std_row);
        std::cerr << "eval " << controller.name << " (" << fh << ", " << fv
                  << "): " << stats.mean_outflow_vph << " veh/hr\n";
    }
    std::cerr << "wrote " << out_path << "\n";
    return 0;
}

int cmd_oracle_search(const CommonOptions& opt) {
    const ExperimentConfig cfg = load_with_profile(opt);
    fs::create_directories(opt.out_dir);
    const auto result = oracle_search(cfg.scenario, opt.oracle_budget, cfg.scenario.seed,
                                      3, opt.seeds, opt.threads);
    CsvWriter csv(opt.out_dir + "/oracle_search.csv",
                  {"tau_h_s", "tau_v_s", "mean_outflow_vph"});
    for (const auto& v : result.visited)
        csv.row({csv_num(v.tau_h_s), csv_num(v.tau_v_s), csv_num(v.mean_outflow_vph)});

    nlohmann::json plan = {{"control",
                            {{"mode", "fixed_signal"},
                             {"tau_h_s", result.plan.tau_h_s},
                             {"tau_v_s", result.plan.tau_v_s},
                             {"offset_s", result.plan.offset_s}}}};
    std::ofstream out(opt.out_dir + "/oracle_plan.json");
    out << plan.dump(2) << "\n";
    std::cerr << "oracle plan: tau_h=" << result.plan.tau_h_s
              << "s tau_v=" << result.plan.tau_v_s << "s, outflow " << result.outflow_vph
              << " veh/hr (" << result.evaluations << " evaluations)\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opt, const std::vector<ControllerSpec>& controllers) {
    const ExperimentConfig cfg = load_with_profile(opt);
    fs::create_directories(opt.out_dir);
    static const std::vector<double> kRowsFh = {1000, 850, 700, 550, 400};
    static const std::vector<double> kColsFv = {400, 550, 700, 850, 1000};
    const auto& marked = table16_inflows();
    auto is_marked = [&marked](double fh, double fv) {
        return std::find(marked.begin(), marked.end(), std::make_pair(fh, fv)) != marked.end();
    };

    for (const auto& controller : controllers) {
        std::vector<std::string> header = {"f_h\\f_v"};
        for (double fv : kColsFv) header.push_back(csv_num(fv));
        const std::string path = opt.out_dir + "/sweep_" + sanitize(controller.name) + ".csv";
        CsvWriter csv(path, header);
        for (double fh : kRowsFh) {
            std::vector<std::string> row = {csv_num(fh)};
            for (double fv : kColsFv) {
                if (!is_marked(fh, fv)) {
                    row.push_back("");
                    continue;
                }
                ScenarioConfig sc = cfg.scenario;
                sc.inflow_horizontal_vph = fh;
                sc.inflow_vertical_vph = fv;
                const auto resolved =
                    resolve_controller(sc, controller, opt.oracle_budget, opt.threads);
                const auto stats =
                    evaluate(resolved.scenario, resolved.net ? &*resolved.net : nullptr,
                             opt.seeds, sc.seed, opt.threads);
                row.push_back(csv_num(stats.mean_outflow_vph));
                std::cerr << "sweep " << controller.name << " (" << fh << ", " << fv
                          << "): " << stats.mean_outflow_vph << " veh/hr\n";
            }
            csv.row(row);
        }
        std::cerr << "wrote " << path << "\n";
    }
    return 0;
}

int cmd_timespace(const CommonOptions& opt, const ControllerSpec& controller,
                  int entry_lane, int steps, bool raw_dump, bool obs_dump) {
    const ExperimentConfig cfg = load_with_profile(opt);
    fs::create_directories(opt.out_dir);
    const auto resolved =
        resolve_controller(cfg.scenario, controller, opt.oracle_budget, opt.threads);
    auto network =
        std::make_shared<const Network>(Network::build_grid(resolved.scenario.network));

    int route_filter = -1;
    if (entry_lane >= 0) {
        if (entry_lane >= static_cast<int>(network->lanes().size()) ||
            !network->is_entry(entry_lane))
            throw ConfigError("--entry must name an entry lane id");
        route_filter = network->lane(entry_lane).route_id;
    }
    if (steps <= 0) steps = resolved.scenario.horizon_steps;

    SimState env(network, resolved.scenario);
    if (resolved.net) env.set_policy_control(true);

    CsvWriter csv(opt.out_dir + "/timespace.csv",
                  {"time_s", "vehicle_id", "class", "route_id", "route_pos_m"});
    std::optional<CsvWriter> raw;
    if (raw_dump)
        raw.emplace(opt.out_dir + "/trajectory_raw.csv",
                    std::vector<std::string>{"step", "vehicle_id", "class", "lane_id",
                                             "position_m", "speed_m_s"});
    std::optional<CsvWriter> obs_csv;
    if (obs_dump) {
        std::vector<std::string> header = {"step", "av_id"};
        for (int i = 0; i < kObsDim; ++i) header.push_back(fmt_obs_col(i));
        obs_csv.emplace(opt.out_dir + "/observations.csv", header);
    }

    const int total = kEvalBurnInSteps + steps;
    for (int t = 0; t < total; ++t) {
        if (obs_csv && t >= kEvalBurnInSteps) {
            for (int id : env.controllable_av_ids()) {
                const auto o = observe(env, id);
                std::vector<std::string> row = {std::to_string(t - kEvalBurnInSteps),
                                                std::to_string(id)};
                for (double x : o) row.push_back(csv_num(x));
                obs_csv->row(row);
            }
        }
        const auto actions = resolved.net
                                 ? policy_actions(env, *resolved.net)
                                 : std::vector<std::pair<int, int>>{};
        env.step(actions);
        if (t < kEvalBurnInSteps) continue;
        const double rec_time = static_cast<double>(t - kEvalBurnInSteps) *
                                resolved.scenario.delta_t_s;
        for (const auto& v : env.vehicles()) {
            if (route_filter >= 0 && v.route_id != route_filter) continue;
            csv.row({csv_num(rec_time), std::to_string(v.id), class_name(v.cls),
                     std::to_string(v.route_id),
                     csv_num(network->route_offset(v.lane) + v.position)});
            if (raw)
                raw->row({std::to_string(t - kEvalBurnInSteps), std::to_string(v.id),
                          class_name(v.cls), std::to_string(v.lane), csv_num(v.position),
                          csv_num(v.speed)});
        }
    }
    std::cerr << "wrote " << opt.out_dir << "/timespace.csv\n";
    return 0;
}

}  // namespace gridflow::cli
