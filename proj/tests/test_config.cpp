#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "gridflow/cli.hpp"
#include "gridflow/config.hpp"

using namespace gridflow;

namespace {

nlohmann::json minimal() {
    return nlohmann::json{
        {"network", {{"topology", "two_way"}, {"rows", 2}, {"cols", 1}}},
        {"inflow", {{"horizontal_vph", 700}, {"vertical_vph", 700}}},
    };
}

}  // namespace

TEST_CASE("desk profile defaults") {
    const auto cfg = experiment_from_json(minimal());
    CHECK(cfg.profile == "desk");
    CHECK(cfg.scenario.horizon_steps == 500);
    CHECK(cfg.train.batch_trajectories == 32);
    CHECK(cfg.train.max_updates == 60);
    CHECK(cfg.scenario.delta_t_s == 0.5);
    CHECK(cfg.scenario.warmup_steps == 100);
    CHECK(cfg.scenario.idm.a_max == 2.6);
    CHECK(cfg.scenario.av_limits.accel == 1.5);
    CHECK(cfg.scenario.av_limits.decel == 3.5);
    REQUIRE(cfg.train.inflows.size() == 1);
    CHECK(cfg.train.inflows[0].first == 700);
}

TEST_CASE("paper profile defaults") {
    auto j = minimal();
    j["profile"] = "paper";
    const auto cfg = experiment_from_json(j);
    CHECK(cfg.scenario.horizon_steps == 2000);
    CHECK(cfg.train.batch_trajectories == 640);
    CHECK(cfg.train.max_updates == 200);
}

TEST_CASE("explicit keys beat profile defaults") {
    auto j = minimal();
    j["profile"] = "paper";
    j["horizon_steps"] = 123;
    j["train"] = {{"batch_trajectories", 8}};
    const auto cfg = experiment_from_json(j);
    CHECK(cfg.scenario.horizon_steps == 123);
    CHECK(cfg.train.batch_trajectories == 8);
    CHECK(cfg.train.max_updates == 200);
}

TEST_CASE("inflows table16 shorthand expands to the sixteen pairs") {
    auto j = minimal();
    j["inflows"] = "table16";
    const auto cfg = experiment_from_json(j);
    CHECK(cfg.train.inflows.size() == 16);
}

TEST_CASE("unknown keys are named in the diagnostic") {
    auto j = minimal();
    j["network"]["rowz"] = 3;
    try {
        (void)experiment_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("network.rowz") != std::string::npos);
    }
}

TEST_CASE("type errors are named in the diagnostic") {
    auto j = minimal();
    j["penetration"] = "half";
    try {
        (void)experiment_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("penetration") != std::string::npos);
    }
}

TEST_CASE("semantic violations are rejected") {
    auto j = minimal();
    j["penetration"] = 1.5;
    CHECK_THROWS_AS((void)experiment_from_json(j), ConfigError);
    j = minimal();
    j["inflows"] = nlohmann::json::array();
    CHECK_THROWS_AS((void)experiment_from_json(j), ConfigError);
    j = minimal();
    j["network"]["rows"] = 0;  // caught by scenario validation at first use
    auto cfg = experiment_from_json(j);
    CHECK_THROWS(Network::build_grid(cfg.scenario.network));
}

TEST_CASE("round trip: parse(serialize(cfg)) == cfg") {
    auto j = minimal();
    j["profile"] = "paper";
    j["penetration"] = 0.5;
    j["control"] = {{"mode", "max_pressure"}, {"tau_min_s", 6.0}};
    j["inflows"] = "table16";
    const auto cfg = experiment_from_json(j);
    const auto serialized = experiment_to_json(cfg);
    const auto cfg2 = experiment_from_json(serialized);
    CHECK(experiment_to_json(cfg2) == serialized);
    CHECK(cfg2.scenario.control.mode == ControlMode::MaxPressure);
    CHECK(cfg2.scenario.control.tau_min_s == 6.0);
    CHECK(cfg2.train.inflows == cfg.train.inflows);
    CHECK(cfg2.scenario.penetration == cfg.scenario.penetration);
}

TEST_CASE("controller specs parse") {
    using cli::parse_controller;
    CHECK(parse_controller("all_idm", "").kind == cli::ControllerSpec::Kind::AllIdm);
    CHECK(parse_controller("equal_phase:30", "").tau_equal_s == 30.0);
    CHECK(parse_controller("max_pressure:6", "").tau_min_s == 6.0);
    CHECK(parse_controller("priority:horizontal", "").axis == PriorityAxis::Horizontal);
    CHECK(parse_controller("oracle:plan.json", "").plan_file == "plan.json");
    CHECK(parse_controller("learned", "x.bin").checkpoint == "x.bin");
    CHECK_THROWS_AS(parse_controller("learned", ""), ConfigError);
    CHECK_THROWS_AS(parse_controller("bogus", ""), ConfigError);
}
