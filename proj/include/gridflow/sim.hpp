#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "gridflow/idm.hpp"
#include "gridflow/network.hpp"
#include "gridflow/rng.hpp"
#include "gridflow/signals.hpp"

namespace gridflow {

enum class VehicleClass { Idm, Av };

enum class ControlMode { None, FixedSignal, MaxPressure, Priority };
enum class PriorityAxis { Vertical, Horizontal };

struct ControlConfig {
    ControlMode mode = ControlMode::None;
    SignalPlan plan;            // FixedSignal
    double tau_min_s = 4.0;     // MaxPressure
    PriorityAxis priority = PriorityAxis::Vertical;
};

struct ScenarioConfig {
    NetworkSpec network;
    double inflow_horizontal_vph = 700.0;  // per horizontal lane
    double inflow_vertical_vph = 700.0;    // per vertical lane
    double penetration = 1.0 / 3.0;        // AV fraction, (0, 1]
    double delta_t_s = 0.5;
    int warmup_steps = 100;
    int horizon_steps = 500;
    std::uint64_t seed = 1;
    IdmParams idm;
    AvLimits av_limits;
    double vehicle_length_m = 5.0;
    double t_gap_s = 3.0;  // junction gap acceptance
    ControlConfig control;

    void validate() const;  // throws std::invalid_argument
};

struct StepMetrics {
    int outflow = 0;
    int collisions = 0;
    int dropped_inflows = 0;
    int vehicle_count = 0;
};

struct Vehicle {
    int id = -1;
    VehicleClass cls = VehicleClass::Idm;
    LaneId lane = kNoLane;
    double position = 0.0;  // front bumper, m from lane start; in [0, length)
    double speed = 0.0;
    double length = 5.0;
    int route_id = -1;
    int route_pos = 0;
    long entry_step = 0;        // absolute step index at insertion
    double entry_time_s = 0.0;  // scheduled entry instant (exact, absolute)
};

// One simulated world. Construction leaves the network empty; reset() seeds
// the inflow schedules and runs the warmup (everyone car-following). The RNG
// stream is seeded once at construction and persists across resets, so one
// SimState used as a training environment produces distinct episodes.
class SimState {
public:
    SimState(std::shared_ptr<const Network> net, const ScenarioConfig& cfg);

    void reset();

    // Only meaningful with ControlMode::None; when false (default for
    // baselines and the all-IDM reference), AV-tagged vehicles stay on IDM.
    void set_policy_control(bool active);
    bool policy_control() const { return policy_active_; }

    // AVs that currently require an action: AV class, policy control active,
    // and an intersection downstream of their lane. Sorted by id.
    std::vector<int> controllable_av_ids() const;

    // Advance one step. av_actions must list exactly the controllable AVs in
    // ascending id order with action indices in {0, 1, 2} mapping to desired
    // accelerations {+c_accel, 0, -c_decel}. As with externally commanded
    // speeds in the usual microsimulators, the commanded acceleration is
    // clipped by the car-following safety response toward the in-lane leader;
    // junction entry is not protected at all.
    StepMetrics step(const std::vector<std::pair<int, int>>& av_actions);

    // Place a vehicle at an exact position (scenario construction and tests).
    // Returns the vehicle id.
    int insert_vehicle(VehicleClass cls, LaneId lane, double position, double speed);

    const Network& network() const { return *net_; }
    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<Vehicle>& vehicles() const { return vehicles_; }  // id order
    const Vehicle* find_vehicle(int id) const;
    // Vehicle ids on a lane, front (largest position) first.
    const std::vector<int>& lane_vehicles(LaneId lane) const { return lane_order_[lane]; }

    double time_s() const { return time_s_; }          // absolute, warmup included
    long step_index() const { return step_index_; }    // post-warmup steps
    std::optional<Phase> signal_phase(NodeId node) const;

    // Absolute counters since construction/reset (warmup included); at all
    // times entered == exited + collision_removed + vehicles().size().
    long entered() const { return entered_; }
    long exited() const { return exited_; }
    long collision_removed() const { return collision_removed_; }
    long dropped() const { return dropped_; }

    Rng& rng() { return rng_; }

private:
    struct InflowLane {
        LaneId lane;
        double headway_s;
        double next_due_s = 0.0;
        long long arrivals = 0;  // inserted vehicles; drives the AV pattern
    };
    struct Crossing {
        int veh_id;
        Heading heading;
        double t_in, t_out;  // occupancy of the conflict point within the step
    };

    StepMetrics do_step(const std::vector<std::pair<int, int>>& av_actions);
    Vehicle* find_vehicle_mut(int id);
    bool is_policy_controlled(const Vehicle& v) const;
    void update_signal_escapees();
    // (leader speed, gap); gap is +infinity when the route ahead is clear.
    std::pair<double, double> leader_of(const Vehicle& v) const;
    // Distance to the stop line if the vehicle must brake for it.
    std::optional<double> gate_constraint(const Vehicle& v) const;
    bool conflict_zone_blocked(const Intersection& node, Heading ego) const;
    bool conflicting_red_runner(const Intersection& node, Heading ego) const;
    bool conflicting_arrival_within_gap(const Intersection& node, Heading ego,
                                        bool respect_deferral) const;
    Phase node_phase(NodeId node) const;
    void compute_pressures(std::vector<double>& ph, std::vector<double>& pv) const;
    void remove_vehicles(const std::vector<int>& ids);
    int lane_index_of(const Vehicle& v) const;

    double stop_line(const Lane& l) const { return l.length_m - 1.0; }

    std::shared_ptr<const Network> net_;
    ScenarioConfig cfg_;
    Rng rng_;

    std::vector<Vehicle> vehicles_;              // ascending id
    std::vector<std::vector<int>> lane_order_;   // per lane, front first
    std::vector<InflowLane> inflows_;
    std::optional<MaxPressureController> max_pressure_;
    // Vehicles caught too close to stop comfortably when their phase turned
    // red (zero-yellow switching); they are let through once.
    std::set<int> red_escapees_;
    std::vector<Phase> prev_phase_;

    double time_s_ = 0.0;
    long step_index_ = 0;
    long absolute_step_ = 0;
    int next_vehicle_id_ = 0;
    bool policy_active_ = false;

    long entered_ = 0, exited_ = 0, collision_removed_ = 0, dropped_ = 0;

    // scratch, reused across steps
    std::vector<std::vector<Crossing>> crossings_;
};

}  // namespace gridflow
