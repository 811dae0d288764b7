#include "gridflow/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace gridflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ScenarioConfig::validate() const {
    if (inflow_horizontal_vph < 0.0 || inflow_vertical_vph < 0.0)
        throw std::invalid_argument("config: inflow rates must be >= 0");
    if (penetration <= 0.0 || penetration > 1.0)
        throw std::invalid_argument("config: penetration must be in (0, 1]");
    if (delta_t_s <= 0.0) throw std::invalid_argument("config: delta_t_s must be > 0");
    if (warmup_steps < 0 || horizon_steps < 0)
        throw std::invalid_argument("config: step counts must be >= 0");
    if (vehicle_length_m <= 0.0)
        throw std::invalid_argument("config: vehicle_length_m must be > 0");
    if (network.speed_limit_mps * delta_t_s >= network.lane_length_m)
        throw std::invalid_argument("config: lane shorter than one step of travel");
    if (idm.v0 <= 0.0 || idm.headway_s <= 0.0 || idm.min_gap_m <= 0.0 ||
        idm.a_max <= 0.0 || idm.b_comf <= 0.0 || idm.delta_exp < 1.0 ||
        idm.noise_sigma < 0.0)
        throw std::invalid_argument("config: invalid idm parameters");
    if (av_limits.accel <= 0.0 || av_limits.accel >= idm.a_max)
        throw std::invalid_argument("config: av accel must be in (0, idm.a_max)");
    if (av_limits.decel <= 0.0 || av_limits.decel >= idm.b_comf)
        throw std::invalid_argument("config: av decel must be in (0, idm.b_comf)");
    if (t_gap_s <= 0.0) throw std::invalid_argument("config: t_gap_s must be > 0");
    if (control.mode == ControlMode::FixedSignal &&
        (control.plan.tau_h_s < delta_t_s || control.plan.tau_v_s < delta_t_s))
        throw std::invalid_argument("config: signal phases must be >= delta_t");
    if (control.mode == ControlMode::MaxPressure && control.tau_min_s < delta_t_s)
        throw std::invalid_argument("config: tau_min must be >= delta_t");
}

SimState::SimState(std::shared_ptr<const Network> net, const ScenarioConfig& cfg)
    : net_(std::move(net)), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    lane_order_.resize(net_->lanes().size());
    crossings_.resize(net_->intersections().size());
    reset();
}

void SimState::reset() {
    vehicles_.clear();
    for (auto& l : lane_order_) l.clear();
    inflows_.clear();
    for (LaneId e : net_->entry_lanes()) {
        const double rate = is_horizontal(net_->lane(e).heading)
                                ? cfg_.inflow_horizontal_vph
                                : cfg_.inflow_vertical_vph;
        // Equal spacing with a per-seed phase; without the random phase all
        // evaluation trajectories share one schedule alignment and per-seed
        // means degenerate.
        const double headway = 3600.0 / rate;
        const double first_due = rate > 0.0 ? rng_.uniform() * headway : kInf;
        inflows_.push_back({e, headway, first_due, 0});
    }
    if (cfg_.control.mode == ControlMode::MaxPressure) {
        max_pressure_.emplace(static_cast<int>(net_->intersections().size()),
                              cfg_.control.tau_min_s);
    } else {
        max_pressure_.reset();
    }
    red_escapees_.clear();
    time_s_ = 0.0;
    step_index_ = 0;
    absolute_step_ = 0;
    next_vehicle_id_ = 0;
    entered_ = exited_ = collision_removed_ = dropped_ = 0;
    prev_phase_.assign(net_->intersections().size(), Phase::HorizontalGreen);
    if (cfg_.control.mode == ControlMode::FixedSignal ||
        cfg_.control.mode == ControlMode::MaxPressure) {
        for (const auto& node : net_->intersections())
            prev_phase_[node.id] = node_phase(node.id);
    }

    const bool policy_was_active = policy_active_;
    policy_active_ = false;  // everyone follows IDM through the warmup
    for (int i = 0; i < cfg_.warmup_steps; ++i) do_step({});
    policy_active_ = policy_was_active;
    step_index_ = 0;
}

void SimState::set_policy_control(bool active) {
    if (active && cfg_.control.mode != ControlMode::None)
        throw std::logic_error("policy control requires ControlMode::None");
    policy_active_ = active;
}

bool SimState::is_policy_controlled(const Vehicle& v) const {
    return policy_active_ && v.cls == VehicleClass::Av &&
           net_->lane(v.lane).downstream != kNoNode;
}

std::vector<int> SimState::controllable_av_ids() const {
    std::vector<int> ids;
    for (const auto& v : vehicles_)
        if (is_policy_controlled(v)) ids.push_back(v.id);
    return ids;
}

const Vehicle* SimState::find_vehicle(int id) const {
    auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                               [](const Vehicle& v, int key) { return v.id < key; });
    return (it != vehicles_.end() && it->id == id) ? &*it : nullptr;
}

Vehicle* SimState::find_vehicle_mut(int id) {
    return const_cast<Vehicle*>(std::as_const(*this).find_vehicle(id));
}

int SimState::lane_index_of(const Vehicle& v) const {
    const auto& order = lane_order_[v.lane];
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == v.id) return static_cast<int>(i);
    return -1;
}

std::pair<double, double> SimState::leader_of(const Vehicle& v) const {
    const int idx = lane_index_of(v);
    const auto& order = lane_order_[v.lane];
    if (idx > 0) {
        const Vehicle& lead = *find_vehicle(order[idx - 1]);
        const double gap = lead.position - lead.length - v.position;
        return {lead.speed, std::max(gap, 0.01)};
    }
    // First on its lane: look down the route. A leader straddling back over
    // the lane boundary has position < length on the next lane, which the
    // arithmetic below handles naturally.
    double dist = net_->lane(v.lane).length_m - v.position;
    LaneId next = net_->next_lane(v.lane);
    while (next != kNoLane) {
        const auto& no = lane_order_[next];
        if (!no.empty()) {
            const Vehicle& lead = *find_vehicle(no.back());
            const double gap = dist + lead.position - lead.length;
            return {lead.speed, std::max(gap, 0.01)};
        }
        dist += net_->lane(next).length_m;
        next = net_->next_lane(next);
    }
    return {0.0, kInf};
}

Phase SimState::node_phase(NodeId node) const {
    if (cfg_.control.mode == ControlMode::MaxPressure) return max_pressure_->phase(node);
    return fixed_phase(cfg_.control.plan, time_s_);
}

std::optional<Phase> SimState::signal_phase(NodeId node) const {
    if (cfg_.control.mode == ControlMode::FixedSignal ||
        cfg_.control.mode == ControlMode::MaxPressure)
        return node_phase(node);
    return std::nullopt;
}

bool SimState::conflict_zone_blocked(const Intersection& node, Heading ego) const {
    for (int h = 0; h < 4; ++h) {
        const auto heading = static_cast<Heading>(h);
        if (!headings_conflict(heading, ego)) continue;
        const LaneId a = node.approach[h];
        if (a != kNoLane && !lane_order_[a].empty()) {
            const Vehicle& front = *find_vehicle(lane_order_[a].front());
            if (front.position > stop_line(net_->lane(a))) return true;  // committed
        }
        const LaneId e = node.exit[h];
        if (e != kNoLane && !lane_order_[e].empty()) {
            const Vehicle& rear = *find_vehicle(lane_order_[e].back());
            if (rear.position < rear.length) return true;  // still clearing the point
        }
    }
    return false;
}

bool SimState::conflicting_red_runner(const Intersection& node, Heading ego) const {
    // A green release yields to known escapees still on a conflicting approach.
    if (red_escapees_.empty()) return false;
    for (int h = 0; h < 4; ++h) {
        const auto heading = static_cast<Heading>(h);
        if (!headings_conflict(heading, ego)) continue;
        const LaneId a = node.approach[h];
        if (a == kNoLane) continue;
        for (int id : lane_order_[a])
            if (red_escapees_.count(id)) return true;
    }
    return false;
}

void SimState::update_signal_escapees() {
    if (cfg_.control.mode != ControlMode::FixedSignal &&
        cfg_.control.mode != ControlMode::MaxPressure)
        return;
    for (const auto& node : net_->intersections()) {
        const Phase cur = node_phase(node.id);
        if (cur == prev_phase_[node.id]) continue;
        prev_phase_[node.id] = cur;
        for (int h = 0; h < 4; ++h) {
            const LaneId a = node.approach[h];
            if (a == kNoLane) continue;
            const Lane& lane = net_->lane(a);
            const bool now_red = is_horizontal(lane.heading)
                                     ? cur != Phase::HorizontalGreen
                                     : cur != Phase::VerticalGreen;
            // Stale exemptions from the previous cycle end with the flip.
            for (int id : lane_order_[a]) red_escapees_.erase(id);
            if (!now_red) continue;
            // Vehicles that cannot brake comfortably to the line at the flip
            // instant are let through; everyone behind them must stop.
            for (int id : lane_order_[a]) {
                const Vehicle& veh = *find_vehicle(id);
                if (veh.position > stop_line(lane)) continue;
                const double dist = stop_line(lane) - veh.position;
                const double needed = veh.speed * veh.speed / (2.0 * std::max(dist, 1e-9));
                if (needed > cfg_.idm.b_comf) red_escapees_.insert(id);
            }
        }
    }
}

bool SimState::conflicting_arrival_within_gap(const Intersection& node, Heading ego,
                                              bool respect_deferral) const {
    for (int h = 0; h < 4; ++h) {
        const auto heading = static_cast<Heading>(h);
        if (!headings_conflict(heading, ego)) continue;
        const LaneId a = node.approach[h];
        if (a == kNoLane) continue;
        const Lane& lane = net_->lane(a);
        for (int id : lane_order_[a]) {
            const Vehicle& veh = *find_vehicle(id);
            if (veh.position > stop_line(lane)) continue;  // handled by the zone check
            // Horizontal car-following vehicles defer to vertical ones, which
            // breaks the mutual-yield deadlock at uncontrolled junctions.
            const bool defers = respect_deferral && !is_policy_controlled(veh) &&
                                is_horizontal(heading) && !is_horizontal(ego);
            if (!defers && veh.speed > 1e-6) {
                const double eta = (lane.length_m - veh.position) / veh.speed;
                if (eta < cfg_.t_gap_s) return true;
            }
            break;  // only the first vehicle behind the line can arrive first
        }
    }
    return false;
}

std::optional<double> SimState::gate_constraint(const Vehicle& v) const {
    const Lane& lane = net_->lane(v.lane);
    if (lane.downstream == kNoNode) return std::nullopt;
    const double line = stop_line(lane);
    if (v.position > line) return std::nullopt;  // committed, never trapped

    const ControlMode mode = cfg_.control.mode;
    const bool signal_mode =
        mode == ControlMode::FixedSignal || mode == ControlMode::MaxPressure;
    bool red = false;
    if (signal_mode) {
        const Phase ph = node_phase(lane.downstream);
        red = is_horizontal(lane.heading) ? ph != Phase::HorizontalGreen
                                          : ph != Phase::VerticalGreen;
        if (red && red_escapees_.count(v.id)) return std::nullopt;
    }
    // Only the first vehicle that will actually stop for the line is gated;
    // followers react to it through car-following.
    for (int id : lane_order_[v.lane]) {
        const Vehicle& other = *find_vehicle(id);
        if (other.position > line) continue;
        if (red && red_escapees_.count(id)) continue;
        if (id != v.id) return std::nullopt;
        break;
    }
    const Intersection& node = net_->intersection(lane.downstream);
    const double dist = line - v.position;

    switch (mode) {
        case ControlMode::FixedSignal:
        case ControlMode::MaxPressure: {
            if (red) return dist;
            // Green release still waits for conflicting traffic caught inside
            // the junction (or committed to running its red) by the
            // instantaneous phase change.
            if (conflict_zone_blocked(node, lane.heading)) return dist;
            if (conflicting_red_runner(node, lane.heading)) return dist;
            return std::nullopt;
        }
        case ControlMode::Priority: {
            const bool vertical = !is_horizontal(lane.heading);
            const bool prioritized =
                (cfg_.control.priority == PriorityAxis::Vertical) == vertical;
            if (prioritized) return std::nullopt;
            if (conflict_zone_blocked(node, lane.heading)) return dist;
            if (conflicting_arrival_within_gap(node, lane.heading, false)) return dist;
            return std::nullopt;
        }
        case ControlMode::None: {
            if (conflict_zone_blocked(node, lane.heading)) return dist;
            if (conflicting_arrival_within_gap(node, lane.heading, true)) return dist;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

void SimState::compute_pressures(std::vector<double>& ph, std::vector<double>& pv) const {
    const auto& nodes = net_->intersections();
    ph.assign(nodes.size(), 0.0);
    pv.assign(nodes.size(), 0.0);
    for (const auto& node : nodes) {
        for (int h = 0; h < 4; ++h) {
            if (node.approach[h] == kNoLane) continue;
            const double upstream = static_cast<double>(lane_order_[node.approach[h]].size());
            const double downstream =
                node.exit[h] != kNoLane ? static_cast<double>(lane_order_[node.exit[h]].size()) : 0.0;
            const double p = upstream - downstream;
            if (is_horizontal(static_cast<Heading>(h))) ph[node.id] += p;
            else pv[node.id] += p;
        }
    }
}

StepMetrics SimState::step(const std::vector<std::pair<int, int>>& av_actions) {
    return do_step(av_actions);
}

StepMetrics SimState::do_step(const std::vector<std::pair<int, int>>& av_actions) {
    StepMetrics metrics;
    const double dt = cfg_.delta_t_s;
    const double v_max = cfg_.network.speed_limit_mps;
    const auto idm_k = idm_constants(cfg_.idm);

    // 0. adaptive signal decisions, then zero-yellow escape bookkeeping
    if (max_pressure_) {
        std::vector<double> ph, pv;
        compute_pressures(ph, pv);
        max_pressure_->update(ph, pv, dt);
    }
    update_signal_escapees();

    // 1. accelerations (AV actions, batched car-following, junction gating)
    const int n = static_cast<int>(vehicles_.size());
    std::vector<double> accel(n, 0.0);

    // Every vehicle needs its car-following acceleration: it drives the IDM
    // vehicles and acts as the rear-end safety clip for policy-driven AVs
    // (desired acceleration bounded by the safe following response, junction
    // entry left entirely to the policy).
    std::vector<double> desired(n, 0.0);
    std::vector<bool> policy_driven(n, false);
    std::size_t action_cursor = 0;
    std::vector<double> bv(n), bvl(n), bgap(n), bout(n);
    for (int i = 0; i < n; ++i) {
        const Vehicle& veh = vehicles_[i];
        if (is_policy_controlled(veh)) {
            if (action_cursor >= av_actions.size() || av_actions[action_cursor].first != veh.id)
                throw std::invalid_argument("step: missing action for controllable AV");
            const int a = av_actions[action_cursor++].second;
            if (a < 0 || a > 2) throw std::invalid_argument("step: action index out of range");
            desired[i] = (a == 0) ? cfg_.av_limits.accel : (a == 1) ? 0.0 : -cfg_.av_limits.decel;
            policy_driven[i] = true;
        }
        const auto [v_lead, gap] = leader_of(veh);
        bv[i] = veh.speed;
        bvl[i] = v_lead;
        bgap[i] = gap;
    }
    if (action_cursor != av_actions.size())
        throw std::invalid_argument("step: action provided for a non-controllable vehicle");

    if (n > 0) kernels::idm_accel_batch(bv.data(), bvl.data(), bgap.data(), bout.data(), n, idm_k);
    for (int i = 0; i < n; ++i) {
        const Vehicle& veh = vehicles_[i];
        const double following = std::clamp(bout[i], -kEmergencyDecel, cfg_.idm.a_max);
        if (policy_driven[i]) {
            accel[i] = std::min(desired[i], following);
        } else {
            double a = bout[i];
            if (const auto dist = gate_constraint(veh))
                a = std::min(a,
                             kernels::idm_accel_raw(veh.speed, 0.0, std::max(*dist, 0.01), idm_k));
            if (cfg_.idm.noise_sigma > 0.0) a += rng_.normal(0.0, cfg_.idm.noise_sigma);
            accel[i] = std::clamp(a, -kEmergencyDecel, cfg_.idm.a_max);
        }
    }

    // 2. integrate; collect conflict-point occupancy intervals in step time
    for (auto& node_list : crossings_) node_list.clear();
    for (int i = 0; i < n; ++i) {
        Vehicle& veh = vehicles_[i];
        const Lane& lane = net_->lane(veh.lane);
        const auto res = ballistic_step(veh.position, veh.speed, accel[i], dt, v_max);
        const double a_eff = (res.speed - veh.speed) / dt;
        if (lane.downstream != kNoNode) {
            const double d_front = lane.length_m - veh.position;
            if (const auto t_in = time_to_travel(veh.speed, a_eff, d_front, dt)) {
                const auto t_clear = time_to_travel(veh.speed, a_eff, d_front + veh.length, dt);
                crossings_[lane.downstream].push_back(
                    {veh.id, lane.heading, *t_in, t_clear.value_or(dt)});
            }
        }
        if (lane.upstream != kNoNode && veh.position < veh.length) {
            const auto t_clear = time_to_travel(veh.speed, a_eff, veh.length - veh.position, dt);
            crossings_[lane.upstream].push_back({veh.id, lane.heading, 0.0, t_clear.value_or(dt)});
        }
        veh.position = res.position;
        veh.speed = res.speed;
    }

    // 3. lane transitions and outflow
    std::vector<int> exited_ids;
    for (LaneId l = 0; l < static_cast<LaneId>(lane_order_.size()); ++l) {
        auto& order = lane_order_[l];
        const double len = net_->lane(l).length_m;
        while (!order.empty()) {
            Vehicle* front = find_vehicle_mut(order.front());
            if (front->position < len) break;
            order.erase(order.begin());
            red_escapees_.erase(front->id);
            const LaneId next = net_->next_lane(l);
            if (next == kNoLane) {
                ++metrics.outflow;
                ++exited_;
                exited_ids.push_back(front->id);
            } else {
                front->position -= len;
                front->lane = next;
                front->route_pos += 1;
                lane_order_[next].push_back(front->id);
            }
        }
    }
    remove_vehicles(exited_ids);

    // 4. collisions: (a) body overlap along each route, (b) overlapping
    // occupancy of a conflict point by conflicting movements
    std::vector<int> doomed;
    auto mark = [&doomed](int id) {
        if (std::find(doomed.begin(), doomed.end(), id) == doomed.end()) doomed.push_back(id);
    };
    for (const auto& route : net_->routes()) {
        const Vehicle* behind = nullptr;
        double behind_front_abs = 0.0;
        for (LaneId l : route) {
            const auto& order = lane_order_[l];
            const double off = net_->route_offset(l);
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                const Vehicle& ahead = *find_vehicle(*it);
                const double ahead_front_abs = off + ahead.position;
                if (behind && behind_front_abs > ahead_front_abs - ahead.length) {
                    ++metrics.collisions;
                    mark(behind->id);
                    mark(ahead.id);
                }
                behind = &ahead;
                behind_front_abs = ahead_front_abs;
            }
        }
    }
    for (const auto& node_list : crossings_) {
        for (std::size_t a = 0; a < node_list.size(); ++a) {
            for (std::size_t b = a + 1; b < node_list.size(); ++b) {
                const auto& ca = node_list[a];
                const auto& cb = node_list[b];
                if (!headings_conflict(ca.heading, cb.heading)) continue;
                if (ca.t_in <= cb.t_out && cb.t_in <= ca.t_out) {
                    ++metrics.collisions;
                    mark(ca.veh_id);
                    mark(cb.veh_id);
                }
            }
        }
    }
    collision_removed_ += static_cast<long>(doomed.size());
    remove_vehicles(doomed);

    // 5. inflows
    for (auto& fl : inflows_) {
        const double step_end = time_s_ + dt;
        while (fl.next_due_s <= step_end - 1e-9) {
            auto& order = lane_order_[fl.lane];
            double rear_gap = kInf, lead_speed = 0.0;
            if (!order.empty()) {
                const Vehicle& rear = *find_vehicle(order.back());
                rear_gap = rear.position - rear.length;
                lead_speed = rear.speed;
            }
            if (rear_gap >= cfg_.idm.min_gap_m + cfg_.vehicle_length_m) {
                Vehicle veh;
                veh.id = next_vehicle_id_++;
                // Deterministic evenly-spread AV pattern; the epsilon absorbs
                // binary rounding of penetrations meant as exact rationals.
                const double p = cfg_.penetration;
                const auto hits_before = std::floor(static_cast<double>(fl.arrivals) * p + 1e-9);
                const auto hits_after = std::floor(static_cast<double>(fl.arrivals + 1) * p + 1e-9);
                veh.cls = hits_after > hits_before ? VehicleClass::Av : VehicleClass::Idm;
                veh.lane = fl.lane;
                veh.position = 0.0;
                veh.length = cfg_.vehicle_length_m;
                const double safe =
                    order.empty()
                        ? v_max
                        : std::sqrt(std::max(0.0, lead_speed * lead_speed +
                                                      2.0 * cfg_.idm.b_comf *
                                                          (rear_gap - cfg_.idm.min_gap_m)));
                veh.speed = std::min(v_max, safe);
                const Lane& lane = net_->lane(fl.lane);
                veh.route_id = lane.route_id;
                veh.route_pos = lane.route_pos;
                veh.entry_step = absolute_step_;
                veh.entry_time_s = fl.next_due_s;
                vehicles_.push_back(veh);
                order.push_back(veh.id);
                ++entered_;
                ++fl.arrivals;
            } else {
                ++metrics.dropped_inflows;
                ++dropped_;
            }
            fl.next_due_s += fl.headway_s;
        }
    }

    // 6. clock
    time_s_ += dt;
    ++absolute_step_;
    ++step_index_;
    metrics.vehicle_count = static_cast<int>(vehicles_.size());
    return metrics;
}

int SimState::insert_vehicle(VehicleClass cls, LaneId lane, double position, double speed) {
    const Lane& l = net_->lane(lane);
    if (position < 0.0 || position >= l.length_m)
        throw std::invalid_argument("insert_vehicle: position outside lane");
    if (speed < 0.0 || speed > cfg_.network.speed_limit_mps)
        throw std::invalid_argument("insert_vehicle: speed out of range");
    Vehicle v;
    v.id = next_vehicle_id_++;
    v.cls = cls;
    v.lane = lane;
    v.position = position;
    v.speed = speed;
    v.length = cfg_.vehicle_length_m;
    v.route_id = l.route_id;
    v.route_pos = l.route_pos;
    v.entry_step = absolute_step_;
    v.entry_time_s = time_s_;
    auto& order = lane_order_[lane];
    auto it = order.begin();
    while (it != order.end() && find_vehicle(*it)->position > position) ++it;
    order.insert(it, v.id);
    vehicles_.push_back(v);
    ++entered_;
    return v.id;
}

void SimState::remove_vehicles(const std::vector<int>& ids) {
    if (ids.empty()) return;
    for (int id : ids) {
        const Vehicle* v = find_vehicle(id);
        if (!v) continue;
        auto& order = lane_order_[v->lane];
        order.erase(std::remove(order.begin(), order.end(), id), order.end());
        red_escapees_.erase(id);
    }
    std::erase_if(vehicles_, [&ids](const Vehicle& v) {
        return std::find(ids.begin(), ids.end(), v.id) != ids.end();
    });
}

}  // namespace gridflow
