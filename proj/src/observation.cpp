#include "gridflow/observation.hpp"

#include <stdexcept>

namespace gridflow {

ChainDecomposition decompose(const std::vector<int>& lane_ids,
                             const std::vector<bool>& is_av) {
    ChainDecomposition out;
    std::size_t i = 0;
    while (i < lane_ids.size() && !is_av[i]) out.leading_half_chain.push_back(lane_ids[i++]);
    while (i < lane_ids.size()) {
        Chain c;
        c.head = lane_ids[i];
        c.tail = c.head;
        ++i;
        while (i < lane_ids.size() && !is_av[i]) {
            c.tail = lane_ids[i];
            ++i;
        }
        out.chains.push_back(c);
    }
    return out;
}

ChainDecomposition decompose(const SimState& state, LaneId lane) {
    const auto& ids = state.lane_vehicles(lane);
    std::vector<bool> av(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        av[i] = state.find_vehicle(ids[i])->cls == VehicleClass::Av;
    return decompose(ids, av);
}

namespace {

// (normalized speed, normalized distance to intersection) for one vehicle.
void put(Observation& obs, int slot, const SimState& state, int veh_id) {
    const Vehicle& v = *state.find_vehicle(veh_id);
    const Lane& lane = state.network().lane(v.lane);
    obs[2 * slot] = v.speed / state.config().network.speed_limit_mps;
    obs[2 * slot + 1] = (lane.length_m - v.position) / lane.length_m;
}

void put_padding(Observation& obs, int slot) {
    obs[2 * slot] = 0.0;
    obs[2 * slot + 1] = 1.0;
}

}  // namespace

Observation observe(const SimState& state, int av_id) {
    const Vehicle* ego = state.find_vehicle(av_id);
    if (!ego || ego->cls != VehicleClass::Av)
        throw std::invalid_argument("observe: not an AV");
    const Lane& ego_lane = state.network().lane(ego->lane);
    if (ego_lane.downstream == kNoNode)
        throw std::invalid_argument("observe: AV has no approaching intersection");
    const Intersection& node = state.network().intersection(ego_lane.downstream);

    Observation obs{};
    // Ego chain: head is the ego itself.
    const auto ego_dec = decompose(state, ego->lane);
    const Chain* ego_chain = nullptr;
    for (const auto& c : ego_dec.chains)
        if (c.head == av_id) ego_chain = &c;
    if (!ego_chain) throw std::logic_error("observe: ego not a chain head");
    put(obs, 0, state, ego_chain->head);
    put(obs, 1, state, ego_chain->tail);

    for (int k = 1; k <= 3; ++k) {
        const Heading h = rotate_cw(ego_lane.heading, k);
        const int base = 2 + 3 * (k - 1);
        const LaneId lane = node.approach[heading_index(h)];
        if (lane == kNoLane) {
            put_padding(obs, base);
            put_padding(obs, base + 1);
            put_padding(obs, base + 2);
            continue;
        }
        const auto dec = decompose(state, lane);
        if (dec.leading_half_chain.empty()) put_padding(obs, base);
        else put(obs, base, state, dec.leading_half_chain.back());
        if (dec.chains.empty()) {
            put_padding(obs, base + 1);
            put_padding(obs, base + 2);
        } else {
            put(obs, base + 1, state, dec.chains.front().head);
            put(obs, base + 2, state, dec.chains.front().tail);
        }
    }
    return obs;
}

}  // namespace gridflow
