#include "gridflow/network.hpp"

#include <stdexcept>

namespace gridflow {

namespace {

void validate(const NetworkSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1)
        throw std::invalid_argument("network: rows and cols must be >= 1");
    if (spec.lane_length_m <= 0.0)
        throw std::invalid_argument("network: lane_length_m must be > 0");
    if (spec.speed_limit_mps <= 0.0)
        throw std::invalid_argument("network: speed_limit_mps must be > 0");
}

}  // namespace

Network Network::build_grid(const NetworkSpec& spec) {
    validate(spec);
    Network net;
    net.spec_ = spec;
    const int rows = spec.rows;
    const int cols = spec.cols;

    net.nodes_.resize(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const NodeId id = r * cols + c;
            net.nodes_[id].id = id;
            net.nodes_[id].row = r;
            net.nodes_[id].col = c;
        }
    }

    // Adds one route (a chain of segments between consecutive intersections)
    // and wires up the approach/exit maps of the nodes it passes.
    auto add_route = [&net, &spec](Heading h, const std::vector<NodeId>& nodes_along) {
        const int route_id = static_cast<int>(net.routes_.size());
        std::vector<LaneId> route;
        const int segments = static_cast<int>(nodes_along.size()) + 1;
        for (int s = 0; s < segments; ++s) {
            Lane lane;
            lane.id = static_cast<LaneId>(net.lanes_.size());
            lane.heading = h;
            lane.length_m = spec.lane_length_m;
            lane.upstream = (s == 0) ? kNoNode : nodes_along[s - 1];
            lane.downstream = (s == segments - 1) ? kNoNode : nodes_along[s];
            lane.route_id = route_id;
            lane.route_pos = s;
            if (lane.downstream != kNoNode)
                net.nodes_[lane.downstream].approach[heading_index(h)] = lane.id;
            if (lane.upstream != kNoNode)
                net.nodes_[lane.upstream].exit[heading_index(h)] = lane.id;
            route.push_back(lane.id);
            net.lanes_.push_back(lane);
        }
        net.entries_.push_back(route.front());
        net.routes_.push_back(std::move(route));
    };

    for (int r = 0; r < rows; ++r) {
        std::vector<NodeId> east;  // west to east
        for (int c = 0; c < cols; ++c) east.push_back(r * cols + c);
        add_route(Heading::East, east);
        if (spec.topology == Topology::FourWay) {
            std::vector<NodeId> west(east.rbegin(), east.rend());
            add_route(Heading::West, west);
        }
    }
    for (int c = 0; c < cols; ++c) {
        std::vector<NodeId> north;  // south to north
        for (int r = 0; r < rows; ++r) north.push_back(r * cols + c);
        add_route(Heading::North, north);
        if (spec.topology == Topology::FourWay) {
            std::vector<NodeId> south(north.rbegin(), north.rend());
            add_route(Heading::South, south);
        }
    }

    for (auto& node : net.nodes_) {
        for (int a = 0; a < 4; ++a) {
            for (int b = a + 1; b < 4; ++b) {
                if (node.approach[a] == kNoLane || node.approach[b] == kNoLane) continue;
                const auto ha = static_cast<Heading>(a);
                const auto hb = static_cast<Heading>(b);
                if (headings_conflict(ha, hb)) node.conflict_pairs.emplace_back(ha, hb);
            }
        }
    }
    return net;
}

const std::vector<LaneId>& Network::route_from_entry(LaneId entry) const {
    if (entry < 0 || entry >= static_cast<LaneId>(lanes_.size()) || !is_entry(entry))
        throw std::invalid_argument("route_from_entry: lane is not an entry lane");
    return routes_[lanes_[entry].route_id];
}

LaneId Network::next_lane(LaneId id) const {
    const Lane& l = lanes_[id];
    const auto& route = routes_[l.route_id];
    const int next = l.route_pos + 1;
    return next < static_cast<int>(route.size()) ? route[next] : kNoLane;
}

double Network::route_offset(LaneId id) const {
    return lanes_[id].route_pos * spec_.lane_length_m;
}

}  // namespace gridflow
