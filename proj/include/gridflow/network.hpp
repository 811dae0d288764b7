#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace gridflow {

enum class Topology { TwoWay, FourWay };

// Enum order is chosen so that one clockwise quarter turn is (h + 1) % 4.
enum class Heading : int { East = 0, South = 1, West = 2, North = 3 };

inline constexpr int heading_index(Heading h) { return static_cast<int>(h); }
inline constexpr Heading rotate_cw(Heading h, int quarter_turns) {
    return static_cast<Heading>((heading_index(h) + quarter_turns) % 4);
}
inline constexpr bool is_horizontal(Heading h) {
    return h == Heading::East || h == Heading::West;
}
// Perpendicular through movements cross; opposite headings never do.
inline constexpr bool headings_conflict(Heading a, Heading b) {
    return is_horizontal(a) != is_horizontal(b);
}

using LaneId = int;
using NodeId = int;
inline constexpr int kNoNode = -1;
inline constexpr int kNoLane = -1;

struct NetworkSpec {
    Topology topology = Topology::TwoWay;
    int rows = 1;  // horizontal roads
    int cols = 1;  // vertical roads
    double lane_length_m = 100.0;
    double speed_limit_mps = 13.0;
};

struct Lane {
    LaneId id = kNoLane;
    Heading heading = Heading::East;
    double length_m = 0.0;
    NodeId upstream = kNoNode;    // kNoNode: network entry
    NodeId downstream = kNoNode;  // kNoNode: network exit
    int route_id = -1;            // every lane lies on exactly one route
    int route_pos = -1;           // index within that route
};

struct Intersection {
    NodeId id = kNoNode;
    int row = 0;
    int col = 0;
    std::array<LaneId, 4> approach{kNoLane, kNoLane, kNoLane, kNoLane};  // by heading
    std::array<LaneId, 4> exit{kNoLane, kNoLane, kNoLane, kNoLane};
    std::vector<std::pair<Heading, Heading>> conflict_pairs;
};

// Immutable grid of single-lane through-only intersections. Row 0 is the
// southernmost horizontal road; horizontal traffic runs eastbound and
// vertical traffic northbound (four-way adds the opposite headings).
class Network {
public:
    static Network build_grid(const NetworkSpec& spec);

    const NetworkSpec& spec() const { return spec_; }
    const std::vector<Lane>& lanes() const { return lanes_; }
    const std::vector<Intersection>& intersections() const { return nodes_; }
    const Lane& lane(LaneId id) const { return lanes_[id]; }
    const Intersection& intersection(NodeId id) const { return nodes_[id]; }

    const std::vector<LaneId>& entry_lanes() const { return entries_; }
    bool is_entry(LaneId id) const { return lanes_[id].upstream == kNoNode; }

    // Straight-through lane sequence from an entry lane to the opposite exit.
    const std::vector<LaneId>& route_from_entry(LaneId entry) const;
    const std::vector<std::vector<LaneId>>& routes() const { return routes_; }

    // Next lane along the (unique) route through `id`, or kNoLane at an exit.
    LaneId next_lane(LaneId id) const;
    // Distance from the route start to the start of this lane.
    double route_offset(LaneId id) const;

private:
    NetworkSpec spec_;
    std::vector<Lane> lanes_;
    std::vector<Intersection> nodes_;
    std::vector<LaneId> entries_;
    std::vector<std::vector<LaneId>> routes_;
};

}  // namespace gridflow
