#pragma once

#include <array>
#include <vector>

#include "gridflow/sim.hpp"

namespace gridflow {

inline constexpr int kObsDim = 22;
using Observation = std::array<double, kObsDim>;

// Partition of one approach lane: the IDM vehicles ahead of the first AV
// (possibly none), then one chain per AV consisting of the AV followed by its
// trailing IDM vehicles up to the next AV.
struct Chain {
    int head = -1;  // AV id
    int tail = -1;  // last vehicle of the chain; equals head when alone
};

struct ChainDecomposition {
    std::vector<int> leading_half_chain;  // nearest-to-intersection first
    std::vector<Chain> chains;            // nearest chain first
};

// `lane_ids` must be ordered by distance to the intersection ascending
// (exactly the per-lane order SimState maintains). `is_av(id)` classifies.
ChainDecomposition decompose(const std::vector<int>& lane_ids,
                             const std::vector<bool>& is_av);

ChainDecomposition decompose(const SimState& state, LaneId lane);

// Fixed 22-entry feature vector for one controllable AV: (speed, distance to
// intersection), both normalized, for the ego chain head and tail, then for
// each of the three other approach slots in clockwise order the half-chain
// tail and the next chain's head and tail. Absent lanes and absent vehicles
// pad with (0, 1). Throws if the AV is not controllable.
Observation observe(const SimState& state, int av_id);

}  // namespace gridflow
