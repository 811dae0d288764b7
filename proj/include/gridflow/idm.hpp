#pragma once

#include <optional>

#include "gridflow/kernels.hpp"

namespace gridflow {

// Intelligent Driver Model parameters. Defaults follow the usual
// SUMO-compatible values for an urban 13 m/s road.
struct IdmParams {
    double v0 = 13.0;           // desired speed, m/s
    double headway_s = 1.0;     // desired time headway T
    double min_gap_m = 2.5;     // jam distance s0
    double a_max = 2.6;         // max acceleration, m/s^2
    double b_comf = 4.5;        // comfortable deceleration, m/s^2
    double delta_exp = 4.0;     // free-flow exponent
    double noise_sigma = 0.2;   // std of per-step acceleration noise, m/s^2
};

// Discrete action limits for controlled vehicles.
struct AvLimits {
    double accel = 1.5;  // m/s^2
    double decel = 3.5;  // m/s^2
};

// Hard deceleration cap applied to car-following vehicles only; the IDM
// interaction term is unbounded below and must be clamped somewhere physical.
inline constexpr double kEmergencyDecel = 9.0;

inline kernels::IdmConstants idm_constants(const IdmParams& p) {
    return {p.v0, p.headway_s, p.min_gap_m, p.a_max, p.b_comf, p.delta_exp};
}

// Car-following acceleration toward a leader at relative gap (leader rear
// minus own front). Pass gap = +infinity when there is no leader. `noise` is
// an already-sampled N(0, sigma^2) value; the result is clamped to
// [-kEmergencyDecel, a_max] after noise is added.
double idm_accel(double v, double v_lead, double gap, const IdmParams& p, double noise = 0.0);

// Acceleration toward a standing virtual leader at `dist_to_line` (> 0).
double accel_toward_stop_line(double v, double dist_to_line, const IdmParams& p);

struct BallisticResult {
    double position;
    double speed;
};

// One kinematic step: speed clamps to [0, v_max], displacement is the
// trapezoid of the clamped endpoint speeds.
BallisticResult ballistic_step(double x, double v, double a, double delta_t, double v_max);

// Earliest t in [0, delta_t] at which a vehicle moving with the effective
// within-step profile v(t) = v0 + a_eff*t has covered `distance`, where
// a_eff = (v1 - v0)/delta_t matches the ballistic displacement. Empty if the
// distance is not covered within the step.
std::optional<double> time_to_travel(double v0, double a_eff, double distance, double delta_t);

}  // namespace gridflow
