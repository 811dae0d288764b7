#include "gridflow/idm.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow {

double idm_accel(double v, double v_lead, double gap, const IdmParams& p, double noise) {
    const double a = kernels::idm_accel_raw(v, v_lead, gap, idm_constants(p)) + noise;
    return std::clamp(a, -kEmergencyDecel, p.a_max);
}

double accel_toward_stop_line(double v, double dist_to_line, const IdmParams& p) {
    return idm_accel(v, 0.0, dist_to_line, p);
}

BallisticResult ballistic_step(double x, double v, double a, double delta_t, double v_max) {
    const double v1 = std::clamp(v + a * delta_t, 0.0, v_max);
    return {x + 0.5 * (v + v1) * delta_t, v1};
}

std::optional<double> time_to_travel(double v0, double a_eff, double distance, double delta_t) {
    if (distance <= 0.0) return 0.0;
    const double total = v0 * delta_t + 0.5 * a_eff * delta_t * delta_t;
    if (distance > total) return std::nullopt;
    if (std::abs(a_eff) < 1e-12) {
        if (v0 <= 0.0) return std::nullopt;
        return distance / v0;
    }
    // Solve 0.5*a*t^2 + v0*t - d = 0 for the root in [0, delta_t]. The
    // within-step speed v0 + a_eff*t never goes negative (both endpoint
    // speeds are >= 0), so displacement is monotone and the root unique.
    const double disc = v0 * v0 + 2.0 * a_eff * distance;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t;
    if (a_eff > 0.0) {
        t = (sq - v0) / a_eff;
    } else {
        // Numerically stable form for decelerating profiles.
        t = 2.0 * distance / (v0 + sq);
    }
    if (t < 0.0) t = 0.0;
    return std::min(t, delta_t);
}

}  // namespace gridflow
