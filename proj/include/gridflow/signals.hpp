#pragma once

#include <vector>

namespace gridflow {

enum class Phase { HorizontalGreen, VerticalGreen };

// Fixed-time two-phase plan shared by all intersections. Yellow and all-red
// are zero by construction.
struct SignalPlan {
    double tau_h_s = 25.0;  // horizontal green duration
    double tau_v_s = 25.0;  // vertical green duration
    double offset_s = 0.0;
};

// Phase of a fixed-time plan at a clock instant; the horizontal phase covers
// the half-open interval [0, tau_h) of each cycle.
inline Phase fixed_phase(const SignalPlan& plan, double clock_s) {
    const double cycle = plan.tau_h_s + plan.tau_v_s;
    double t = clock_s + plan.offset_s;
    t -= cycle * static_cast<long long>(t / cycle);
    if (t < 0.0) t += cycle;
    return t < plan.tau_h_s ? Phase::HorizontalGreen : Phase::VerticalGreen;
}

// Adaptive two-phase control: switch to the opposing phase when it has
// strictly greater pressure and the current phase has run at least tau_min.
class MaxPressureController {
public:
    MaxPressureController(int n_intersections, double tau_min_s)
        : tau_min_s_(tau_min_s), phase_(n_intersections, Phase::HorizontalGreen),
          time_in_phase_(n_intersections, 0.0) {}

    // Called once per step before accelerations; pressures indexed by node.
    // The dwell check uses the time the phase has already been held, so a
    // switch can happen no earlier than tau_min after the previous one.
    void update(const std::vector<double>& pressure_h,
                const std::vector<double>& pressure_v, double delta_t) {
        for (std::size_t i = 0; i < phase_.size(); ++i) {
            if (time_in_phase_[i] + 1e-9 >= tau_min_s_) {
                const bool horizontal = phase_[i] == Phase::HorizontalGreen;
                const double cur = horizontal ? pressure_h[i] : pressure_v[i];
                const double other = horizontal ? pressure_v[i] : pressure_h[i];
                if (other > cur) {
                    phase_[i] = horizontal ? Phase::VerticalGreen : Phase::HorizontalGreen;
                    time_in_phase_[i] = 0.0;
                }
            }
            time_in_phase_[i] += delta_t;
        }
    }

    Phase phase(int node) const { return phase_[node]; }
    double time_in_phase(int node) const { return time_in_phase_[node]; }

private:
    double tau_min_s_;
    std::vector<Phase> phase_;
    std::vector<double> time_in_phase_;
};

}  // namespace gridflow
