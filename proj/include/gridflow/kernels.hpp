#pragma once

#include <cmath>
#include <string>

// Numeric inner-loop kernels used by the policy network and the vehicle
// dynamics batch update. Each operation has a scalar reference implementation
// and an AVX2 variant; the active variant is chosen once at startup from CPU
// capabilities and can be overridden (GRIDFLOW_KERNELS=scalar|avx2 or
// set_backend). Variants agree to floating-point roundoff; equivalence is
// covered by tests/test_kernels.cpp.
namespace gridflow::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Returns false (and leaves the backend unchanged) if unsupported on this CPU.
bool set_backend(Backend b);
std::string backend_name(Backend b);

// Car-following constants used by the batch kernel (a subset of IdmParams;
// noise and clamping are applied by the caller).
struct IdmConstants {
    double v0;         // desired speed, m/s
    double headway;    // desired time headway T, s
    double min_gap;    // jam distance s0, m
    double a_max;      // max acceleration, m/s^2
    double b_comf;     // comfortable deceleration, m/s^2
    double delta_exp;  // free-flow exponent
};

// Scalar reference formula, shared by both backends for single evaluations.
// gap may be +infinity (free road). Result is unclamped.
inline double idm_accel_raw(double v, double v_lead, double gap, const IdmConstants& k) {
    const double closing = v * (v - v_lead) / (2.0 * std::sqrt(k.a_max * k.b_comf));
    const double s_star = k.min_gap + std::max(0.0, v * k.headway + closing);
    const double ratio = v / k.v0;
    double free_term;
    if (k.delta_exp == 4.0) {
        const double r2 = ratio * ratio;
        free_term = r2 * r2;
    } else {
        free_term = std::pow(ratio, k.delta_exp);
    }
    const double z = s_star / gap;
    return k.a_max * (1.0 - free_term - z * z);
}

// y = W x + b. W is row-major [rows x cols], y has rows entries.
void matvec_bias(const double* W, const double* b, const double* x, double* y,
                 int rows, int cols);

// y = W^T d. W row-major [rows x cols], d has rows entries, y has cols.
void matvec_t(const double* W, const double* d, double* y, int rows, int cols);

// A += coeff * d x^T. A row-major [rows x cols].
void rank1_update(double* A, const double* d, const double* x, double coeff,
                  int rows, int cols);

// y += a * x
void axpy(double* y, const double* x, double a, int n);

// cache = rho*cache + (1-rho)*g^2 ; p += alpha * g / (sqrt(cache) + eps)
void rmsprop_step(double* p, double* cache, const double* g, double alpha,
                  double rho, double eps, int n);

// out[i] = unclamped IDM acceleration for (v[i], v_lead[i], gap[i]).
void idm_accel_batch(const double* v, const double* v_lead, const double* gap,
                     double* out, int n, const IdmConstants& k);

}  // namespace gridflow::kernels
