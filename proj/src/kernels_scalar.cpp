#include "kernels_impl.hpp"

#include <cmath>

namespace gridflow::kernels::detail {

void matvec_bias_scalar(const double* W, const double* b, const double* x, double* y,
                        int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* w = W + static_cast<std::size_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += w[c] * x[c];
        y[r] = acc + b[r];
    }
}

void matvec_t_scalar(const double* W, const double* d, double* y, int rows, int cols) {
    for (int c = 0; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* w = W + static_cast<std::size_t>(r) * cols;
        const double dr = d[r];
        for (int c = 0; c < cols; ++c) y[c] += dr * w[c];
    }
}

void rank1_update_scalar(double* A, const double* d, const double* x, double coeff,
                         int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* a = A + static_cast<std::size_t>(r) * cols;
        const double dr = coeff * d[r];
        for (int c = 0; c < cols; ++c) a[c] += dr * x[c];
    }
}

void axpy_scalar(double* y, const double* x, double a, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void rmsprop_step_scalar(double* p, double* cache, const double* g, double alpha,
                         double rho, double eps, int n) {
    for (int i = 0; i < n; ++i) {
        cache[i] = rho * cache[i] + (1.0 - rho) * g[i] * g[i];
        p[i] += alpha * g[i] / (std::sqrt(cache[i]) + eps);
    }
}

void idm_accel_batch_scalar(const double* v, const double* v_lead, const double* gap,
                            double* out, int n, const IdmConstants& k) {
    const double inv_2sqrt = 1.0 / (2.0 * std::sqrt(k.a_max * k.b_comf));
    const double inv_v0 = 1.0 / k.v0;
    if (k.delta_exp == 4.0) {
        for (int i = 0; i < n; ++i) {
            const double closing = v[i] * (v[i] - v_lead[i]) * inv_2sqrt;
            const double s_star = k.min_gap + std::max(0.0, v[i] * k.headway + closing);
            const double r = v[i] * inv_v0;
            const double r2 = r * r;
            const double z = s_star / gap[i];
            out[i] = k.a_max * (1.0 - r2 * r2 - z * z);
        }
    } else {
        for (int i = 0; i < n; ++i) out[i] = idm_accel_raw(v[i], v_lead[i], gap[i], k);
    }
}

}  // namespace gridflow::kernels::detail
