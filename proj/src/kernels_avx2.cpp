#include "kernels_impl.hpp"

#if GRIDFLOW_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>

// Compiled with -mavx2 -mfma (see src/CMakeLists.txt); only ever called after
// the dispatcher has confirmed CPU support.
namespace gridflow::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void matvec_bias_avx2(const double* W, const double* b, const double* x, double* y,
                      int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* w = W + static_cast<std::size_t>(r) * cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        int c = 0;
        for (; c + 8 <= cols; c += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + c), _mm256_loadu_pd(x + c), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + c + 4), _mm256_loadu_pd(x + c + 4), acc1);
        }
        for (; c + 4 <= cols; c += 4)
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + c), _mm256_loadu_pd(x + c), acc0);
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; c < cols; ++c) acc += w[c] * x[c];
        y[r] = acc + b[r];
    }
}

void matvec_t_avx2(const double* W, const double* d, double* y, int rows, int cols) {
    int c = 0;
    for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(y + c, _mm256_setzero_pd());
    for (; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* w = W + static_cast<std::size_t>(r) * cols;
        const __m256d dr = _mm256_set1_pd(d[r]);
        c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d acc = _mm256_fmadd_pd(dr, _mm256_loadu_pd(w + c), _mm256_loadu_pd(y + c));
            _mm256_storeu_pd(y + c, acc);
        }
        for (; c < cols; ++c) y[c] += d[r] * w[c];
    }
}

void rank1_update_avx2(double* A, const double* d, const double* x, double coeff,
                       int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* a = A + static_cast<std::size_t>(r) * cols;
        const __m256d dr = _mm256_set1_pd(coeff * d[r]);
        int c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d acc = _mm256_fmadd_pd(dr, _mm256_loadu_pd(x + c), _mm256_loadu_pd(a + c));
            _mm256_storeu_pd(a + c, acc);
        }
        const double drs = coeff * d[r];
        for (; c < cols; ++c) a[c] += drs * x[c];
    }
}

void axpy_avx2(double* y, const double* x, double a, int n) {
    const __m256d av = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void rmsprop_step_avx2(double* p, double* cache, const double* g, double alpha,
                       double rho, double eps, int n) {
    const __m256d rhov = _mm256_set1_pd(rho);
    const __m256d one_m_rho = _mm256_set1_pd(1.0 - rho);
    const __m256d alphav = _mm256_set1_pd(alpha);
    const __m256d epsv = _mm256_set1_pd(eps);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d cv = _mm256_loadu_pd(cache + i);
        cv = _mm256_fmadd_pd(rhov, cv, _mm256_mul_pd(one_m_rho, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(cache + i, cv);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(cv), epsv);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(alphav, gv), denom);
        _mm256_storeu_pd(p + i, _mm256_add_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        cache[i] = rho * cache[i] + (1.0 - rho) * g[i] * g[i];
        p[i] += alpha * g[i] / (std::sqrt(cache[i]) + eps);
    }
}

void idm_accel_batch_avx2(const double* v, const double* v_lead, const double* gap,
                          double* out, int n, const IdmConstants& k) {
    if (k.delta_exp != 4.0) {  // generic exponent stays scalar (needs pow)
        idm_accel_batch_scalar(v, v_lead, gap, out, n, k);
        return;
    }
    const __m256d inv_2sqrt = _mm256_set1_pd(1.0 / (2.0 * std::sqrt(k.a_max * k.b_comf)));
    const __m256d inv_v0 = _mm256_set1_pd(1.0 / k.v0);
    const __m256d headway = _mm256_set1_pd(k.headway);
    const __m256d min_gap = _mm256_set1_pd(k.min_gap);
    const __m256d a_max = _mm256_set1_pd(k.a_max);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vv = _mm256_loadu_pd(v + i);
        const __m256d vl = _mm256_loadu_pd(v_lead + i);
        const __m256d gp = _mm256_loadu_pd(gap + i);
        const __m256d closing = _mm256_mul_pd(_mm256_mul_pd(vv, _mm256_sub_pd(vv, vl)), inv_2sqrt);
        const __m256d dyn = _mm256_max_pd(zero, _mm256_fmadd_pd(vv, headway, closing));
        const __m256d s_star = _mm256_add_pd(min_gap, dyn);
        const __m256d r = _mm256_mul_pd(vv, inv_v0);
        const __m256d r2 = _mm256_mul_pd(r, r);
        const __m256d r4 = _mm256_mul_pd(r2, r2);
        const __m256d z = _mm256_div_pd(s_star, gp);
        const __m256d bracket = _mm256_sub_pd(_mm256_sub_pd(one, r4), _mm256_mul_pd(z, z));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(a_max, bracket));
    }
    if (i < n) idm_accel_batch_scalar(v + i, v_lead + i, gap + i, out + i, n - i, k);
}

}  // namespace gridflow::kernels::detail

#endif  // GRIDFLOW_HAVE_AVX2_KERNELS
