#include "kernels_impl.hpp"

#include <cstdlib>
#include <stdexcept>

namespace gridflow::kernels {

namespace {

using detail::axpy_scalar;
using detail::idm_accel_batch_scalar;
using detail::matvec_bias_scalar;
using detail::matvec_t_scalar;
using detail::rank1_update_scalar;
using detail::rmsprop_step_scalar;

struct Table {
    void (*matvec_bias)(const double*, const double*, const double*, double*, int, int);
    void (*matvec_t)(const double*, const double*, double*, int, int);
    void (*rank1_update)(double*, const double*, const double*, double, int, int);
    void (*axpy)(double*, const double*, double, int);
    void (*rmsprop_step)(double*, double*, const double*, double, double, double, int);
    void (*idm_accel_batch)(const double*, const double*, const double*, double*, int, const IdmConstants&);
};

constexpr Table kScalarTable = {
    matvec_bias_scalar, matvec_t_scalar, rank1_update_scalar,
    axpy_scalar,        rmsprop_step_scalar, idm_accel_batch_scalar,
};

#if GRIDFLOW_HAVE_AVX2_KERNELS
constexpr Table kAvx2Table = {
    detail::matvec_bias_avx2, detail::matvec_t_avx2, detail::rank1_update_avx2,
    detail::axpy_avx2,        detail::rmsprop_step_avx2, detail::idm_accel_batch_avx2,
};
#endif

bool cpu_has_avx2() {
#if GRIDFLOW_HAVE_AVX2_KERNELS
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_default() {
    if (const char* env = std::getenv("GRIDFLOW_KERNELS")) {
        const std::string s(env);
        if (s == "scalar") return Backend::Scalar;
        if (s == "avx2" && cpu_has_avx2()) return Backend::Avx2;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

struct State {
    Backend backend = pick_default();
    const Table* table =
#if GRIDFLOW_HAVE_AVX2_KERNELS
        backend == Backend::Avx2 ? &kAvx2Table : &kScalarTable;
#else
        &kScalarTable;
#endif
};

State& state() {
    static State s;
    return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2: return cpu_has_avx2();
    }
    return false;
}

bool set_backend(Backend b) {
    if (!backend_supported(b)) return false;
    state().backend = b;
#if GRIDFLOW_HAVE_AVX2_KERNELS
    state().table = (b == Backend::Avx2) ? &kAvx2Table : &kScalarTable;
#else
    state().table = &kScalarTable;
#endif
    return true;
}

std::string backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void matvec_bias(const double* W, const double* b, const double* x, double* y,
                 int rows, int cols) {
    state().table->matvec_bias(W, b, x, y, rows, cols);
}

void matvec_t(const double* W, const double* d, double* y, int rows, int cols) {
    state().table->matvec_t(W, d, y, rows, cols);
}

void rank1_update(double* A, const double* d, const double* x, double coeff,
                  int rows, int cols) {
    state().table->rank1_update(A, d, x, coeff, rows, cols);
}

void axpy(double* y, const double* x, double a, int n) {
    state().table->axpy(y, x, a, n);
}

void rmsprop_step(double* p, double* cache, const double* g, double alpha,
                  double rho, double eps, int n) {
    state().table->rmsprop_step(p, cache, g, alpha, rho, eps, n);
}

void idm_accel_batch(const double* v, const double* v_lead, const double* gap,
                     double* out, int n, const IdmConstants& k) {
    state().table->idm_accel_batch(v, v_lead, gap, out, n, k);
}

}  // namespace gridflow::kernels
