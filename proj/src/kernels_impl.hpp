#pragma once

#include "gridflow/kernels.hpp"

// Internal: per-backend kernel entry points wired up by kernels_dispatch.cpp.
namespace gridflow::kernels::detail {

void matvec_bias_scalar(const double* W, const double* b, const double* x, double* y, int rows, int cols);
void matvec_t_scalar(const double* W, const double* d, double* y, int rows, int cols);
void rank1_update_scalar(double* A, const double* d, const double* x, double coeff, int rows, int cols);
void axpy_scalar(double* y, const double* x, double a, int n);
void rmsprop_step_scalar(double* p, double* cache, const double* g, double alpha, double rho, double eps, int n);
void idm_accel_batch_scalar(const double* v, const double* v_lead, const double* gap, double* out, int n, const IdmConstants& k);

#if defined(__x86_64__) || defined(_M_X64)
#define GRIDFLOW_HAVE_AVX2_KERNELS 1
void matvec_bias_avx2(const double* W, const double* b, const double* x, double* y, int rows, int cols);
void matvec_t_avx2(const double* W, const double* d, double* y, int rows, int cols);
void rank1_update_avx2(double* A, const double* d, const double* x, double coeff, int rows, int cols);
void axpy_avx2(double* y, const double* x, double a, int n);
void rmsprop_step_avx2(double* p, double* cache, const double* g, double alpha, double rho, double eps, int n);
void idm_accel_batch_avx2(const double* v, const double* v_lead, const double* gap, double* out, int n, const IdmConstants& k);
#else
#define GRIDFLOW_HAVE_AVX2_KERNELS 0
#endif

}  // namespace gridflow::kernels::detail
