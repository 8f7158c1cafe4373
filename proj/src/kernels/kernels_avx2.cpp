// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU-feature check (see kernels.cpp).

#include "vrcom/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace vrcom::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void cmatvec_impl(const double* a_re, const double* a_im,
                  const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t k = 0; k < n; ++k) {
        const double* row_re = a_re + k * n;
        const double* row_im = a_im + k * n;
        __m256d acc_re = _mm256_setzero_pd();
        __m256d acc_im = _mm256_setzero_pd();
        std::size_t m = 0;
        for (; m < n4; m += 4) {
            const __m256d ar = _mm256_loadu_pd(row_re + m);
            const __m256d ai = _mm256_loadu_pd(row_im + m);
            const __m256d xr = _mm256_loadu_pd(x_re + m);
            const __m256d xi = _mm256_loadu_pd(x_im + m);
            acc_re = _mm256_fmadd_pd(ar, xr, acc_re);
            acc_re = _mm256_fnmadd_pd(ai, xi, acc_re);
            acc_im = _mm256_fmadd_pd(ar, xi, acc_im);
            acc_im = _mm256_fmadd_pd(ai, xr, acc_im);
        }
        double sum_re = hsum(acc_re);
        double sum_im = hsum(acc_im);
        for (; m < n; ++m) {
            sum_re += row_re[m] * x_re[m] - row_im[m] * x_im[m];
            sum_im += row_re[m] * x_im[m] + row_im[m] * x_re[m];
        }
        y_re[k] = sum_re;
        y_im[k] = sum_im;
    }
}

void bus_power_impl(const double* v_re, const double* v_im,
                    const double* i_re, const double* i_im,
                    double* p, double* q, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    std::size_t k = 0;
    for (; k < n4; k += 4) {
        const __m256d vr = _mm256_loadu_pd(v_re + k);
        const __m256d vi = _mm256_loadu_pd(v_im + k);
        const __m256d ir = _mm256_loadu_pd(i_re + k);
        const __m256d ii = _mm256_loadu_pd(i_im + k);
        _mm256_storeu_pd(p + k, _mm256_fmadd_pd(vr, ir, _mm256_mul_pd(vi, ii)));
        _mm256_storeu_pd(q + k, _mm256_fnmadd_pd(vr, ii, _mm256_mul_pd(vi, ir)));
    }
    for (; k < n; ++k) {
        p[k] = v_re[k] * i_re[k] + v_im[k] * i_im[k];
        q[k] = v_im[k] * i_re[k] - v_re[k] * i_im[k];
    }
}

WeightedSums weighted_sums_impl(const double* w, const double* c, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d acc_w = _mm256_setzero_pd();
    __m256d acc_m = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k < n4; k += 4) {
        const __m256d wk = _mm256_loadu_pd(w + k);
        const __m256d ck = _mm256_loadu_pd(c + k);
        acc_w = _mm256_add_pd(acc_w, wk);
        acc_m = _mm256_fmadd_pd(wk, ck, acc_m);
    }
    WeightedSums s;
    s.weight_sum = hsum(acc_w);
    s.moment_sum = hsum(acc_m);
    for (; k < n; ++k) {
        s.weight_sum += w[k];
        s.moment_sum += w[k] * c[k];
    }
    return s;
}

double weighted_sqdev_impl(const double* w, const double* c, double g, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d gv = _mm256_set1_pd(g);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k < n4; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(c + k), gv);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + k), d), d, acc);
    }
    double sum = hsum(acc);
    for (; k < n; ++k) {
        const double d = c[k] - g;
        sum += w[k] * d * d;
    }
    return sum;
}

double sum_sq_dev_impl(const double* v, double ref, std::size_t n) {
    const std::size_t n4 = n & ~std::size_t{3};
    const __m256d rv = _mm256_set1_pd(ref);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k < n4; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + k), rv);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double sum = hsum(acc);
    for (; k < n; ++k) {
        const double d = v[k] - ref;
        sum += d * d;
    }
    return sum;
}

const Ops ops_impl = {
    cmatvec_impl,
    bus_power_impl,
    weighted_sums_impl,
    weighted_sqdev_impl,
    sum_sq_dev_impl,
};

} // namespace

const Ops* ops = &ops_impl;

} // namespace vrcom::kernels::avx2

#else

namespace vrcom::kernels::avx2 {
const Ops* ops = nullptr;
}

#endif
