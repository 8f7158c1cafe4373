#include "vrcom/kernels.hpp"

namespace vrcom::kernels::scalar {
namespace {

void cmatvec_impl(const double* a_re, const double* a_im,
                  const double* x_re, const double* x_im,
                  double* y_re, double* y_im, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double* row_re = a_re + k * n;
        const double* row_im = a_im + k * n;
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            acc_re += row_re[m] * x_re[m] - row_im[m] * x_im[m];
            acc_im += row_re[m] * x_im[m] + row_im[m] * x_re[m];
        }
        y_re[k] = acc_re;
        y_im[k] = acc_im;
    }
}

void bus_power_impl(const double* v_re, const double* v_im,
                    const double* i_re, const double* i_im,
                    double* p, double* q, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = v_re[k] * i_re[k] + v_im[k] * i_im[k];
        q[k] = v_im[k] * i_re[k] - v_re[k] * i_im[k];
    }
}

WeightedSums weighted_sums_impl(const double* w, const double* c, std::size_t n) {
    WeightedSums s;
    for (std::size_t k = 0; k < n; ++k) {
        s.weight_sum += w[k];
        s.moment_sum += w[k] * c[k];
    }
    return s;
}

double weighted_sqdev_impl(const double* w, const double* c, double g, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = c[k] - g;
        acc += w[k] * d * d;
    }
    return acc;
}

double sum_sq_dev_impl(const double* v, double ref, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = v[k] - ref;
        acc += d * d;
    }
    return acc;
}

} // namespace

const Ops ops = {
    cmatvec_impl,
    bus_power_impl,
    weighted_sums_impl,
    weighted_sqdev_impl,
    sum_sq_dev_impl,
};

} // namespace vrcom::kernels::scalar
