#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Arithmetic inner loops of the simulator. Every operation has a scalar
// reference implementation and (on x86-64) an AVX2+FMA variant; the active
// backend is picked once per process from CPU features, overridable with
// the VRCOM_KERNELS environment variable ("scalar" or "avx2").
//
// Both variants are exported so equivalence tests can compare them on the
// same inputs. SIMD reductions reassociate sums, so agreement is to a tight
// relative tolerance, not bit-exact.

namespace vrcom::kernels {

struct WeightedSums {
    double weight_sum = 0.0; // sum of w_k
    double moment_sum = 0.0; // sum of w_k * c_k
};

struct Ops {
    // y = A * x for a dense complex matrix stored as split re/im planes,
    // row-major n x n.
    void (*cmatvec)(const double* a_re, const double* a_im,
                    const double* x_re, const double* x_im,
                    double* y_re, double* y_im, std::size_t n);
    // p_k + j q_k = v_k * conj(i_k), elementwise over rectangular coords.
    void (*bus_power)(const double* v_re, const double* v_im,
                      const double* i_re, const double* i_im,
                      double* p, double* q, std::size_t n);
    // {sum w, sum w*c}
    WeightedSums (*weighted_sums)(const double* w, const double* c, std::size_t n);
    // sum w_k * (c_k - g)^2
    double (*weighted_sqdev)(const double* w, const double* c, double g, std::size_t n);
    // sum (v_k - ref)^2
    double (*sum_sq_dev)(const double* v, double ref, std::size_t n);
};

namespace scalar {
extern const Ops ops;
}

namespace avx2 {
// Null on platforms where the AVX2 translation unit is not built; check
// available() before dereferencing.
extern const Ops* ops;
bool available();
}

/// Backend selected for this process.
const Ops& active();
std::string_view active_name();

// Convenience wrappers over the active backend.

inline void cmatvec(std::span<const double> a_re, std::span<const double> a_im,
                    std::span<const double> x_re, std::span<const double> x_im,
                    std::span<double> y_re, std::span<double> y_im) {
    active().cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(),
                     y_re.data(), y_im.data(), x_re.size());
}

inline void bus_power(std::span<const double> v_re, std::span<const double> v_im,
                      std::span<const double> i_re, std::span<const double> i_im,
                      std::span<double> p, std::span<double> q) {
    active().bus_power(v_re.data(), v_im.data(), i_re.data(), i_im.data(),
                       p.data(), q.data(), v_re.size());
}

inline WeightedSums weighted_sums(std::span<const double> w, std::span<const double> c) {
    return active().weighted_sums(w.data(), c.data(), w.size());
}

inline double weighted_sqdev(std::span<const double> w, std::span<const double> c, double g) {
    return active().weighted_sqdev(w.data(), c.data(), g, w.size());
}

inline double sum_sq_dev(std::span<const double> v, double ref) {
    return active().sum_sq_dev(v.data(), ref, v.size());
}

} // namespace vrcom::kernels
