#include "vrcom/common.hpp"
#include "vrcom/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace vrcom;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

bool close_rel(double a, double b, double tol, double scale) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b), scale});
}

} // namespace

TEST_CASE("scalar and avx2 backends agree on all operations") {
    if (!kernels::avx2::available()) {
        MESSAGE("avx2 backend not available on this machine; skipping equivalence");
        return;
    }
    const kernels::Ops& s = kernels::scalar::ops;
    const kernels::Ops& v = *kernels::avx2::ops;

    std::mt19937_64 rng(7);
    // Sizes straddle the 4-lane width to exercise every tail length.
    for (const std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 100, 233}) {
        const auto a_re = random_vec(rng, n * n);
        const auto a_im = random_vec(rng, n * n);
        const auto x_re = random_vec(rng, n);
        const auto x_im = random_vec(rng, n);

        std::vector<double> ys_re(n), ys_im(n), yv_re(n), yv_im(n);
        s.cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(), ys_re.data(),
                  ys_im.data(), n);
        v.cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(), yv_re.data(),
                  yv_im.data(), n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(close_rel(ys_re[k], yv_re[k], 1e-12, static_cast<double>(n)));
            CHECK(close_rel(ys_im[k], yv_im[k], 1e-12, static_cast<double>(n)));
        }

        std::vector<double> ps(n), qs(n), pv(n), qv(n);
        s.bus_power(x_re.data(), x_im.data(), ys_re.data(), ys_im.data(), ps.data(), qs.data(),
                    n);
        v.bus_power(x_re.data(), x_im.data(), ys_re.data(), ys_im.data(), pv.data(), qv.data(),
                    n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(close_rel(ps[k], pv[k], 1e-13, 1.0));
            CHECK(close_rel(qs[k], qv[k], 1e-13, 1.0));
        }

        const auto w = random_vec(rng, n, 0.0, 3.0);
        const auto c = random_vec(rng, n, 0.0, 5.0);
        const auto ws = s.weighted_sums(w.data(), c.data(), n);
        const auto wv = v.weighted_sums(w.data(), c.data(), n);
        CHECK(close_rel(ws.weight_sum, wv.weight_sum, 1e-12, 1.0));
        CHECK(close_rel(ws.moment_sum, wv.moment_sum, 1e-12, 1.0));

        CHECK(close_rel(s.weighted_sqdev(w.data(), c.data(), 1.3, n),
                        v.weighted_sqdev(w.data(), c.data(), 1.3, n), 1e-12, 1.0));
        CHECK(close_rel(s.sum_sq_dev(c.data(), 1.0, n), v.sum_sq_dev(c.data(), 1.0, n), 1e-12,
                        1.0));
    }
}

TEST_CASE("kernel results are deterministic across calls") {
    const kernels::Ops& ops = kernels::active();
    std::mt19937_64 rng(11);
    const std::size_t n = 37;
    const auto a_re = random_vec(rng, n * n);
    const auto a_im = random_vec(rng, n * n);
    const auto x_re = random_vec(rng, n);
    const auto x_im = random_vec(rng, n);

    std::vector<double> y1_re(n), y1_im(n), y2_re(n), y2_im(n);
    ops.cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(), y1_re.data(), y1_im.data(),
                n);
    ops.cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(), y2_re.data(), y2_im.data(),
                n);
    CHECK(y1_re == y2_re);
    CHECK(y1_im == y2_im);
}

TEST_CASE("cmatvec matches a plain complex computation") {
    const kernels::Ops& ops = kernels::active();
    std::mt19937_64 rng(3);
    const std::size_t n = 19;
    const auto a_re = random_vec(rng, n * n);
    const auto a_im = random_vec(rng, n * n);
    const auto x_re = random_vec(rng, n);
    const auto x_im = random_vec(rng, n);

    std::vector<double> y_re(n), y_im(n);
    ops.cmatvec(a_re.data(), a_im.data(), x_re.data(), x_im.data(), y_re.data(), y_im.data(), n);

    for (std::size_t k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (std::size_t m = 0; m < n; ++m)
            acc += Complex(a_re[k * n + m], a_im[k * n + m]) * Complex(x_re[m], x_im[m]);
        CHECK(close_rel(acc.real(), y_re[k], 1e-12, static_cast<double>(n)));
        CHECK(close_rel(acc.imag(), y_im[k], 1e-12, static_cast<double>(n)));
    }
}

TEST_CASE("active backend reports a known name") {
    const auto name = kernels::active_name();
    CHECK((name == "scalar" || name == "avx2"));
}
