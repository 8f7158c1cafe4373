#include "vrcom/powerflow.hpp"

#include "vrcom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vrcom {

namespace {

struct Block2 {
    // row-major 2x2
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    Block2 operator-(const Block2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Block2 mul(const Block2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    bool invert() {
        const double det = a * d - b * c;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
        const double ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
        a = ia; b = ib; c = ic; d = id;
        return true;
    }
    void apply(double x0, double x1, double& y0, double& y1) const {
        y0 = a * x0 + b * x1;
        y1 = c * x0 + d * x1;
    }
};

struct Workspace {
    std::vector<double> v_re, v_im, i_re, i_im, p, q;
    std::vector<std::size_t> parent, parent_segment, post_order;

    explicit Workspace(std::size_t n)
        : v_re(n), v_im(n), i_re(n), i_im(n), p(n), q(n),
          parent(n, n), parent_segment(n, 0) {}
};

void rectangular_voltages(const VoltageSolution& sol, Workspace& ws) {
    const std::size_t n = sol.vm.size();
    for (std::size_t k = 0; k < n; ++k) {
        ws.v_re[k] = sol.vm[k] * std::cos(sol.va[k]);
        ws.v_im[k] = sol.vm[k] * std::sin(sol.va[k]);
    }
}

void injections_from_voltages(const NetworkModel& model, Workspace& ws) {
    const auto& y = model.admittance();
    kernels::cmatvec(y.re, y.im, ws.v_re, ws.v_im, ws.i_re, ws.i_im);
    kernels::bus_power(ws.v_re, ws.v_im, ws.i_re, ws.i_im, ws.p, ws.q);
}

// Off-diagonal Jacobian blocks for a bus pair, dV/V-scaled voltage columns.
Block2 offdiag_block(const NetworkModel& model, const VoltageSolution& sol,
                     std::size_t k, std::size_t m) {
    const Complex y = model.admittance().at(k, m);
    const double g = y.real(), b = y.imag();
    const double vv = sol.vm[k] * sol.vm[m];
    const double th = sol.va[k] - sol.va[m];
    const double sn = std::sin(th), cs = std::cos(th);
    const double h = vv * (g * sn - b * cs);
    const double n = vv * (g * cs + b * sn);
    return {h, n, -n, h};
}

Block2 diag_block(const NetworkModel& model, double vk, double pk, double qk, std::size_t k) {
    const Complex y = model.admittance().at(k, k);
    const double g = y.real(), b = y.imag();
    const double v2 = vk * vk;
    return {-qk - b * v2, pk + g * v2, pk - g * v2, qk - b * v2};
}

void build_tree_order(const NetworkModel& model, Workspace& ws) {
    const std::size_t n = model.size();
    const std::size_t head = model.head();
    std::vector<std::size_t> stack{head};
    std::vector<std::size_t> pre;
    pre.reserve(n);
    ws.parent[head] = head;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        pre.push_back(u);
        for (const auto& a : model.neighbors(u)) {
            if (ws.parent[a.bus] != n) continue;
            ws.parent[a.bus] = u;
            ws.parent_segment[a.bus] = a.segment;
            stack.push_back(a.bus);
        }
    }
    // Reverse pre-order puts every child before its parent.
    ws.post_order.assign(pre.rbegin(), pre.rend());
}

} // namespace

std::vector<Complex> calculated_injections(const NetworkModel& model, const VoltageSolution& sol) {
    Workspace ws(model.size());
    rectangular_voltages(sol, ws);
    injections_from_voltages(model, ws);
    std::vector<Complex> s(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) s[k] = {ws.p[k], ws.q[k]};
    return s;
}

VoltageSolution solve(const NetworkModel& model, std::span<const Complex> injections_pu,
                      const SolverOptions& options) {
    const std::size_t n = model.size();
    const std::size_t head = model.head();

    VoltageSolution sol;
    sol.vm.assign(n, 1.0);
    sol.va.assign(n, 0.0);

    Workspace ws(n);
    build_tree_order(model, ws);

    std::vector<Block2> diag(n), upper(n), lower(n); // upper = M[p][k], lower = M[k][p]
    std::vector<double> r0(n), r1(n), x0(n), x1(n);

    bool failed = false;
    double max_mismatch = std::numeric_limits<double>::infinity();
    int iterations = 0;

    for (int it = 0; it <= options.max_iterations; ++it) {
        rectangular_voltages(sol, ws);
        injections_from_voltages(model, ws);

        max_mismatch = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == head) continue;
            r0[k] = injections_pu[k].real() - ws.p[k];
            r1[k] = injections_pu[k].imag() - ws.q[k];
            max_mismatch = std::max({max_mismatch, std::abs(r0[k]), std::abs(r1[k])});
        }
        if (!std::isfinite(max_mismatch)) {
            failed = true;
            break;
        }
        if (max_mismatch <= options.tolerance) break;
        if (it == options.max_iterations) break;

        for (std::size_t k = 0; k < n; ++k) {
            if (k == head) continue;
            diag[k] = diag_block(model, sol.vm[k], ws.p[k], ws.q[k], k);
            const std::size_t p = ws.parent[k];
            if (p != head) {
                lower[k] = offdiag_block(model, sol, k, p);
                upper[k] = offdiag_block(model, sol, p, k);
            }
        }

        // Eliminate leaf-first along the tree; a radial network gives no fill.
        for (const std::size_t k : ws.post_order) {
            if (k == head) continue;
            if (!diag[k].invert()) {
                failed = true;
                break;
            }
            const std::size_t p = ws.parent[k];
            if (p != head) {
                const Block2 u = upper[k].mul(diag[k]);
                diag[p] = diag[p] - u.mul(lower[k]);
                double y0, y1;
                u.apply(r0[k], r1[k], y0, y1);
                r0[p] -= y0;
                r1[p] -= y1;
            }
        }
        if (failed) break;

        for (auto it_bus = ws.post_order.rbegin(); it_bus != ws.post_order.rend(); ++it_bus) {
            const std::size_t k = *it_bus;
            if (k == head) continue;
            double rhs0 = r0[k], rhs1 = r1[k];
            const std::size_t p = ws.parent[k];
            if (p != head) {
                double y0, y1;
                lower[k].apply(x0[p], x1[p], y0, y1);
                rhs0 -= y0;
                rhs1 -= y1;
            }
            diag[k].apply(rhs0, rhs1, x0[k], x1[k]);
        }

        ++iterations;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == head) continue;
            sol.va[k] += x0[k];
            sol.vm[k] *= 1.0 + x1[k];
            if (!(sol.vm[k] > 0.0) || !std::isfinite(sol.vm[k]) || !std::isfinite(sol.va[k])) {
                failed = true;
            }
        }
        if (failed) break;
    }

    sol.report.iterations = iterations;
    sol.report.max_mismatch = max_mismatch;
    sol.report.converged = !failed && max_mismatch <= options.tolerance;

    if (sol.report.converged) {
        rectangular_voltages(sol, ws);
        injections_from_voltages(model, ws);
        sol.slack_injection_pu = {ws.p[head], ws.q[head]};
    }
    return sol;
}

JacobianBlocks jacobian_blocks(const NetworkModel& model, const VoltageSolution& sol) {
    const std::size_t n = model.size();
    const std::size_t head = model.head();

    Workspace ws(n);
    rectangular_voltages(sol, ws);
    injections_from_voltages(model, ws);

    JacobianBlocks jb;
    for (std::size_t k = 0; k < n; ++k)
        if (k != head) jb.bus.push_back(k);
    jb.m = jb.bus.size();
    jb.h.assign(jb.m * jb.m, 0.0);
    jb.n.assign(jb.m * jb.m, 0.0);
    jb.j.assign(jb.m * jb.m, 0.0);
    jb.l.assign(jb.m * jb.m, 0.0);

    for (std::size_t r = 0; r < jb.m; ++r) {
        for (std::size_t c = 0; c < jb.m; ++c) {
            const std::size_t k = jb.bus[r];
            const std::size_t m = jb.bus[c];
            const Block2 blk = (r == c)
                ? diag_block(model, sol.vm[k], ws.p[k], ws.q[k], k)
                : offdiag_block(model, sol, k, m);
            jb.at(jb.h, r, c) = blk.a;
            jb.at(jb.n, r, c) = blk.b;
            jb.at(jb.j, r, c) = blk.c;
            jb.at(jb.l, r, c) = blk.d;
        }
    }
    return jb;
}

std::pair<int, double> min_voltage(const NetworkModel& model, const VoltageSolution& sol) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < sol.vm.size(); ++k) {
        if (sol.vm[k] < sol.vm[best] ||
            (sol.vm[k] == sol.vm[best] && model.id_of(k) < model.id_of(best)))
            best = k;
    }
    return {model.id_of(best), sol.vm[best]};
}

std::pair<int, double> max_voltage(const NetworkModel& model, const VoltageSolution& sol) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < sol.vm.size(); ++k) {
        if (sol.vm[k] > sol.vm[best] ||
            (sol.vm[k] == sol.vm[best] && model.id_of(k) < model.id_of(best)))
            best = k;
    }
    return {model.id_of(best), sol.vm[best]};
}

double voltage_profile_metric(const VoltageSolution& sol, double v_sp) {
    return kernels::sum_sq_dev(sol.vm, v_sp);
}

Complex losses_pu(const NetworkModel& model, const VoltageSolution& sol) {
    Complex total = 0.0;
    const auto& segs = model.segments();
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const Complex va = sol.voltage(model.index_of(segs[s].from));
        const Complex vb = sol.voltage(model.index_of(segs[s].to));
        const Complex z = model.segment_impedance_pu(s);
        const Complex i = (va - vb) / z;
        total += z * std::norm(i);
    }
    return total;
}

} // namespace vrcom
