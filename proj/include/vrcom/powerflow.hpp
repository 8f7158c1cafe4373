#pragma once

#include "vrcom/network.hpp"

#include <span>
#include <vector>

namespace vrcom {

struct ConvergenceReport {
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0; // worst |dP| or |dQ| at exit, p.u.
};

struct VoltageSolution {
    std::vector<double> vm; // magnitude, p.u., per dense bus index
    std::vector<double> va; // angle, rad
    Complex slack_injection_pu; // complex power injected at the feeder head
    ConvergenceReport report;

    Complex voltage(std::size_t k) const {
        return {vm[k] * std::cos(va[k]), vm[k] * std::sin(va[k])};
    }
};

struct SolverOptions {
    double tolerance = 1e-8; // p.u. power mismatch
    int max_iterations = 50;
};

/// Newton-Raphson AC power flow. All non-head buses are PQ; the head is the
/// slack at 1.0 p.u., zero angle. `injections_pu` is the net complex power
/// injected per dense bus index (loads negative). The head entry is ignored.
/// Non-convergence is reported, not thrown.
VoltageSolution solve(const NetworkModel& model, std::span<const Complex> injections_pu,
                      const SolverOptions& options = {});

/// Power-flow Jacobian in the standard four-block form, with the voltage
/// columns scaled as dV/V. Rows/cols run over non-slack buses in dense-index
/// order (slack skipped). Exposed for verification against finite
/// differences of the mismatch function.
struct JacobianBlocks {
    std::size_t m = 0;          // non-slack bus count
    std::vector<std::size_t> bus; // dense bus index per row
    std::vector<double> h, n, j, l; // row-major m x m

    double& at(std::vector<double>& blk, std::size_t r, std::size_t c) { return blk[r * m + c]; }
};

JacobianBlocks jacobian_blocks(const NetworkModel& model, const VoltageSolution& sol);

/// Calculated complex power injection per bus for given voltages.
std::vector<Complex> calculated_injections(const NetworkModel& model, const VoltageSolution& sol);

/// Bus with the lowest voltage magnitude (ties to the lowest bus id).
std::pair<int, double> min_voltage(const NetworkModel& model, const VoltageSolution& sol);
std::pair<int, double> max_voltage(const NetworkModel& model, const VoltageSolution& sol);

/// Sum over buses of (V_k - v_sp)^2.
double voltage_profile_metric(const VoltageSolution& sol, double v_sp);

/// Series losses computed from segment currents; non-negative on networks
/// with resistive segments.
Complex losses_pu(const NetworkModel& model, const VoltageSolution& sol);

} // namespace vrcom
