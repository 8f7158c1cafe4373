#include "vrcom/com.hpp"

#include "vrcom/kernels.hpp"

#include <cmath>

namespace vrcom {

Complex estimate_bus_current(Complex v_prev, Complex v_k, Complex v_next,
                             Complex z_prev, Complex z_next) {
    if (std::abs(z_prev) == 0.0 || std::abs(z_next) == 0.0)
        throw DataError("zero segment impedance in current estimation");
    return (v_k - v_prev) / z_prev - (v_next - v_k) / z_next;
}

std::vector<BusCurrent> estimate_chain_currents(const NetworkModel& model, const MainBody& body,
                                                const VoltageSolution& sol) {
    std::vector<BusCurrent> out;
    const auto& chain = body.chain;
    out.reserve(chain.size());

    auto chain_impedance = [&](std::size_t pos) {
        // Impedance of the segment joining chain position pos-1 and pos.
        const std::size_t a = chain[pos - 1];
        const std::size_t b = chain[pos];
        for (const auto& adj : model.neighbors(b))
            if (adj.bus == a) return model.segment_impedance_pu(adj.segment);
        throw DataError("main body chain is not contiguous");
    };

    for (std::size_t pos = 1; pos < chain.size(); ++pos) {
        const std::size_t k = chain[pos];
        const Complex v_prev = sol.voltage(chain[pos - 1]);
        const Complex v_k = sol.voltage(k);
        const Complex z_prev = chain_impedance(pos);

        Complex current;
        if (pos + 1 < chain.size()) {
            current = estimate_bus_current(v_prev, v_k, sol.voltage(chain[pos + 1]),
                                           z_prev, chain_impedance(pos + 1));
        } else {
            current = (v_k - v_prev) / z_prev;
        }

        BusCurrent bc;
        bc.bus_id = model.id_of(k);
        bc.current = current;
        const double p = (v_k * std::conj(current)).real();
        bc.cls = p > 0.0 ? CurrentClass::Injected
                         : (p < 0.0 ? CurrentClass::Absorbed : CurrentClass::Net);
        out.push_back(bc);
    }
    return out;
}

std::optional<CenterOfMass> compute_center(std::span<const double> weights,
                                           std::span<const double> coords) {
    if (weights.size() != coords.size())
        throw DataError("weights/coordinates size mismatch");
    for (const double w : weights)
        if (w < 0.0) throw DataError("negative mass weight");

    const auto sums = kernels::weighted_sums(weights, coords);
    if (sums.weight_sum <= 0.0) return std::nullopt;

    CenterOfMass com;
    com.total_weight = sums.weight_sum;
    com.g = sums.moment_sum / sums.weight_sum;
    const double var = kernels::weighted_sqdev(weights, coords, com.g) / sums.weight_sum;
    com.delta_g = var > 0.0 ? std::sqrt(var) : 0.0;
    return com;
}

std::optional<CenterOfMass> compute_center_signed(std::span<const double> weights,
                                                  std::span<const double> coords,
                                                  double total_floor) {
    if (weights.size() != coords.size())
        throw DataError("weights/coordinates size mismatch");
    const auto sums = kernels::weighted_sums(weights, coords);
    if (std::abs(sums.weight_sum) < total_floor) return std::nullopt;

    CenterOfMass com;
    com.total_weight = sums.weight_sum;
    com.g = sums.moment_sum / sums.weight_sum;

    // The spread uses magnitude weights: the signed estimator can turn
    // negative once injection masses far from the mean grow, which would
    // collapse the dispatch window for no physical reason. With masses of
    // one sign this is the plain weighted estimator.
    std::vector<double> mags(weights.begin(), weights.end());
    for (double& w : mags) w = std::abs(w);
    const auto mag_sums = kernels::weighted_sums(mags, coords);
    if (mag_sums.weight_sum > 0.0) {
        const double var =
            kernels::weighted_sqdev(mags, coords, com.g) / mag_sums.weight_sum;
        com.delta_g = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return com;
}

Centers compute_all_centers(const NetworkModel& model, const MainBody& body,
                            const VoltageSolution& sol,
                            std::span<const Complex> load_pu,
                            std::span<const Complex> generation_pu,
                            const CoordInterval& window,
                            ComWeighting weighting, double weight_floor) {
    const std::size_t n = model.size();
    std::vector<double> wl, cl, wg, cg, wn, cn;

    auto weight_of = [&](Complex current) {
        return weighting == ComWeighting::Magnitude ? std::abs(current)
                                                    : std::abs(current.real());
    };

    for (std::size_t k = 0; k < n; ++k) {
        if (k == model.head()) continue;
        const double coord = body.coordinate[k];
        if (!window.contains(coord)) continue;

        const Complex v = sol.voltage(k);
        // I = conj(S/V) for each component; the net is their signed sum.
        const Complex i_abs = std::conj(load_pu[k] / v);
        const Complex i_inj = std::conj(generation_pu[k] / v);

        const double w_abs = weight_of(i_abs);
        const double w_inj = weight_of(i_inj);
        const double w_net = w_abs - w_inj; // signed: consumption positive

        if (w_abs >= weight_floor) {
            wl.push_back(w_abs);
            cl.push_back(coord);
        }
        if (w_inj >= weight_floor) {
            wg.push_back(w_inj);
            cg.push_back(coord);
        }
        if (std::abs(w_net) >= weight_floor) {
            wn.push_back(w_net);
            cn.push_back(coord);
        }
    }

    Centers centers;
    centers.load = compute_center(wl, cl);
    centers.generation = compute_center(wg, cg);
    centers.net = compute_center_signed(wn, cn, weight_floor);
    return centers;
}

} // namespace vrcom
