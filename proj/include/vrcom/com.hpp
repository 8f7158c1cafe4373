#pragma once

#include "vrcom/powerflow.hpp"
#include "vrcom/topology.hpp"

#include <optional>
#include <span>
#include <vector>

namespace vrcom {

enum class CurrentClass { Absorbed, Injected, Net };

struct BusCurrent {
    int bus_id = 0;
    Complex current;
    CurrentClass cls = CurrentClass::Net;
};

/// Weighted mean position of a set of current "masses" on the accumulated
/// impedance axis, with its weighted standard deviation as half-width.
struct CenterOfMass {
    double g = 0.0;
    double delta_g = 0.0;
    double total_weight = 0.0;

    double lo() const { return g - delta_g; }
    double hi() const { return g + delta_g; }
};

enum class ComWeighting { Magnitude, RealPart };

struct Centers {
    std::optional<CenterOfMass> generation; // g_G
    std::optional<CenterOfMass> load;       // g_L
    std::optional<CenterOfMass> net;        // g_GL
};

/// Coordinate window a computation is restricted to.
struct CoordInterval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double c) const { return c >= lo && c <= hi; }
};

/// Net current at a bus from the voltages of its two line neighbors:
/// (V_k - V_prev)/Z_prev - (V_next - V_k)/Z_next. This equals the nodal
/// current injected at the bus, so it recovers load/generation from
/// voltage readings alone. Throws DataError on zero impedance.
Complex estimate_bus_current(Complex v_prev, Complex v_k, Complex v_next,
                             Complex z_prev, Complex z_next);

/// Net injected current for every non-head main-body bus, estimated from
/// chain voltages only (terminus uses the one-sided difference). Branch
/// flows are inherently aggregated onto their coupling bus. Currents are
/// classified absorbed/injected by the sign of the active power they carry.
std::vector<BusCurrent> estimate_chain_currents(const NetworkModel& model, const MainBody& body,
                                                const VoltageSolution& sol);

/// g = sum(w*c)/sum(w), delta_g = sqrt(sum(w*(c-g)^2)/sum(w)).
/// Returns nullopt when the total weight is zero (no center exists).
/// Throws DataError on negative weights.
std::optional<CenterOfMass> compute_center(std::span<const double> weights,
                                           std::span<const double> coords);

/// Center of signed masses (consumption positive, injection negative). The
/// mean can fall outside the hull of the coordinates; a negative variance
/// ratio clamps the width to zero. Returns nullopt when the masses cancel.
std::optional<CenterOfMass> compute_center_signed(std::span<const double> weights,
                                                  std::span<const double> coords,
                                                  double total_floor = 1e-9);

/// The three centers over the buses whose coordinate falls inside `window`:
/// load masses from per-bus absorbed currents, generation masses from
/// per-bus injected currents. The net center weighs each bus with the
/// signed difference of the two (consumption positive), so partially
/// compensated feeders place it beyond the load center, away from the
/// generation side. Weights below `weight_floor` are dropped as noise.
Centers compute_all_centers(const NetworkModel& model, const MainBody& body,
                            const VoltageSolution& sol,
                            std::span<const Complex> load_pu,
                            std::span<const Complex> generation_pu,
                            const CoordInterval& window,
                            ComWeighting weighting = ComWeighting::Magnitude,
                            double weight_floor = 1e-6);

} // namespace vrcom
