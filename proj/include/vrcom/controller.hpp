#pragma once

#include "vrcom/com.hpp"
#include "vrcom/fleet.hpp"
#include "vrcom/powerflow.hpp"
#include "vrcom/topology.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vrcom {

enum class RegulationMode { Undervoltage, Overvoltage };
enum class DispatchKind { Dispatch, Redispatch };

std::string to_string(DispatchKind kind);
DispatchKind dispatch_kind_from_string(const std::string& s);

struct ControllerConfig {
    double v_min = 0.90;
    double v_max = 1.10;
    // An accepted step whose voltage gain is below this fraction of the
    // remaining deficit doubles the next step.
    double theta_small_fraction = 0.10;
    // A lesser part shorter than this fraction of the main-body length
    // ends the current execution pass.
    double lesser_part_fraction = 0.15;
    int iteration_cap = 100;
    int loop_cap = 0; // guard on total loop passes; 0 derives from iteration_cap
    double weight_floor = 1e-6;
    ComWeighting weighting = ComWeighting::Magnitude;
    // Increase-list ordering within the net-center window; the default
    // starts from the candidate farthest from the anchor center.
    bool lsplus_nearest_first = false;
    double step_cap_kw = 0.0; // 0 means total fleet rated power
    SolverOptions solver;
    bool capture_profiles = false;

    void validate() const;
};

/// Per-bus split of complex power into consumption and injection, after
/// applying interruptible-load shedding and VPP outputs to the scenario
/// loads. injections() = injected - absorbed is what the solver consumes.
struct BusDecomposition {
    std::vector<Complex> absorbed;
    std::vector<Complex> injected;

    std::vector<Complex> injections() const;
};

/// Scenario loads are the consumer loads per bus (positive consumption),
/// before any shedding.
BusDecomposition decompose(const NetworkModel& model, std::span<const Complex> scenario_load_pu,
                           const Fleet& fleet);

struct ListEntry {
    std::size_t actor;   // index into the fleet
    int bus;
    double headroom_kw;  // transferable power in this direction
    double coordinate;   // accumulated-|Z| position
    double distance;     // from the anchor center
    bool between;        // strictly between the load and generation centers
    bool sheds_load;     // raise direction acts by interrupting load
    double bus_shed_cap_kw; // interruptible load remaining at the bus
};

struct PriorityLists {
    std::vector<ListEntry> reduce; // output reduction / consumption increase
    std::vector<ListEntry> raise;  // output increase / load shedding
};

PriorityLists populate_priority_lists(const Centers& centers, const NetworkModel& model,
                                      const MainBody& body, const Fleet& fleet,
                                      std::span<const Complex> scenario_load_pu,
                                      const CoordInterval& segment, RegulationMode mode,
                                      DispatchKind kind, const ControllerConfig& config);

struct DispatchMove {
    std::size_t actor;
    double delta_kw; // positive raises, negative reduces
};

struct DispatchPlan {
    std::vector<DispatchMove> moves;
    double raised_kw = 0.0;
    double reduced_kw = 0.0;
    bool full_headroom = false; // both lists could carry the full demand

    bool empty() const { return moves.empty(); }
};

/// Builds the transfer for one step: the leading list (raise under
/// undervoltage, reduce under overvoltage) takes min(demand, its headroom),
/// spilling across successive actors; under re-dispatching the other list
/// mirrors as much of that amount as it can carry.
DispatchPlan apply_step(const PriorityLists& lists, double demand_kw, RegulationMode mode,
                        DispatchKind kind);

void apply_plan(Fleet& fleet, const DispatchPlan& plan);

/// Acceptance test for an executed plan: the solved post state must improve
/// the binding voltage or the profile metric, and may never push the
/// binding voltage the wrong way.
bool evaluate_step(const VoltageSolution& before, const VoltageSolution& after,
                   RegulationMode mode);

/// Step adjustment: doubles the step when the measured improvement is small
/// against the remaining deficit, up to cap_kw.
double adapt_step(double step_kw, double improvement, double remaining_deficit,
                  const ControllerConfig& config, double cap_kw);

/// One lesser-part restriction. Returns the narrowed interval, or nullopt
/// when no usable narrowing exists (missing centers, no progress).
std::optional<CoordInterval> restrict_lesser_part(const CoordInterval& segment,
                                                  const Centers& centers, RegulationMode mode);

struct StepRecord {
    int iteration = 0;     // dispatch attempt ordinal, 1-based
    int pass = 1;          // execution pass (1 or 2)
    double step_kw = 0.0;  // step size in effect
    double demand_kw = 0.0;
    double raised_kw = 0.0;
    double reduced_kw = 0.0;
    bool accepted = false;
    bool full_headroom = false;
    double min_v = 0.0;  // post-plan candidate state
    double max_v = 0.0;
    double metric = 0.0;
    double rest_after = 0.0;
    double segment_lo = 0.0;
    double segment_hi = 0.0;
    std::vector<double> profile; // captured on accepted steps when enabled
};

struct RegulationOutcome {
    bool success = false;
    bool initial_converged = true;
    bool initial_violation = false;
    RegulationMode mode = RegulationMode::Undervoltage;
    int iterations = 0;
    double vpp_change_kw = 0.0; // net DG + storage output change
    double il_shed_kw = 0.0;
    double initial_min_v = 0.0;
    double final_min_v = 0.0;
    double final_max_v = 0.0;
    double initial_metric = 0.0;
    double final_metric = 0.0;
    std::string failure_reason;
    std::vector<StepRecord> trace;
    std::vector<double> initial_profile; // when capture enabled
    Fleet final_fleet;
};

/// The complete regulation loop: solve, compute centers, populate lists,
/// step, evaluate, adapt or recurse to lesser parts, until every bus
/// voltage is inside [v_min, v_max] or the procedure exhausts its second
/// execution pass.
RegulationOutcome regulate(const NetworkModel& model, const MainBody& body, const Fleet& fleet,
                           std::span<const Complex> scenario_load_pu, DispatchKind kind,
                           double step0_kw, const ControllerConfig& config,
                           std::optional<RegulationMode> forced_mode = std::nullopt);

} // namespace vrcom
