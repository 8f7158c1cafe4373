#pragma once

#include "vrcom/controller.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vrcom {

/// Parameters of the scenario generator. Totals are drawn around the
/// critical loading; per-bus spreads and the initial VPP scheduling ranges
/// shape the allocation randomness.
struct ScenarioParams {
    double total_sigma_fraction = 0.025; // std dev of total load vs critical
    double multiplier_lo = 0.9;          // per-bus spread before renormalizing
    double multiplier_hi = 1.1;
    double vpp_initial_lo_kw = 400.0;    // clip range of drawn VPP scheduling
    double vpp_initial_hi_kw = 1700.0;
    double availability_lo = 0.5;        // stochastic DG forecast band
    double availability_hi = 1.0;
};

struct Scenario {
    int index = 0;
    std::uint64_t seed = 0;
    double total_load_kw = 0.0;
    std::vector<double> load_multiplier;    // per dense bus index
    std::vector<double> initial_setpoints;  // per actor, kW
    std::vector<double> availability;       // per actor

    /// Scenario loads in per-unit, per dense bus index.
    std::vector<Complex> loads_pu(const NetworkModel& model) const;
    /// The fleet with this scenario's scheduling applied.
    Fleet scheduled_fleet(const Fleet& base) const;
};

enum class OutcomeKind { Success, Failure, NoViolation, Discarded };

std::string to_string(OutcomeKind kind);
OutcomeKind outcome_kind_from_string(const std::string& s);

/// One row of the campaign record: everything the statistics need.
struct ScenarioOutcome {
    int scenario_index = 0;
    DispatchKind kind = DispatchKind::Redispatch;
    double step_kw = 0.0;
    OutcomeKind result = OutcomeKind::NoViolation;
    double initial_feeder_kw = 0.0;
    double initial_vpp_kw = 0.0;
    double vpp_change_kw = 0.0;
    double il_shed_kw = 0.0;
    int iterations = 0;
    double initial_min_v = 0.0;
    double final_min_v = 0.0;
    std::uint64_t seed = 0;
};

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
    double min = 0.0;
};

Moments moments_of(const std::vector<double>& values);

struct GroupStats {
    std::size_t count = 0;
    Moments initial_feeder_kw;
    Moments initial_vpp_kw;
    Moments vpp_change_kw;
    Moments il_shed_kw;
    Moments iterations;
};

struct CellStats {
    DispatchKind kind = DispatchKind::Redispatch;
    double step_kw = 0.0;
    std::size_t scenarios = 0;
    std::size_t no_violation = 0;
    std::size_t discarded = 0;
    double success_rate_pct = 100.0; // successes vs contested scenarios
    double zero_change_fraction = 0.0; // successes with no net VPP change
    GroupStats successes;
    GroupStats failures;
};

struct CampaignStats {
    std::vector<CellStats> cells; // ordered by (kind, step)
};

/// Uniform load scale at which the lowest bus voltage reaches v_floor.
/// Searches by bisection to |minV - v_floor| <= v_tolerance. If the power
/// flow stops converging before the floor is reached, returns the last
/// feasible scale and sets *hit_limit.
double find_critical_loading(const NetworkModel& model, double v_floor = 0.90,
                             double v_tolerance = 0.0005, const SolverOptions& solver = {},
                             bool* hit_limit = nullptr);

std::vector<Scenario> generate_scenarios(const NetworkModel& model, const Fleet& fleet,
                                         double critical_kw, int count, std::uint64_t seed,
                                         DispatchKind kind, const ScenarioParams& params = {});

struct CampaignConfig {
    std::vector<DispatchKind> kinds{DispatchKind::Dispatch, DispatchKind::Redispatch};
    std::vector<double> steps_kw{300.0, 400.0, 500.0};
    int count = 1000;
    std::uint64_t seed = 42;
    int jobs = 1;
    ScenarioParams scenario;
    ControllerConfig controller;
};

struct CampaignResult {
    double critical_kw = 0.0;
    std::vector<ScenarioOutcome> outcomes; // ordered by (kind, step, index)
    CampaignStats stats;
};

CampaignResult run_campaign(const NetworkModel& model, const MainBody& body, const Fleet& fleet,
                            const CampaignConfig& config);

/// Aggregation used both by the campaign and by the report reader, so
/// recomputing from raw records reproduces the shipped statistics exactly.
CampaignStats aggregate(const std::vector<ScenarioOutcome>& outcomes);

} // namespace vrcom
