#include "vrcom/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace vrcom {

std::string to_string(DispatchKind kind) {
    return kind == DispatchKind::Dispatch ? "dispatch" : "redispatch";
}

DispatchKind dispatch_kind_from_string(const std::string& s) {
    if (s == "dispatch") return DispatchKind::Dispatch;
    if (s == "redispatch") return DispatchKind::Redispatch;
    throw DataError("unknown dispatch kind '" + s + "' (expected dispatch|redispatch)");
}

void ControllerConfig::validate() const {
    if (!(v_min < 1.0 && 1.0 < v_max))
        throw DataError("voltage limits must satisfy v_min < 1.0 < v_max");
    if (theta_small_fraction <= 0.0 || lesser_part_fraction <= 0.0)
        throw DataError("controller thresholds must be positive");
    if (iteration_cap <= 0) throw DataError("iteration cap must be positive");
    if (weight_floor <= 0.0) throw DataError("weight floor must be positive");
    if (solver.tolerance <= 0.0 || solver.max_iterations <= 0)
        throw DataError("solver settings must be positive");
}

std::vector<Complex> BusDecomposition::injections() const {
    std::vector<Complex> s(absorbed.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = injected[k] - absorbed[k];
    return s;
}

BusDecomposition decompose(const NetworkModel& model, std::span<const Complex> scenario_load_pu,
                           const Fleet& fleet) {
    BusDecomposition d;
    d.absorbed.assign(scenario_load_pu.begin(), scenario_load_pu.end());
    d.injected.assign(model.size(), Complex{});

    // Shedding interrupts load at its power factor, so both P and Q shrink
    // proportionally. DG and storage exchange active power only.
    std::map<std::size_t, double> shed_kw;
    for (const auto& a : fleet.actors) {
        const std::size_t k = model.index_of(a.bus);
        switch (a.kind) {
        case ActorKind::DispatchableDg:
        case ActorKind::StochasticDg:
            d.injected[k] += model.kw_to_pu(a.setpoint_kw);
            break;
        case ActorKind::InterruptibleLoad:
            shed_kw[k] += a.setpoint_kw;
            break;
        case ActorKind::Storage:
            if (a.setpoint_kw >= 0.0)
                d.injected[k] += model.kw_to_pu(a.setpoint_kw);
            else
                d.absorbed[k] += model.kw_to_pu(-a.setpoint_kw);
            break;
        }
    }
    for (const auto& [k, kw] : shed_kw) {
        const double p0 = d.absorbed[k].real();
        if (p0 <= 0.0) continue;
        const double frac = std::min(1.0, model.kw_to_pu(kw) / p0);
        d.absorbed[k] *= 1.0 - frac;
    }
    return d;
}

namespace {

struct ActorView {
    std::size_t index;
    int bus_id;
    double coordinate;
    double raise_headroom_kw;
    double reduce_headroom_kw;
    bool sheds_load;
    double bus_shed_cap_kw;
};

// Remaining interruptible active load per bus, kW.
std::map<int, double> sheddable_load_kw(const NetworkModel& model,
                                        std::span<const Complex> scenario_load_pu,
                                        const Fleet& fleet) {
    std::map<int, double> left;
    for (const auto& a : fleet.actors) {
        if (a.kind != ActorKind::InterruptibleLoad) continue;
        const std::size_t k = model.index_of(a.bus);
        left.emplace(a.bus, model.pu_to_kw(scenario_load_pu[k].real()));
    }
    for (const auto& a : fleet.actors)
        if (a.kind == ActorKind::InterruptibleLoad) left[a.bus] -= a.setpoint_kw;
    for (auto& [bus, kw] : left) kw = std::max(0.0, kw);
    return left;
}

std::vector<ActorView> actor_views(const NetworkModel& model, const MainBody& body,
                                   const Fleet& fleet, std::span<const Complex> scenario_load_pu,
                                   RegulationMode mode) {
    const auto load_left = sheddable_load_kw(model, scenario_load_pu, fleet);

    std::vector<ActorView> views;
    views.reserve(fleet.actors.size());
    for (std::size_t i = 0; i < fleet.actors.size(); ++i) {
        const VppActor& a = fleet.actors[i];
        ActorView v{};
        v.index = i;
        v.bus_id = a.bus;
        v.coordinate = body.coordinate[model.index_of(a.bus)];
        v.sheds_load = a.kind == ActorKind::InterruptibleLoad;
        v.bus_shed_cap_kw = std::numeric_limits<double>::infinity();
        switch (a.kind) {
        case ActorKind::DispatchableDg:
        case ActorKind::StochasticDg:
            v.raise_headroom_kw = std::max(0.0, a.dg_limit_kw() - a.setpoint_kw);
            v.reduce_headroom_kw = a.curtailment_protected ? 0.0 : std::max(0.0, a.setpoint_kw);
            break;
        case ActorKind::InterruptibleLoad: {
            const double cap = load_left.at(a.bus);
            v.bus_shed_cap_kw = cap;
            v.raise_headroom_kw = std::max(0.0, std::min(a.rated_kw - a.setpoint_kw, cap));
            // Restoring shed load only makes sense against overvoltage.
            v.reduce_headroom_kw =
                mode == RegulationMode::Overvoltage ? std::max(0.0, a.setpoint_kw) : 0.0;
            break;
        }
        case ActorKind::Storage:
            v.raise_headroom_kw = std::max(0.0, a.storage_cap_kw() - a.setpoint_kw);
            v.reduce_headroom_kw = std::max(0.0, a.setpoint_kw + a.storage_cap_kw());
            break;
        }
        views.push_back(v);
    }
    return views;
}

struct ListGeometry {
    std::optional<CenterOfMass> window;    // candidates must fall inside it
    std::optional<CenterOfMass> anchor;    // distances are measured from here
    std::optional<CoordInterval> excluded; // overlap of the two class widths
    std::optional<CenterOfMass> gen, load; // for the between-zone demotion
};

bool strictly_between(double c, const CenterOfMass& a, const CenterOfMass& b) {
    const double lo = std::min(a.g, b.g);
    const double hi = std::max(a.g, b.g);
    return c > lo && c < hi;
}

std::optional<CoordInterval> width_overlap(const Centers& centers) {
    if (!centers.generation || !centers.load) return std::nullopt;
    const double lo = std::max(centers.generation->lo(), centers.load->lo());
    const double hi = std::min(centers.generation->hi(), centers.load->hi());
    if (lo >= hi) return std::nullopt;
    return CoordInterval{lo, hi};
}

std::vector<ListEntry> build_list(const std::vector<ActorView>& views, bool raise_direction,
                                  const ListGeometry& geo, const CoordInterval& segment,
                                  bool nearest_first, const Fleet& fleet) {
    std::vector<ListEntry> list;
    if (!geo.window || !geo.anchor) return list;

    for (const ActorView& v : views) {
        const double h = raise_direction ? v.raise_headroom_kw : v.reduce_headroom_kw;
        if (h <= 0.0) continue;
        if (!segment.contains(v.coordinate)) continue;
        if (v.coordinate < geo.window->lo() || v.coordinate > geo.window->hi()) continue;
        if (geo.excluded && geo.excluded->contains(v.coordinate)) continue;

        ListEntry e{};
        e.actor = v.index;
        e.bus = v.bus_id;
        e.headroom_kw = h;
        e.coordinate = v.coordinate;
        e.distance = std::abs(v.coordinate - geo.anchor->g);
        e.between = geo.gen && geo.load && strictly_between(v.coordinate, *geo.gen, *geo.load);
        e.sheds_load = raise_direction && v.sheds_load;
        e.bus_shed_cap_kw = v.bus_shed_cap_kw;
        list.push_back(e);
    }

    std::sort(list.begin(), list.end(), [&](const ListEntry& a, const ListEntry& b) {
        if (a.between != b.between) return !a.between; // demoted candidates last
        if (a.distance != b.distance) return nearest_first ? a.distance < b.distance
                                                           : a.distance > b.distance;
        if (a.headroom_kw != b.headroom_kw) return a.headroom_kw > b.headroom_kw;
        if (a.bus != b.bus) return a.bus < b.bus;
        return fleet.actors[a.actor].id < fleet.actors[b.actor].id;
    });
    return list;
}

} // namespace

PriorityLists populate_priority_lists(const Centers& centers, const NetworkModel& model,
                                      const MainBody& body, const Fleet& fleet,
                                      std::span<const Complex> scenario_load_pu,
                                      const CoordInterval& segment, RegulationMode mode,
                                      DispatchKind kind, const ControllerConfig& config) {
    const auto views = actor_views(model, body, fleet, scenario_load_pu, mode);
    const auto excluded = width_overlap(centers);

    // Undervoltage pulls power toward the load center: the increase list
    // works inside the net-center window, the reduction list inside the
    // generation width, distances measured from the load center. The
    // overvoltage mirror swaps the roles of the two class centers.
    const bool uv = mode == RegulationMode::Undervoltage;
    const auto& anchor = uv ? centers.load : centers.generation;
    const auto& width_provider = uv ? centers.generation : centers.load;

    const ListGeometry leading_geo{centers.net, anchor, excluded, centers.generation,
                                   centers.load};
    const ListGeometry following_geo{width_provider, anchor, excluded, centers.generation,
                                     centers.load};

    PriorityLists lists;
    if (uv) {
        lists.raise =
            build_list(views, true, leading_geo, segment, config.lsplus_nearest_first, fleet);
        lists.reduce = build_list(views, false, following_geo, segment, false, fleet);
    } else {
        lists.reduce =
            build_list(views, false, leading_geo, segment, config.lsplus_nearest_first, fleet);
        lists.raise = build_list(views, true, following_geo, segment, false, fleet);
    }
    if (kind == DispatchKind::Dispatch) {
        // A VPP dispatching from standstill has nothing scheduled to shuffle;
        // only the leading list acts.
        if (uv)
            lists.reduce.clear();
        else
            lists.raise.clear();
    }
    return lists;
}

namespace {

double allocate(const std::vector<ListEntry>& list, double target,
                std::map<int, double>& bus_shed_left, std::vector<DispatchMove>& moves,
                bool raise_direction) {
    double remaining = target;
    for (const ListEntry& e : list) {
        if (remaining <= 0.0) break;
        double take = std::min(remaining, e.headroom_kw);
        if (e.sheds_load) {
            auto [it, fresh] = bus_shed_left.emplace(e.bus, e.bus_shed_cap_kw);
            (void)fresh;
            take = std::min(take, it->second);
            if (take <= 0.0) continue;
            it->second -= take;
        }
        if (take <= 0.0) continue;
        moves.push_back({e.actor, raise_direction ? take : -take});
        remaining = remaining <= take ? 0.0 : remaining - take;
    }
    return target - remaining;
}

double capacity(const std::vector<ListEntry>& list) {
    double c = 0.0;
    std::map<int, double> bus_cap;
    for (const ListEntry& e : list) {
        if (e.sheds_load) {
            auto [it, fresh] = bus_cap.emplace(e.bus, e.bus_shed_cap_kw);
            (void)fresh;
            const double take = std::min(e.headroom_kw, it->second);
            it->second -= take;
            c += take;
        } else {
            c += e.headroom_kw;
        }
    }
    return c;
}

} // namespace

DispatchPlan apply_step(const PriorityLists& lists, double demand_kw, RegulationMode mode,
                        DispatchKind kind) {
    DispatchPlan plan;
    if (demand_kw <= 0.0) return plan;

    const bool uv = mode == RegulationMode::Undervoltage;
    const auto& leading = uv ? lists.raise : lists.reduce;
    const auto& following = uv ? lists.reduce : lists.raise;

    std::map<int, double> bus_shed_left;
    const double lead_actual = allocate(leading, demand_kw, bus_shed_left, plan.moves, uv);
    if (lead_actual <= 0.0) {
        plan.moves.clear();
        return plan;
    }

    double follow_actual = 0.0;
    if (kind == DispatchKind::Redispatch && !following.empty()) {
        follow_actual = allocate(following, lead_actual, bus_shed_left, plan.moves, !uv);
    }

    plan.raised_kw = uv ? lead_actual : follow_actual;
    plan.reduced_kw = uv ? follow_actual : lead_actual;
    plan.full_headroom = lead_actual >= demand_kw - 1e-9 &&
                         (kind == DispatchKind::Dispatch ||
                          (capacity(following) >= demand_kw - 1e-9));
    return plan;
}

void apply_plan(Fleet& fleet, const DispatchPlan& plan) {
    for (const DispatchMove& mv : plan.moves) {
        VppActor& a = fleet.actors[mv.actor];
        a.setpoint_kw += mv.delta_kw;
        switch (a.kind) {
        case ActorKind::DispatchableDg:
        case ActorKind::StochasticDg:
            a.setpoint_kw = std::clamp(a.setpoint_kw, 0.0, a.dg_limit_kw());
            break;
        case ActorKind::InterruptibleLoad:
            a.setpoint_kw = std::clamp(a.setpoint_kw, 0.0, a.rated_kw);
            break;
        case ActorKind::Storage:
            a.setpoint_kw = std::clamp(a.setpoint_kw, -a.storage_cap_kw(), a.storage_cap_kw());
            break;
        }
    }
}

namespace {

double profile_min(const VoltageSolution& sol) {
    return *std::min_element(sol.vm.begin(), sol.vm.end());
}

double profile_max(const VoltageSolution& sol) {
    return *std::max_element(sol.vm.begin(), sol.vm.end());
}

} // namespace

bool evaluate_step(const VoltageSolution& before, const VoltageSolution& after,
                   RegulationMode mode) {
    if (!after.report.converged) return false;
    const double metric_before = voltage_profile_metric(before, 1.0);
    const double metric_after = voltage_profile_metric(after, 1.0);
    if (mode == RegulationMode::Undervoltage) {
        const double mb = profile_min(before);
        const double ma = profile_min(after);
        if (ma < mb) return false; // never trade the binding voltage away
        return ma > mb || metric_after < metric_before;
    }
    const double mb = profile_max(before);
    const double ma = profile_max(after);
    if (ma > mb) return false;
    return ma < mb || metric_after < metric_before;
}

double adapt_step(double step_kw, double improvement, double remaining_deficit,
                  const ControllerConfig& config, double cap_kw) {
    if (remaining_deficit <= 0.0) return step_kw;
    if (improvement < config.theta_small_fraction * remaining_deficit)
        return std::min(2.0 * step_kw, cap_kw);
    return step_kw;
}

std::optional<CoordInterval> restrict_lesser_part(const CoordInterval& segment,
                                                  const Centers& centers, RegulationMode mode) {
    if (!centers.generation || !centers.load) return std::nullopt;
    const bool uv = mode == RegulationMode::Undervoltage;
    const CenterOfMass& primary = uv ? *centers.generation : *centers.load;
    const CenterOfMass& secondary = uv ? *centers.load : *centers.generation;

    CoordInterval narrowed = segment;
    if (primary.g > secondary.g) {
        narrowed.lo = std::max(segment.lo, secondary.lo());
    } else if (primary.g < secondary.g) {
        narrowed.hi = std::min(segment.hi, primary.hi());
    } else {
        return std::nullopt;
    }
    if (narrowed.length() >= segment.length() - 1e-15) return std::nullopt; // no progress
    return narrowed;
}

RegulationOutcome regulate(const NetworkModel& model, const MainBody& body, const Fleet& fleet,
                           std::span<const Complex> scenario_load_pu, DispatchKind kind,
                           double step0_kw, const ControllerConfig& config,
                           std::optional<RegulationMode> forced_mode) {
    config.validate();
    if (step0_kw <= 0.0) throw DataError("step must be positive");

    RegulationOutcome out;
    Fleet working = fleet;
    const double initial_vpp_kw = working.vpp_output_kw();

    auto solve_state = [&](const Fleet& f) {
        return solve(model, decompose(model, scenario_load_pu, f).injections(), config.solver);
    };

    VoltageSolution sol = solve_state(working);
    out.final_fleet = working;
    if (!sol.report.converged) {
        out.initial_converged = false;
        out.failure_reason = "initial power flow did not converge";
        return out;
    }

    out.initial_min_v = profile_min(sol);
    out.initial_metric = voltage_profile_metric(sol, 1.0);
    out.final_min_v = out.initial_min_v;
    out.final_max_v = profile_max(sol);
    out.final_metric = out.initial_metric;
    if (config.capture_profiles) out.initial_profile = sol.vm;

    const bool low = out.initial_min_v < config.v_min;
    const bool high = out.final_max_v > config.v_max;
    out.initial_violation = low || high;
    if (!out.initial_violation) {
        out.success = true;
        out.il_shed_kw = working.il_shed_kw();
        return out;
    }
    const RegulationMode mode =
        forced_mode.value_or(low ? RegulationMode::Undervoltage : RegulationMode::Overvoltage);
    out.mode = mode;
    const bool uv = mode == RegulationMode::Undervoltage;

    const double total_len = body.total_length();
    const CoordInterval full_line{0.0, total_len};
    CoordInterval segment = full_line;
    const double cap_kw =
        config.step_cap_kw > 0.0 ? config.step_cap_kw : working.total_rated_kw();

    double step = std::min(step0_kw, cap_kw > 0.0 ? cap_kw : step0_kw);
    double demanded = 0.0;
    double delivered = 0.0;
    int pass = 1;
    int iterations = 0;
    const int loop_cap = config.loop_cap > 0 ? config.loop_cap : config.iteration_cap * 8 + 32;

    auto finish_failure = [&](const std::string& reason) {
        out.success = false;
        out.failure_reason = reason;
        out.iterations = iterations;
        out.vpp_change_kw = working.vpp_output_kw() - initial_vpp_kw;
        out.il_shed_kw = working.il_shed_kw();
        out.final_fleet = working;
        return out;
    };

    // One lesser-part adjustment; below the length threshold the whole
    // procedure restarts once from the full line, then gives up.
    auto shrink_or_restart = [&](const Centers& centers) -> bool {
        const auto narrowed = restrict_lesser_part(segment, centers, mode);
        const bool trip =
            !narrowed || narrowed->length() < config.lesser_part_fraction * total_len;
        if (!trip) {
            segment = *narrowed;
            return true;
        }
        if (pass == 1) {
            pass = 2;
            segment = full_line;
            return true;
        }
        return false;
    };

    for (int loops = 0;; ++loops) {
        if (loops >= loop_cap) return finish_failure("restriction loop guard tripped");

        const auto decomposition = decompose(model, scenario_load_pu, working);
        const Centers centers =
            compute_all_centers(model, body, sol, decomposition.absorbed, decomposition.injected,
                                segment, config.weighting, config.weight_floor);

        // A net center caught strictly between the class centers means the
        // current part of the line is locally compensated.
        if (centers.net && centers.generation && centers.load &&
            strictly_between(centers.net->g, *centers.generation, *centers.load)) {
            if (!shrink_or_restart(centers))
                return finish_failure("net center locked between class centers");
            continue;
        }

        if (iterations >= config.iteration_cap)
            return finish_failure("iteration cap reached");

        const PriorityLists lists =
            populate_priority_lists(centers, model, body, working, scenario_load_pu, segment,
                                    mode, kind, config);

        const double demand = step + (demanded - delivered);
        DispatchPlan plan = apply_step(lists, demand, mode, kind);

        ++iterations;
        demanded += step;

        StepRecord rec;
        rec.iteration = iterations;
        rec.pass = pass;
        rec.step_kw = step;
        rec.demand_kw = demand;
        rec.raised_kw = plan.raised_kw;
        rec.reduced_kw = plan.reduced_kw;
        rec.full_headroom = plan.full_headroom;
        rec.segment_lo = segment.lo;
        rec.segment_hi = segment.hi;

        if (plan.empty()) {
            rec.accepted = false;
            rec.min_v = profile_min(sol);
            rec.max_v = profile_max(sol);
            rec.metric = voltage_profile_metric(sol, 1.0);
            rec.rest_after = demanded - delivered;
            out.trace.push_back(std::move(rec));
            if (!shrink_or_restart(centers))
                return finish_failure("priority lists exhausted");
            continue;
        }

        Fleet candidate = working;
        apply_plan(candidate, plan);
        VoltageSolution next = solve_state(candidate);

        const bool accepted = evaluate_step(sol, next, mode);
        rec.accepted = accepted;
        if (accepted) {
            rec.min_v = profile_min(next);
            rec.max_v = profile_max(next);
            rec.metric = voltage_profile_metric(next, 1.0);
        } else {
            rec.min_v = profile_min(sol);
            rec.max_v = profile_max(sol);
            rec.metric = voltage_profile_metric(sol, 1.0);
        }

        if (!accepted) {
            rec.rest_after = demanded - delivered;
            out.trace.push_back(std::move(rec));
            if (!shrink_or_restart(centers))
                return finish_failure("step no longer improves the profile");
            continue;
        }

        const double lead_amount = uv ? plan.raised_kw : plan.reduced_kw;
        const double before_binding = uv ? profile_min(sol) : profile_max(sol);
        working = std::move(candidate);
        sol = std::move(next);
        delivered += lead_amount;
        rec.rest_after = demanded - delivered;
        if (config.capture_profiles) rec.profile = sol.vm;
        out.trace.push_back(std::move(rec));

        const double min_v = profile_min(sol);
        const double max_v = profile_max(sol);
        out.final_min_v = min_v;
        out.final_max_v = max_v;
        out.final_metric = voltage_profile_metric(sol, 1.0);

        if (min_v >= config.v_min && max_v <= config.v_max) {
            out.success = true;
            out.iterations = iterations;
            out.vpp_change_kw = working.vpp_output_kw() - initial_vpp_kw;
            out.il_shed_kw = working.il_shed_kw();
            out.final_fleet = working;
            return out;
        }

        const double improvement =
            uv ? min_v - before_binding : before_binding - max_v;
        const double deficit = uv ? config.v_min - min_v : max_v - config.v_max;
        step = adapt_step(step, improvement, deficit, config, cap_kw);
    }
}

} // namespace vrcom
