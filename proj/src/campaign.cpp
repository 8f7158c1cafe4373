#include "vrcom/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace vrcom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t scenario_seed(std::uint64_t master, DispatchKind kind, int index) {
    const std::uint64_t tag = kind == DispatchKind::Dispatch ? 0x01ULL : 0x02ULL;
    return splitmix64(master ^ (tag << 56) ^ static_cast<std::uint64_t>(index));
}

} // namespace

std::vector<Complex> Scenario::loads_pu(const NetworkModel& model) const {
    const auto& base = model.base_load_pu();
    std::vector<Complex> loads(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) loads[k] = base[k] * load_multiplier[k];
    return loads;
}

Fleet Scenario::scheduled_fleet(const Fleet& base) const {
    Fleet fleet = base;
    for (std::size_t i = 0; i < fleet.actors.size(); ++i) {
        fleet.actors[i].availability = availability[i];
        fleet.actors[i].setpoint_kw = initial_setpoints[i];
    }
    return fleet;
}

std::string to_string(OutcomeKind kind) {
    switch (kind) {
    case OutcomeKind::Success: return "success";
    case OutcomeKind::Failure: return "failure";
    case OutcomeKind::NoViolation: return "no-violation";
    case OutcomeKind::Discarded: return "discarded";
    }
    return "discarded";
}

OutcomeKind outcome_kind_from_string(const std::string& s) {
    if (s == "success") return OutcomeKind::Success;
    if (s == "failure") return OutcomeKind::Failure;
    if (s == "no-violation") return OutcomeKind::NoViolation;
    if (s == "discarded") return OutcomeKind::Discarded;
    throw DataError("unknown outcome kind '" + s + "'");
}

Moments moments_of(const std::vector<double>& values) {
    Moments m;
    m.count = values.size();
    if (values.empty()) return m;
    double sum = 0.0;
    m.max = values.front();
    m.min = values.front();
    for (const double v : values) {
        sum += v;
        m.max = std::max(m.max, v);
        m.min = std::min(m.min, v);
    }
    m.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return m;
}

double find_critical_loading(const NetworkModel& model, double v_floor, double v_tolerance,
                             const SolverOptions& solver, bool* hit_limit) {
    if (hit_limit) *hit_limit = false;
    const auto& base = model.base_load_pu();

    auto min_v_at = [&](double scale) -> std::pair<bool, double> {
        std::vector<Complex> inj(base.size());
        for (std::size_t k = 0; k < base.size(); ++k) inj[k] = -base[k] * scale;
        const VoltageSolution sol = solve(model, inj, solver);
        if (!sol.report.converged) return {false, 0.0};
        return {true, *std::min_element(sol.vm.begin(), sol.vm.end())};
    };

    double lo = 0.0; // converged with minV above the floor
    double hi = 1.0;
    for (int grow = 0; grow < 64; ++grow) {
        const auto [ok, v] = min_v_at(hi);
        if (ok && std::abs(v - v_floor) <= v_tolerance) return hi;
        if (!ok || v < v_floor) break;
        lo = hi;
        hi *= 2.0;
        if (grow == 63) throw RuntimeError("loading never pulls any voltage to the floor");
    }

    // Bisect; non-convergent midpoints tighten from above like low-voltage
    // ones, so the search also finds the feasibility edge when the solver
    // gives out before the floor is reached.
    bool edge_is_divergence = false;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto [ok, v] = min_v_at(mid);
        if (ok && std::abs(v - v_floor) <= v_tolerance) return mid;
        if (ok && v > v_floor) {
            lo = mid;
        } else {
            hi = mid;
            edge_is_divergence = !ok;
        }
        if (hi - lo < 1e-12) break;
    }
    if (edge_is_divergence && hit_limit) *hit_limit = true;
    return lo;
}

std::vector<Scenario> generate_scenarios(const NetworkModel& model, const Fleet& fleet,
                                         double critical_kw, int count, std::uint64_t seed,
                                         DispatchKind kind, const ScenarioParams& params) {
    if (count < 1) throw DataError("scenario count must be at least 1");
    const std::size_t n = model.size();
    std::vector<Scenario> scenarios;
    scenarios.reserve(static_cast<std::size_t>(count));

    for (int i = 0; i < count; ++i) {
        Scenario sc;
        sc.index = i;
        sc.seed = scenario_seed(seed, kind, i);
        std::mt19937_64 rng(sc.seed);

        std::normal_distribution<double> total_dist(critical_kw,
                                                    params.total_sigma_fraction * critical_kw);
        sc.total_load_kw = std::max(0.0, total_dist(rng));

        std::uniform_real_distribution<double> mult_dist(params.multiplier_lo,
                                                         params.multiplier_hi);
        sc.load_multiplier.resize(n);
        double raw_total_kw = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sc.load_multiplier[k] = mult_dist(rng);
            raw_total_kw += model.buses()[k].p_kw * sc.load_multiplier[k];
        }
        const double alpha = raw_total_kw > 0.0 ? sc.total_load_kw / raw_total_kw : 0.0;
        for (std::size_t k = 0; k < n; ++k) sc.load_multiplier[k] *= alpha;

        sc.availability.resize(fleet.actors.size(), 1.0);
        std::uniform_real_distribution<double> avail_dist(params.availability_lo,
                                                          params.availability_hi);
        for (std::size_t a = 0; a < fleet.actors.size(); ++a) {
            if (fleet.actors[a].kind == ActorKind::StochasticDg)
                sc.availability[a] = avail_dist(rng);
        }

        sc.initial_setpoints.assign(fleet.actors.size(), 0.0);
        if (kind == DispatchKind::Redispatch) {
            double total = 0.0;
            for (std::size_t a = 0; a < fleet.actors.size(); ++a) {
                const VppActor& actor = fleet.actors[a];
                if (!actor.is_dg()) continue;
                std::uniform_real_distribution<double> sp_dist(
                    0.0, sc.availability[a] * actor.rated_kw);
                sc.initial_setpoints[a] = sp_dist(rng);
                total += sc.initial_setpoints[a];
            }
            if (total > 0.0) {
                const double clipped =
                    std::clamp(total, params.vpp_initial_lo_kw, params.vpp_initial_hi_kw);
                const double f = clipped / total;
                for (std::size_t a = 0; a < fleet.actors.size(); ++a) {
                    if (!fleet.actors[a].is_dg()) continue;
                    sc.initial_setpoints[a] =
                        std::min(f * sc.initial_setpoints[a],
                                 sc.availability[a] * fleet.actors[a].rated_kw);
                }
            }
        }
        scenarios.push_back(std::move(sc));
    }
    return scenarios;
}

CampaignStats aggregate(const std::vector<ScenarioOutcome>& outcomes) {
    // Group rows by (kind, step) in first-appearance order.
    std::vector<std::pair<DispatchKind, double>> keys;
    for (const auto& o : outcomes) {
        const std::pair<DispatchKind, double> key{o.kind, o.step_kw};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }

    CampaignStats stats;
    for (const auto& [kind, step] : keys) {
        CellStats cell;
        cell.kind = kind;
        cell.step_kw = step;

        std::vector<const ScenarioOutcome*> successes, failures;
        for (const auto& o : outcomes) {
            if (o.kind != kind || o.step_kw != step) continue;
            ++cell.scenarios;
            switch (o.result) {
            case OutcomeKind::NoViolation: ++cell.no_violation; break;
            case OutcomeKind::Discarded: ++cell.discarded; break;
            case OutcomeKind::Success: successes.push_back(&o); break;
            case OutcomeKind::Failure: failures.push_back(&o); break;
            }
        }

        const std::size_t contested = successes.size() + failures.size();
        cell.success_rate_pct =
            contested == 0 ? 100.0
                           : 100.0 * static_cast<double>(successes.size()) /
                                 static_cast<double>(contested);

        auto fill = [](const std::vector<const ScenarioOutcome*>& rows) {
            GroupStats g;
            g.count = rows.size();
            std::vector<double> feeder, vpp0, change, shed, iters;
            for (const auto* o : rows) {
                feeder.push_back(o->initial_feeder_kw);
                vpp0.push_back(o->initial_vpp_kw);
                change.push_back(o->vpp_change_kw);
                shed.push_back(o->il_shed_kw);
                iters.push_back(static_cast<double>(o->iterations));
            }
            g.initial_feeder_kw = moments_of(feeder);
            g.initial_vpp_kw = moments_of(vpp0);
            g.vpp_change_kw = moments_of(change);
            g.il_shed_kw = moments_of(shed);
            g.iterations = moments_of(iters);
            return g;
        };
        cell.successes = fill(successes);
        cell.failures = fill(failures);

        std::size_t zero_change = 0;
        for (const auto* o : successes)
            if (std::abs(o->vpp_change_kw) < 1e-6) ++zero_change;
        cell.zero_change_fraction =
            successes.empty() ? 0.0
                              : static_cast<double>(zero_change) /
                                    static_cast<double>(successes.size());

        stats.cells.push_back(std::move(cell));
    }
    return stats;
}

CampaignResult run_campaign(const NetworkModel& model, const MainBody& body, const Fleet& fleet,
                            const CampaignConfig& config) {
    config.controller.validate();

    CampaignResult result;
    bool hit_limit = false;
    const double critical_scale = find_critical_loading(
        model, config.controller.v_min, 0.0005, config.controller.solver, &hit_limit);
    result.critical_kw = critical_scale * model.total_load_kw();

    struct Task {
        DispatchKind kind;
        double step_kw;
        const Scenario* scenario;
    };

    std::map<DispatchKind, std::vector<Scenario>> scenarios;
    for (const DispatchKind kind : config.kinds)
        scenarios[kind] = generate_scenarios(model, fleet, result.critical_kw, config.count,
                                             config.seed, kind, config.scenario);

    std::vector<Task> tasks;
    for (const DispatchKind kind : config.kinds)
        for (const double step : config.steps_kw)
            for (const Scenario& sc : scenarios[kind]) tasks.push_back({kind, step, &sc});

    result.outcomes.resize(tasks.size());

    auto run_one = [&](const Task& task) {
        const Scenario& sc = *task.scenario;
        const std::vector<Complex> loads = sc.loads_pu(model);
        const Fleet scheduled = sc.scheduled_fleet(fleet);

        ScenarioOutcome row;
        row.scenario_index = sc.index;
        row.kind = task.kind;
        row.step_kw = task.step_kw;
        row.seed = sc.seed;
        row.initial_feeder_kw = sc.total_load_kw;
        row.initial_vpp_kw = scheduled.vpp_output_kw();

        const RegulationOutcome reg = regulate(model, body, scheduled, loads, task.kind,
                                               task.step_kw, config.controller);
        if (!reg.initial_converged)
            row.result = OutcomeKind::Discarded;
        else if (!reg.initial_violation)
            row.result = OutcomeKind::NoViolation;
        else
            row.result = reg.success ? OutcomeKind::Success : OutcomeKind::Failure;
        row.vpp_change_kw = reg.vpp_change_kw;
        row.il_shed_kw = reg.il_shed_kw;
        row.iterations = reg.iterations;
        row.initial_min_v = reg.initial_min_v;
        row.final_min_v = reg.final_min_v;
        return row;
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) result.outcomes[t] = run_one(tasks[t]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < tasks.size();
                     t = next.fetch_add(1))
                    result.outcomes[t] = run_one(tasks[t]);
            });
        }
        for (auto& th : workers) th.join();
    }

    result.stats = aggregate(result.outcomes);
    return result;
}

} // namespace vrcom
