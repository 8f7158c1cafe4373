#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

using namespace vrcom;

namespace oracles {

NetworkModel random_radial_network(std::mt19937_64& rng, int min_buses, int max_buses,
                                   bool with_loads) {
    std::uniform_int_distribution<int> n_dist(min_buses, max_buses);
    const int n = n_dist(rng);

    std::uniform_real_distribution<double> r_dist(0.005, 0.04);
    std::uniform_real_distribution<double> x_dist(0.005, 0.04);
    std::uniform_real_distribution<double> p_dist(0.0, 25.0);
    std::uniform_real_distribution<double> pf_dist(0.9, 1.0);

    std::vector<Bus> buses;
    std::vector<Segment> segments;
    for (int i = 0; i < n; ++i) {
        Bus b;
        b.id = 100 + i;
        if (i == 0) {
            b.kind = BusKind::FeederHead;
        } else if (with_loads) {
            b.kind = BusKind::Load;
            b.p_kw = p_dist(rng);
            const double pf = pf_dist(rng);
            b.q_kvar = b.p_kw * std::sqrt(1.0 - pf * pf) / pf;
        } else {
            b.kind = BusKind::Pole;
        }
        buses.push_back(b);
        if (i > 0) {
            std::uniform_int_distribution<int> parent_dist(0, i - 1);
            Segment s;
            s.from = 100 + parent_dist(rng);
            s.to = 100 + i;
            s.impedance_ohm = Complex(r_dist(rng), x_dist(rng));
            segments.push_back(s);
        }
    }
    // 1 kV / 1 MVA makes ohms equal per-unit values.
    return NetworkModel(std::move(buses), std::move(segments), {}, BaseValues{1.0, 1.0});
}

std::vector<Complex> random_injections(const NetworkModel& model, std::mt19937_64& rng,
                                       double max_load_pu) {
    std::uniform_real_distribution<double> p_dist(0.0, max_load_pu);
    std::uniform_real_distribution<double> q_dist(0.0, max_load_pu / 3.0);
    std::vector<Complex> inj(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == model.head()) continue;
        inj[k] = Complex(-p_dist(rng), -q_dist(rng));
    }
    return inj;
}

SweepResult sweep_solve(const NetworkModel& model, std::span<const Complex> injections_pu,
                        double tol, int max_iter) {
    const std::size_t n = model.size();
    const std::size_t head = model.head();

    std::vector<std::size_t> parent(n, n), parent_seg(n, 0), order;
    order.reserve(n);
    std::vector<std::size_t> stack{head};
    parent[head] = head;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (const auto& a : model.neighbors(u)) {
            if (parent[a.bus] != n) continue;
            parent[a.bus] = u;
            parent_seg[a.bus] = a.segment;
            stack.push_back(a.bus);
        }
    }

    SweepResult res;
    res.v.assign(n, Complex{1.0, 0.0});
    std::vector<Complex> branch_current(n);

    for (int it = 0; it < max_iter; ++it) {
        // Backward: accumulate absorbed currents toward the head.
        for (std::size_t k = 0; k < n; ++k)
            branch_current[k] = k == head ? Complex{} : -std::conj(injections_pu[k] / res.v[k]);
        for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
            const std::size_t u = *rit;
            if (u == head) continue;
            branch_current[parent[u]] += branch_current[u];
        }
        // Forward: propagate voltage drops from the head.
        double max_dv = 0.0;
        for (const std::size_t u : order) {
            if (u == head) continue;
            const Complex v_new =
                res.v[parent[u]] -
                model.segment_impedance_pu(parent_seg[u]) * branch_current[u];
            max_dv = std::max(max_dv, std::abs(v_new - res.v[u]));
            res.v[u] = v_new;
        }
        if (max_dv < tol) {
            res.converged = true;
            return res;
        }
        if (!std::isfinite(max_dv)) return res;
    }
    return res;
}

std::optional<double> two_bus_voltage(Complex z_pu, Complex s_load_pu) {
    const double p = s_load_pu.real(), q = s_load_pu.imag();
    const double r = z_pu.real(), x = z_pu.imag();
    const double b = 2.0 * (p * r + q * x) - 1.0;
    const double c = std::norm(z_pu) * std::norm(s_load_pu);
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) return std::nullopt;
    const double u = (-b + std::sqrt(disc)) / 2.0;
    if (u <= 0.0) return std::nullopt;
    return std::sqrt(u);
}

std::vector<PathInfo> enumerate_paths(const NetworkModel& model) {
    std::vector<PathInfo> out;
    std::vector<std::size_t> path{model.head()};
    std::vector<char> visited(model.size(), 0);
    visited[model.head()] = 1;

    // Plain recursive walk accumulating the coordinate in path order.
    auto walk = [&](auto&& self, std::size_t u, double acc) -> void {
        bool leaf = true;
        for (const auto& a : model.neighbors(u)) {
            if (visited[a.bus]) continue;
            leaf = false;
            visited[a.bus] = 1;
            path.push_back(a.bus);
            self(self, a.bus, acc + std::abs(model.segment_impedance_pu(a.segment)));
            path.pop_back();
            visited[a.bus] = 0;
        }
        if (leaf) out.push_back({acc, model.id_of(u), path});
    };
    walk(walk, model.head(), 0.0);
    return out;
}

PathInfo best_path(const NetworkModel& model) {
    const auto paths = enumerate_paths(model);
    const PathInfo* best = &paths.front();
    for (const auto& p : paths) {
        if (p.weight > best->weight ||
            (p.weight == best->weight && p.leaf_id < best->leaf_id))
            best = &p;
    }
    return *best;
}

FdJacobian fd_jacobian(const NetworkModel& model, const VoltageSolution& sol, double eps) {
    std::vector<std::size_t> bus;
    for (std::size_t k = 0; k < model.size(); ++k)
        if (k != model.head()) bus.push_back(k);

    FdJacobian fd;
    fd.m = bus.size();
    fd.h.assign(fd.m * fd.m, 0.0);
    fd.n.assign(fd.m * fd.m, 0.0);
    fd.j.assign(fd.m * fd.m, 0.0);
    fd.l.assign(fd.m * fd.m, 0.0);

    auto injections_at = [&](const VoltageSolution& s) { return calculated_injections(model, s); };

    for (std::size_t c = 0; c < fd.m; ++c) {
        const std::size_t m = bus[c];

        VoltageSolution plus = sol, minus = sol;
        plus.va[m] += eps;
        minus.va[m] -= eps;
        const auto sp = injections_at(plus);
        const auto sm = injections_at(minus);
        for (std::size_t r = 0; r < fd.m; ++r) {
            const std::size_t k = bus[r];
            fd.h[r * fd.m + c] = (sp[k].real() - sm[k].real()) / (2.0 * eps);
            fd.j[r * fd.m + c] = (sp[k].imag() - sm[k].imag()) / (2.0 * eps);
        }

        VoltageSolution vplus = sol, vminus = sol;
        vplus.vm[m] *= 1.0 + eps;
        vminus.vm[m] *= 1.0 - eps;
        const auto tp = injections_at(vplus);
        const auto tm = injections_at(vminus);
        for (std::size_t r = 0; r < fd.m; ++r) {
            const std::size_t k = bus[r];
            fd.n[r * fd.m + c] = (tp[k].real() - tm[k].real()) / (2.0 * eps);
            fd.l[r * fd.m + c] = (tp[k].imag() - tm[k].imag()) / (2.0 * eps);
        }
    }
    return fd;
}

RuleOracleResult rule_oracle(const Centers& centers, const NetworkModel& model,
                             const MainBody& body, const Fleet& fleet,
                             std::span<const Complex> scenario_load_pu,
                             const CoordInterval& segment, RegulationMode mode,
                             DispatchKind kind, bool nearest_first) {
    struct Candidate {
        std::size_t idx;
        double coord;
        double headroom;
        bool between;
        double distance;
        int bus;
        int id;
    };

    // Rebuild headrooms straight from the actor definitions.
    std::map<int, double> load_left;
    for (const auto& a : fleet.actors) {
        if (a.kind != ActorKind::InterruptibleLoad) continue;
        const double bus_kw = model.pu_to_kw(scenario_load_pu[model.index_of(a.bus)].real());
        if (!load_left.count(a.bus)) load_left[a.bus] = bus_kw;
    }
    for (const auto& a : fleet.actors)
        if (a.kind == ActorKind::InterruptibleLoad)
            load_left[a.bus] = std::max(0.0, load_left[a.bus] - a.setpoint_kw);

    auto raise_of = [&](const VppActor& a) {
        if (a.is_dg()) return std::max(0.0, a.availability * a.rated_kw - a.setpoint_kw);
        if (a.kind == ActorKind::InterruptibleLoad)
            return std::max(0.0, std::min(a.rated_kw - a.setpoint_kw, load_left[a.bus]));
        return std::max(0.0, a.storage_cap_kw() - a.setpoint_kw);
    };
    auto reduce_of = [&](const VppActor& a) {
        if (a.is_dg()) return a.curtailment_protected ? 0.0 : std::max(0.0, a.setpoint_kw);
        if (a.kind == ActorKind::InterruptibleLoad)
            return mode == RegulationMode::Overvoltage ? std::max(0.0, a.setpoint_kw) : 0.0;
        return std::max(0.0, a.setpoint_kw + a.storage_cap_kw());
    };

    const bool uv = mode == RegulationMode::Undervoltage;
    const auto& anchor = uv ? centers.load : centers.generation;
    const auto& width_center = uv ? centers.generation : centers.load;

    std::optional<CoordInterval> overlap;
    if (centers.generation && centers.load) {
        const double lo = std::max(centers.generation->lo(), centers.load->lo());
        const double hi = std::min(centers.generation->hi(), centers.load->hi());
        if (lo < hi) overlap = CoordInterval{lo, hi};
    }

    auto collect = [&](bool raising, const std::optional<CenterOfMass>& window,
                       bool nearest) {
        std::vector<Candidate> cands;
        if (!window || !anchor) return std::vector<std::size_t>{};
        for (std::size_t i = 0; i < fleet.actors.size(); ++i) {
            const VppActor& a = fleet.actors[i];
            const double h = raising ? raise_of(a) : reduce_of(a);
            if (h <= 0.0) continue;
            const double c = body.coordinate[model.index_of(a.bus)];
            if (c < segment.lo || c > segment.hi) continue;
            if (c < window->g - window->delta_g || c > window->g + window->delta_g) continue;
            if (overlap && c >= overlap->lo && c <= overlap->hi) continue;
            Candidate cand;
            cand.idx = i;
            cand.coord = c;
            cand.headroom = h;
            cand.distance = std::abs(c - anchor->g);
            cand.between = centers.generation && centers.load &&
                           c > std::min(centers.generation->g, centers.load->g) &&
                           c < std::max(centers.generation->g, centers.load->g);
            cand.bus = a.bus;
            cand.id = a.id;
            cands.push_back(cand);
        }
        std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
            if (a.between != b.between) return !a.between;
            if (a.distance != b.distance)
                return nearest ? a.distance < b.distance : a.distance > b.distance;
            if (a.headroom != b.headroom) return a.headroom > b.headroom;
            if (a.bus != b.bus) return a.bus < b.bus;
            return a.id < b.id;
        });
        std::vector<std::size_t> order;
        for (const auto& c : cands) order.push_back(c.idx);
        return order;
    };

    RuleOracleResult res;
    if (uv) {
        res.raise = collect(true, centers.net, nearest_first);
        res.reduce = collect(false, width_center, false);
        if (kind == DispatchKind::Dispatch) res.reduce.clear();
    } else {
        res.reduce = collect(false, centers.net, nearest_first);
        res.raise = collect(true, width_center, false);
        if (kind == DispatchKind::Dispatch) res.raise.clear();
    }
    return res;
}

Fleet random_fleet(const NetworkModel& model, std::mt19937_64& rng) {
    Fleet fleet;
    std::uniform_int_distribution<int> count_dist(2, 6);
    std::uniform_int_distribution<std::size_t> bus_dist(1, model.size() - 1);
    std::uniform_real_distribution<double> rated_dist(20.0, 120.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const int count = count_dist(rng);
    for (int i = 0; i < count; ++i) {
        VppActor a;
        a.id = i + 1;
        a.bus = model.id_of(bus_dist(rng));
        a.rated_kw = rated_dist(rng);
        const double roll = u01(rng);
        if (roll < 0.4) {
            a.kind = ActorKind::DispatchableDg;
            a.setpoint_kw = u01(rng) * a.rated_kw;
        } else if (roll < 0.65) {
            a.kind = ActorKind::StochasticDg;
            a.availability = 0.4 + 0.6 * u01(rng);
            a.setpoint_kw = u01(rng) * a.availability * a.rated_kw;
            a.curtailment_protected = u01(rng) < 0.3;
        } else if (roll < 0.9) {
            a.kind = ActorKind::InterruptibleLoad;
        } else {
            a.kind = ActorKind::Storage;
            a.energy_budget_kw = 0.5 * a.rated_kw;
            a.setpoint_kw = (u01(rng) - 0.5) * a.storage_cap_kw();
        }
        fleet.actors.push_back(a);
    }
    return fleet;
}

} // namespace oracles
