#pragma once

#include "vrcom/network.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vrcom {

enum class ActorKind { DispatchableDg, StochasticDg, InterruptibleLoad, Storage };

std::string to_string(ActorKind kind);
ActorKind actor_kind_from_string(const std::string& s);

/// A controllable unit of the virtual power plant.
///
/// `setpoint_kw` means: DG — current active output; interruptible load —
/// active power currently shed; storage — net active output (negative while
/// charging). Storage swing is additionally limited by `energy_budget_kw`,
/// the usable power-equivalent budget for one regulation episode.
struct VppActor {
    int id = 0;
    int bus = 0;
    ActorKind kind = ActorKind::DispatchableDg;
    double rated_kw = 0.0;
    double setpoint_kw = 0.0;
    double availability = 1.0; // forecast stand-in for stochastic units
    bool curtailment_protected = false;
    double energy_budget_kw = 0.0; // storage only; 0 means rated_kw

    bool is_dg() const {
        return kind == ActorKind::DispatchableDg || kind == ActorKind::StochasticDg;
    }
    double dg_limit_kw() const { return availability * rated_kw; }
    double storage_cap_kw() const {
        return energy_budget_kw > 0.0 ? std::min(energy_budget_kw, rated_kw) : rated_kw;
    }

    bool operator==(const VppActor&) const = default;
};

struct Fleet {
    std::vector<VppActor> actors;

    double total_rated_kw() const;
    double total_dg_rated_kw() const;
    double total_il_rated_kw() const;
    /// Sum of DG and storage setpoints (the scheduled VPP injection).
    double vpp_output_kw() const;
    double il_shed_kw() const;

    bool operator==(const Fleet&) const = default;
};

Fleet load_fleet(const std::filesystem::path& path);
Fleet fleet_from_json_text(const std::string& text, const std::string& origin = "<string>");
std::string fleet_to_json_text(const Fleet& fleet);
void save_fleet(const Fleet& fleet, const std::filesystem::path& path);

/// Validates actor/bus references and setpoint ranges against a model and
/// records actor ids on their buses. Returns the annotated model copy.
void validate_fleet(const NetworkModel& model, const Fleet& fleet);

} // namespace vrcom
