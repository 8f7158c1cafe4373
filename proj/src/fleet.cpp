#include "vrcom/fleet.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using nlohmann::json;

namespace vrcom {

std::string to_string(ActorKind kind) {
    switch (kind) {
    case ActorKind::DispatchableDg: return "dispatchable-dg";
    case ActorKind::StochasticDg: return "stochastic-dg";
    case ActorKind::InterruptibleLoad: return "interruptible-load";
    case ActorKind::Storage: return "storage";
    }
    return "dispatchable-dg";
}

ActorKind actor_kind_from_string(const std::string& s) {
    if (s == "dispatchable-dg") return ActorKind::DispatchableDg;
    if (s == "stochastic-dg") return ActorKind::StochasticDg;
    if (s == "interruptible-load") return ActorKind::InterruptibleLoad;
    if (s == "storage") return ActorKind::Storage;
    throw DataError("unknown actor kind '" + s + "'");
}

double Fleet::total_rated_kw() const {
    double t = 0.0;
    for (const auto& a : actors) t += a.rated_kw;
    return t;
}

double Fleet::total_dg_rated_kw() const {
    double t = 0.0;
    for (const auto& a : actors)
        if (a.is_dg()) t += a.rated_kw;
    return t;
}

double Fleet::total_il_rated_kw() const {
    double t = 0.0;
    for (const auto& a : actors)
        if (a.kind == ActorKind::InterruptibleLoad) t += a.rated_kw;
    return t;
}

double Fleet::vpp_output_kw() const {
    double t = 0.0;
    for (const auto& a : actors)
        if (a.is_dg() || a.kind == ActorKind::Storage) t += a.setpoint_kw;
    return t;
}

double Fleet::il_shed_kw() const {
    double t = 0.0;
    for (const auto& a : actors)
        if (a.kind == ActorKind::InterruptibleLoad) t += a.setpoint_kw;
    return t;
}

Fleet fleet_from_json_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    }
    try {
        Fleet fleet;
        for (const auto& a : doc.at("actors")) {
            VppActor actor;
            actor.id = a.at("id").get<int>();
            actor.bus = a.at("bus").get<int>();
            actor.kind = actor_kind_from_string(a.at("kind").get<std::string>());
            actor.rated_kw = a.at("rated_kw").get<double>();
            actor.setpoint_kw = a.value("setpoint_kw", 0.0);
            actor.availability = a.value("availability", 1.0);
            actor.curtailment_protected = a.value("curtailment_protected", false);
            actor.energy_budget_kw = a.value("energy_budget_kw", 0.0);
            if (actor.rated_kw <= 0.0)
                throw DataError(origin + ": actor " + std::to_string(actor.id) +
                                " has non-positive rated power");
            if (actor.availability < 0.0 || actor.availability > 1.0)
                throw DataError(origin + ": actor " + std::to_string(actor.id) +
                                " availability outside [0,1]");
            fleet.actors.push_back(actor);
        }
        return fleet;
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    }
}

Fleet load_fleet(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fleet file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return fleet_from_json_text(buf.str(), path.string());
}

std::string fleet_to_json_text(const Fleet& fleet) {
    json doc;
    doc["actors"] = json::array();
    for (const auto& a : fleet.actors) {
        json actor = {{"id", a.id},
                      {"bus", a.bus},
                      {"kind", to_string(a.kind)},
                      {"rated_kw", a.rated_kw},
                      {"setpoint_kw", a.setpoint_kw},
                      {"availability", a.availability},
                      {"curtailment_protected", a.curtailment_protected}};
        if (a.kind == ActorKind::Storage) actor["energy_budget_kw"] = a.energy_budget_kw;
        doc["actors"].push_back(std::move(actor));
    }
    return doc.dump(2) + "\n";
}

void save_fleet(const Fleet& fleet, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write fleet file " + path.string());
    out << fleet_to_json_text(fleet);
}

void validate_fleet(const NetworkModel& model, const Fleet& fleet) {
    for (const auto& a : fleet.actors) {
        if (!model.has_bus(a.bus))
            throw DataError("actor " + std::to_string(a.id) + " references unknown bus " +
                            std::to_string(a.bus));
        if (a.is_dg() && (a.setpoint_kw < 0.0 || a.setpoint_kw > a.dg_limit_kw() + 1e-9))
            throw DataError("actor " + std::to_string(a.id) +
                            " setpoint outside [0, availability*rated]");
        if (a.kind == ActorKind::InterruptibleLoad &&
            (a.setpoint_kw < 0.0 || a.setpoint_kw > a.rated_kw + 1e-9))
            throw DataError("actor " + std::to_string(a.id) + " shed outside [0, rated]");
        if (a.kind == ActorKind::Storage && std::abs(a.setpoint_kw) > a.storage_cap_kw() + 1e-9)
            throw DataError("actor " + std::to_string(a.id) + " storage setpoint beyond budget");
    }
}

} // namespace vrcom
