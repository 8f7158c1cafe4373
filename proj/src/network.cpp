#include "vrcom/network.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace vrcom {

std::string to_string(BusKind kind) {
    switch (kind) {
    case BusKind::FeederHead: return "feeder-head";
    case BusKind::Junction: return "junction";
    case BusKind::Load: return "load";
    case BusKind::Pole: return "pole";
    }
    return "pole";
}

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "feeder-head") return BusKind::FeederHead;
    if (s == "junction") return BusKind::Junction;
    if (s == "load") return BusKind::Load;
    if (s == "pole") return BusKind::Pole;
    throw DataError("unknown bus kind '" + s + "'");
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Segment> segments,
                           std::vector<ConductorType> conductors, BaseValues base)
    : buses_(std::move(buses)), segments_(std::move(segments)),
      conductors_(std::move(conductors)), base_(base) {
    if (base_.kv <= 0.0 || base_.mva <= 0.0)
        throw DataError("per-unit base missing or non-positive (kv=" + std::to_string(base_.kv) +
                        ", mva=" + std::to_string(base_.mva) + ")");
    if (buses_.empty()) throw DataError("network has no buses");

    std::size_t heads = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        if (!index_.emplace(b.id, i).second)
            throw DataError("duplicate bus id " + std::to_string(b.id));
        if (b.kind == BusKind::FeederHead) {
            head_ = i;
            ++heads;
        }
        if (b.kind == BusKind::Load && b.p_kw < 0.0)
            throw DataError("load bus " + std::to_string(b.id) + " has negative active load");
    }
    if (heads != 1)
        throw DataError("network must declare exactly one feeder-head bus, found " +
                        std::to_string(heads));

    if (segments_.size() + 1 != buses_.size())
        throw DataError("radial network requires exactly bus-count-1 segments, got " +
                        std::to_string(segments_.size()) + " for " +
                        std::to_string(buses_.size()) + " buses");

    adjacency_.resize(buses_.size());
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const Segment& seg = segments_[s];
        auto fi = index_.find(seg.from);
        auto ti = index_.find(seg.to);
        if (fi == index_.end())
            throw DataError("segment references undeclared bus " + std::to_string(seg.from));
        if (ti == index_.end())
            throw DataError("segment references undeclared bus " + std::to_string(seg.to));
        if (std::abs(seg.impedance_ohm) <= 0.0)
            throw DataError("segment " + std::to_string(seg.from) + "-" + std::to_string(seg.to) +
                            " has zero impedance");
        adjacency_[fi->second].push_back({ti->second, s});
        adjacency_[ti->second].push_back({fi->second, s});
    }

    // Connectivity check; with m = n-1 edges, connected implies a tree.
    std::vector<char> seen(buses_.size(), 0);
    std::vector<std::size_t> stack{head_};
    seen[head_] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const Adjacent& a : adjacency_[u]) {
            if (!seen[a.bus]) {
                seen[a.bus] = 1;
                ++reached;
                stack.push_back(a.bus);
            }
        }
    }
    if (reached != buses_.size()) {
        for (std::size_t i = 0; i < buses_.size(); ++i)
            if (!seen[i])
                throw DataError("bus " + std::to_string(buses_[i].id) +
                                " is not connected to the feeder head");
    }

    admittance_ = ComplexMatrix(buses_.size());
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const Complex y = 1.0 / segment_impedance_pu(s);
        const std::size_t k = index_.at(segments_[s].from);
        const std::size_t m = index_.at(segments_[s].to);
        admittance_.add(k, k, y);
        admittance_.add(m, m, y);
        admittance_.add(k, m, -y);
        admittance_.add(m, k, -y);
    }

    base_load_pu_.resize(buses_.size());
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        base_load_pu_[i] = Complex(buses_[i].p_kw, buses_[i].q_kvar) / s_base_kw();
        total_load_kw_ += buses_[i].p_kw;
    }
}

std::size_t NetworkModel::index_of(int bus_id) const {
    auto it = index_.find(bus_id);
    if (it == index_.end()) throw DataError("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

ComplexMatrix build_admittance(const NetworkModel& model) {
    ComplexMatrix y(model.size());
    const auto& segs = model.segments();
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const Complex adm = 1.0 / model.segment_impedance_pu(s);
        const std::size_t k = model.index_of(segs[s].from);
        const std::size_t m = model.index_of(segs[s].to);
        y.add(k, k, adm);
        y.add(m, m, adm);
        y.add(k, m, -adm);
        y.add(m, k, -adm);
    }
    return y;
}

namespace {

Complex resolve_impedance(const Segment& seg, const std::vector<ConductorType>& conductors) {
    auto it = std::find_if(conductors.begin(), conductors.end(),
                           [&](const ConductorType& c) { return c.name == seg.conductor; });
    if (it == conductors.end())
        throw DataError("segment " + std::to_string(seg.from) + "-" + std::to_string(seg.to) +
                        " references unknown conductor '" + seg.conductor + "'");
    return Complex(it->r_ohm_per_km, it->x_ohm_per_km) * seg.length_km;
}

} // namespace

NetworkModel network_from_json_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    }
    try {
        BaseValues base;
        if (!doc.contains("base"))
            throw DataError(origin + ": missing per-unit base section");
        base.kv = doc["base"].at("kv").get<double>();
        base.mva = doc["base"].at("mva").get<double>();

        std::vector<ConductorType> conductors;
        for (const auto& c : doc.value("conductors", json::array())) {
            ConductorType ct;
            ct.name = c.at("name").get<std::string>();
            ct.r_ohm_per_km = c.at("r_ohm_per_km").get<double>();
            ct.x_ohm_per_km = c.at("x_ohm_per_km").get<double>();
            conductors.push_back(std::move(ct));
        }

        std::vector<Bus> buses;
        for (const auto& b : doc.at("buses")) {
            Bus bus;
            bus.id = b.at("id").get<int>();
            bus.kind = bus_kind_from_string(b.at("kind").get<std::string>());
            bus.p_kw = b.value("p_kw", 0.0);
            bus.q_kvar = b.value("q_kvar", 0.0);
            buses.push_back(std::move(bus));
        }

        std::vector<Segment> segments;
        for (const auto& s : doc.at("segments")) {
            Segment seg;
            seg.from = s.at("from").get<int>();
            seg.to = s.at("to").get<int>();
            seg.length_km = s.value("length_km", 0.0);
            seg.conductor = s.value("conductor", std::string{});
            if (s.contains("r_ohm") || s.contains("x_ohm")) {
                seg.impedance_ohm = Complex(s.value("r_ohm", 0.0), s.value("x_ohm", 0.0));
            } else {
                seg.impedance_ohm = resolve_impedance(seg, conductors);
            }
            segments.push_back(std::move(seg));
        }

        return NetworkModel(std::move(buses), std::move(segments), std::move(conductors), base);
    } catch (const json::exception& e) {
        throw DataError(origin + ": " + e.what());
    }
}

NetworkModel load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open network file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return network_from_json_text(buf.str(), path.string());
}

std::string network_to_json_text(const NetworkModel& model) {
    json doc;
    doc["base"] = {{"kv", model.base().kv}, {"mva", model.base().mva}};
    doc["conductors"] = json::array();
    for (const auto& c : model.conductors())
        doc["conductors"].push_back({{"name", c.name},
                                     {"r_ohm_per_km", c.r_ohm_per_km},
                                     {"x_ohm_per_km", c.x_ohm_per_km}});
    doc["buses"] = json::array();
    for (const auto& b : model.buses())
        doc["buses"].push_back({{"id", b.id},
                                {"kind", to_string(b.kind)},
                                {"p_kw", b.p_kw},
                                {"q_kvar", b.q_kvar}});
    doc["segments"] = json::array();
    for (const auto& s : model.segments()) {
        json seg = {{"from", s.from}, {"to", s.to}, {"length_km", s.length_km}};
        if (!s.conductor.empty()) {
            seg["conductor"] = s.conductor;
        } else {
            seg["r_ohm"] = s.impedance_ohm.real();
            seg["x_ohm"] = s.impedance_ohm.imag();
        }
        doc["segments"].push_back(std::move(seg));
    }
    return doc.dump(2) + "\n";
}

void save_network(const NetworkModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write network file " + path.string());
    out << network_to_json_text(model);
}

} // namespace vrcom
