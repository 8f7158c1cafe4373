#pragma once

#include "vrcom/common.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vrcom {

enum class BusKind { FeederHead, Junction, Load, Pole };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
    int id = 0;
    BusKind kind = BusKind::Pole;
    double p_kw = 0.0;   // peak active load
    double q_kvar = 0.0; // peak reactive load
    std::vector<int> attached_actors;

    bool operator==(const Bus&) const = default;
};

struct Segment {
    int from = 0;
    int to = 0;
    double length_km = 0.0;
    std::string conductor;
    Complex impedance_ohm; // resolved from conductor table (or given directly)

    bool operator==(const Segment&) const = default;
};

struct ConductorType {
    std::string name;
    double r_ohm_per_km = 0.0;
    double x_ohm_per_km = 0.0;

    bool operator==(const ConductorType&) const = default;
};

struct BaseValues {
    double kv = 0.0;
    double mva = 0.0;

    double z_ohm() const { return kv * kv / mva; }

    bool operator==(const BaseValues&) const = default;
};

/// Dense complex matrix stored as split re/im planes (row-major).
struct ComplexMatrix {
    std::size_t n = 0;
    std::vector<double> re;
    std::vector<double> im;

    explicit ComplexMatrix(std::size_t size = 0)
        : n(size), re(size * size, 0.0), im(size * size, 0.0) {}

    Complex at(std::size_t k, std::size_t m) const { return {re[k * n + m], im[k * n + m]}; }
    void add(std::size_t k, std::size_t m, Complex v) {
        re[k * n + m] += v.real();
        im[k * n + m] += v.imag();
    }
};

/// A radial distribution feeder: buses, impedance segments, per-unit bases
/// and the nodal admittance matrix. Immutable once constructed; safe to
/// share read-only across scenario workers.
class NetworkModel {
public:
    NetworkModel(std::vector<Bus> buses, std::vector<Segment> segments,
                 std::vector<ConductorType> conductors, BaseValues base);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<ConductorType>& conductors() const { return conductors_; }
    const BaseValues& base() const { return base_; }

    std::size_t size() const { return buses_.size(); }
    std::size_t head() const { return head_; }

    /// Dense index of a bus id; throws DataError for unknown ids.
    std::size_t index_of(int bus_id) const;
    bool has_bus(int bus_id) const { return index_.count(bus_id) > 0; }
    int id_of(std::size_t index) const { return buses_[index].id; }

    const ComplexMatrix& admittance() const { return admittance_; }

    /// Per-unit impedance of segment s.
    Complex segment_impedance_pu(std::size_t s) const {
        return segments_[s].impedance_ohm / base_.z_ohm();
    }

    struct Adjacent {
        std::size_t bus;     // neighbor dense index
        std::size_t segment; // connecting segment index
    };
    const std::vector<Adjacent>& neighbors(std::size_t index) const { return adjacency_[index]; }

    /// Base (peak) load of every bus as per-unit complex power.
    const std::vector<Complex>& base_load_pu() const { return base_load_pu_; }

    double total_load_kw() const { return total_load_kw_; }

    double s_base_kw() const { return base_.mva * 1000.0; }
    double kw_to_pu(double kw) const { return kw / s_base_kw(); }
    double pu_to_kw(double pu) const { return pu * s_base_kw(); }

    bool operator==(const NetworkModel& other) const {
        return buses_ == other.buses_ && segments_ == other.segments_ &&
               conductors_ == other.conductors_ && base_ == other.base_;
    }

private:
    std::vector<Bus> buses_;
    std::vector<Segment> segments_;
    std::vector<ConductorType> conductors_;
    BaseValues base_;
    std::map<int, std::size_t> index_;
    std::size_t head_ = 0;
    std::vector<std::vector<Adjacent>> adjacency_;
    ComplexMatrix admittance_;
    std::vector<Complex> base_load_pu_;
    double total_load_kw_ = 0.0;
};

NetworkModel load_network(const std::filesystem::path& path);
NetworkModel network_from_json_text(const std::string& text, const std::string& origin = "<string>");
std::string network_to_json_text(const NetworkModel& model);
void save_network(const NetworkModel& model, const std::filesystem::path& path);

/// Re-derives the admittance matrix from the segment list.
ComplexMatrix build_admittance(const NetworkModel& model);

} // namespace vrcom
