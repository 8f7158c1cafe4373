#pragma once

#include "vrcom/network.hpp"

#include <vector>

namespace vrcom {

/// The longest electric path of the feeder (by accumulated per-unit
/// impedance magnitude from the head) plus, for every chain bus, the buses
/// of the subtrees hanging off it. Off-chain buses take the coordinate of
/// their coupling bus, so the whole network maps onto one axis.
struct MainBody {
    std::vector<std::size_t> chain;              // dense bus indices, head first
    std::vector<double> chain_coordinate;        // accumulated |Z| per chain position
    std::vector<std::vector<std::size_t>> branch_buses; // per chain position

    // Per dense bus index, for the whole network:
    std::vector<double> coordinate;       // own coordinate (chain) or coupling coordinate
    std::vector<std::size_t> chain_position; // chain position the bus belongs to

    double total_length() const { return chain_coordinate.back(); }
    bool on_chain(std::size_t bus_index) const {
        return chain[chain_position[bus_index]] == bus_index;
    }
};

MainBody extract_main_body(const NetworkModel& model);

/// Coordinate of a bus by id (chain buses own theirs, branch buses take
/// the coupling bus coordinate). Throws DataError for unknown ids.
double coordinate_of(const MainBody& body, const NetworkModel& model, int bus_id);

} // namespace vrcom
