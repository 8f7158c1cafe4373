#pragma once

#include "vrcom/fleet.hpp"
#include "vrcom/network.hpp"

#include <string>
#include <vector>

namespace vrcom::fixtures {

struct ProvenanceNote {
    std::string field;
    std::string source;
};

struct FixtureInfo {
    std::string name;
    std::string description;
    std::vector<ProvenanceNote> notes;
};

/// Two buses, one 100 kW load behind 0.1+j0.1 ohm.
NetworkModel build_two_bus();

/// The R-26 (Gennadi, Rhodes) feeder reconstruction with a given uniform
/// segment length.
NetworkModel build_rhodes_network(double segment_length_km);

/// Reconstruction calibrated so the critical loading (lowest bus voltage
/// touching 0.90 p.u. under uniform scaling) lands at ~4.0 MW. Throws
/// RuntimeError if no segment length within bounds achieves that.
NetworkModel build_rhodes_calibrated(double target_critical_kw = 4000.0,
                                     double tolerance_kw = 5.0);

/// The VPP fleet operating on the R-26: 2120 kW of DG and 1270 kW of
/// interruptible load.
Fleet build_rhodes_fleet();

std::vector<FixtureInfo> fixture_catalog();

/// Sum of the published MV-LV transformer ratings (kW).
double rhodes_rating_total_kw();

/// Rating of one node in the published transformer table; 0 if absent.
double rhodes_rating_kw(int node);

} // namespace vrcom::fixtures
