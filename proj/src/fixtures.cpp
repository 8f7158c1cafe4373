#include "vrcom/fixtures.hpp"

#include "vrcom/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace vrcom::fixtures {

namespace {

// Overhead-line impedances per km for the conductor families named on the
// R-26. Values are typical 50 Hz data for these cross-sections; the network
// file keeps them overridable.
const std::vector<ConductorType> kConductors = {
    {"CU-95", 0.193, 0.368},  {"CU-35", 0.524, 0.397},  {"CU-16", 1.147, 0.424},
    {"ACSR-35", 0.835, 0.403}, {"ACSR-16", 1.827, 0.428}, {"AAAC-35", 0.956, 0.405},
};

// MV-LV distribution transformer ratings along the feeder (node, kW),
// duplicate table rows dropped.
const std::vector<std::pair<int, double>> kTransformerRatings = {
    {204, 160}, {207, 50},  {211, 100}, {212, 100}, {213, 250}, {216, 50},  {218, 100},
    {220, 160}, {222, 160}, {224, 250}, {226, 100}, {227, 250}, {229, 100}, {231, 50},
    {233, 100}, {235, 50},  {237, 100}, {239, 100}, {241, 100}, {243, 50},  {245, 50},
    {248, 50},  {249, 100}, {251, 50},  {253, 50},  {256, 100}, {258, 100}, {259, 100},
    {261, 100}, {263, 100}, {265, 100}, {266, 100}, {268, 50},  {270, 50},  {272, 50},
    {273, 100}, {275, 50},  {277, 50},  {279, 50},  {281, 100}, {283, 50},  {285, 100},
    {288, 100}, {291, 160}, {292, 100}, {294, 50},  {297, 25},  {299, 50},  {301, 50},
    {303, 100}, {305, 25},  {307, 50},  {308, 50},  {314, 50},  {316, 400}, {318, 50},
    {320, 50},  {322, 50},  {324, 734}, {325, 50},  {328, 100}, {330, 50},  {332, 50},
    {334, 50},  {336, 100}, {337, 50},  {342, 50},  {344, 160}, {346, 50},  {347, 100},
    {349, 50},  {351, 50},  {353, 50},  {355, 50},  {356, 160}, {358, 160}, {364, 50},
    {366, 50},  {368, 50},  {369, 160}, {371, 50},  {389, 100}, {411, 100}, {418, 100},
};

// Branch runs of the reconstruction: consecutive node ids forming a lateral,
// coupled to the main line at the largest main-line id below the run. The
// published one-line diagram fixes only that laterals exist and that a few
// exceed three nodes; the specific runs below are placement judgement.
struct BranchRun {
    int first;
    int last;
    const char* conductor;
};

const std::vector<BranchRun> kBranchRuns = {
    {205, 206, "ACSR-16"}, {208, 210, "ACSR-35"}, {214, 215, "CU-16"},
    {246, 247, "CU-16"},   {254, 255, "ACSR-16"}, {286, 287, "CU-35"},
    {295, 298, "CU-16"},   {309, 313, "ACSR-35"}, {326, 327, "CU-16"},
    {338, 341, "ACSR-35"}, {359, 363, "ACSR-35"}, {372, 375, "CU-35"},
    {385, 388, "ACSR-16"}, {390, 399, "ACSR-35"}, {400, 410, "AAAC-35"},
    {419, 426, "ACSR-16"}, {427, 433, "CU-16"},
};

constexpr int kFirstNode = 200;
constexpr int kLastNode = 433;
constexpr double kTotalPeakKw = 8100.0;
constexpr double kLoadPowerFactor = 0.95;
constexpr int kLoadBusCount = 119;

double reactive_for(double p_kw) {
    const double tan_phi =
        std::sqrt(1.0 - kLoadPowerFactor * kLoadPowerFactor) / kLoadPowerFactor;
    return p_kw * tan_phi;
}

} // namespace

double rhodes_rating_total_kw() {
    double total = 0.0;
    for (const auto& [node, kw] : kTransformerRatings) total += kw;
    return total;
}

double rhodes_rating_kw(int node) {
    for (const auto& [n, kw] : kTransformerRatings)
        if (n == node) return kw;
    return 0.0;
}

NetworkModel build_two_bus() {
    std::vector<Bus> buses;
    buses.push_back({0, BusKind::FeederHead, 0.0, 0.0, {}});
    buses.push_back({1, BusKind::Load, 100.0, 0.0, {}});
    std::vector<Segment> segments;
    segments.push_back({0, 1, 0.0, "", Complex{0.1, 0.1}});
    return NetworkModel(std::move(buses), std::move(segments), {}, BaseValues{15.0, 10.0});
}

NetworkModel build_rhodes_network(double segment_length_km) {
    std::set<int> branch_ids;
    std::map<int, const BranchRun*> run_of_first;
    for (const BranchRun& run : kBranchRuns) {
        for (int id = run.first; id <= run.last; ++id) branch_ids.insert(id);
        run_of_first[run.first] = &run;
    }

    std::vector<int> main_line;
    for (int id = kFirstNode; id <= kLastNode; ++id)
        if (!branch_ids.count(id)) main_line.push_back(id);

    std::map<int, double> rating;
    for (const auto& [node, kw] : kTransformerRatings) rating[node] = kw;

    // DG sites without a published transformer rating still count among the
    // load buses of the feeder; together with enough further unrated
    // stations they bring the load-bus count to its published total. They
    // carry zero peak so all load mass stays on the published ratings.
    std::set<int> load_ids;
    for (const auto& [node, kw] : kTransformerRatings) load_ids.insert(node);
    for (const int dg_bus : {376, 380, 381, 384, 414}) load_ids.insert(dg_bus);
    for (int id = kFirstNode + 1; id <= kLastNode && load_ids.size() < kLoadBusCount; id += 4)
        load_ids.insert(id);
    for (int id = kFirstNode + 2; id <= kLastNode && load_ids.size() < kLoadBusCount; id += 4)
        load_ids.insert(id);

    const double scale = kTotalPeakKw / rhodes_rating_total_kw();

    std::vector<Segment> segments;
    for (std::size_t i = 1; i < main_line.size(); ++i)
        segments.push_back(
            {main_line[i - 1], main_line[i], segment_length_km, "CU-95", Complex{}});
    for (const BranchRun& run : kBranchRuns) {
        const auto it =
            std::lower_bound(main_line.begin(), main_line.end(), run.first);
        const int coupling = *(it - 1);
        segments.push_back({coupling, run.first, segment_length_km, run.conductor, Complex{}});
        for (int id = run.first + 1; id <= run.last; ++id)
            segments.push_back({id - 1, id, segment_length_km, run.conductor, Complex{}});
    }
    for (Segment& seg : segments) {
        const auto ct = std::find_if(kConductors.begin(), kConductors.end(),
                                     [&](const ConductorType& c) { return c.name == seg.conductor; });
        seg.impedance_ohm =
            Complex(ct->r_ohm_per_km, ct->x_ohm_per_km) * seg.length_km;
    }

    std::map<int, int> degree;
    for (const Segment& s : segments) {
        ++degree[s.from];
        ++degree[s.to];
    }

    std::vector<Bus> buses;
    for (int id = kFirstNode; id <= kLastNode; ++id) {
        Bus bus;
        bus.id = id;
        if (id == kFirstNode) {
            bus.kind = BusKind::FeederHead;
        } else if (load_ids.count(id)) {
            bus.kind = BusKind::Load;
            const double p = rating.count(id) ? rating[id] * scale : 0.0;
            bus.p_kw = p;
            bus.q_kvar = reactive_for(p);
        } else {
            bus.kind = degree[id] >= 3 ? BusKind::Junction : BusKind::Pole;
        }
        buses.push_back(std::move(bus));
    }

    return NetworkModel(std::move(buses), std::move(segments), kConductors,
                        BaseValues{15.0, 10.0});
}

NetworkModel build_rhodes_calibrated(double target_critical_kw, double tolerance_kw) {
    // Longer segments lower the critical loading monotonically; bisect the
    // uniform length until the critical total lands on target.
    double lo = 0.02, hi = 2.0;

    auto critical_kw_at = [&](double length) {
        const NetworkModel model = build_rhodes_network(length);
        return find_critical_loading(model) * model.total_load_kw();
    };

    if (critical_kw_at(lo) < target_critical_kw)
        throw RuntimeError("calibration: even the shortest feeder is below target");
    if (critical_kw_at(hi) > target_critical_kw)
        throw RuntimeError("calibration: even the longest feeder is above target");

    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double crit = critical_kw_at(mid);
        if (std::abs(crit - target_critical_kw) <= tolerance_kw)
            return build_rhodes_network(mid);
        if (crit > target_critical_kw)
            lo = mid;
        else
            hi = mid;
    }
    throw RuntimeError("calibration did not converge to the target critical loading");
}

Fleet build_rhodes_fleet() {
    Fleet fleet;
    int id = 1;
    auto add = [&](int bus, ActorKind kind, double rated) {
        VppActor a;
        a.id = id++;
        a.bus = bus;
        a.kind = kind;
        a.rated_kw = rated;
        fleet.actors.push_back(a);
    };
    add(213, ActorKind::StochasticDg, 200);    // wind park
    add(224, ActorKind::StochasticDg, 150);    // photovoltaic-hydro
    add(316, ActorKind::StochasticDg, 220);    // wind park
    add(324, ActorKind::StochasticDg, 150);    // wind park
    add(324, ActorKind::DispatchableDg, 250);  // biomass
    add(324, ActorKind::DispatchableDg, 150);  // LPG genset
    add(380, ActorKind::StochasticDg, 300);    // photovoltaic-hydro
    add(414, ActorKind::DispatchableDg, 200);  // geothermal
    add(376, ActorKind::DispatchableDg, 150);  // LPG genset
    add(381, ActorKind::DispatchableDg, 150);  // diesel
    add(384, ActorKind::DispatchableDg, 200);  // diesel
    add(227, ActorKind::InterruptibleLoad, 150);
    add(204, ActorKind::InterruptibleLoad, 120);
    add(358, ActorKind::InterruptibleLoad, 120);
    add(369, ActorKind::InterruptibleLoad, 120);
    add(291, ActorKind::InterruptibleLoad, 120);
    add(220, ActorKind::InterruptibleLoad, 120);
    add(222, ActorKind::InterruptibleLoad, 120);
    add(237, ActorKind::InterruptibleLoad, 80);
    add(239, ActorKind::InterruptibleLoad, 80);
    add(249, ActorKind::InterruptibleLoad, 80);
    add(259, ActorKind::InterruptibleLoad, 80);
    add(328, ActorKind::InterruptibleLoad, 80);
    return fleet;
}

std::vector<FixtureInfo> fixture_catalog() {
    std::vector<FixtureInfo> out;

    FixtureInfo two_bus;
    two_bus.name = "two_bus";
    two_bus.description = "head plus one 100 kW load behind 0.1+j0.1 ohm; "
                          "closed-form voltage checks";
    two_bus.notes = {
        {"load 100 kW @ bus 1", "chosen minimal case"},
        {"Z = 0.1+j0.1 ohm", "chosen minimal case"},
    };
    out.push_back(std::move(two_bus));

    FixtureInfo rhodes;
    rhodes.name = "rhodes_r26";
    rhodes.description = "reconstruction of the R-26 (Gennadi) feeder, Rhodes: 234 nodes, "
                         "119 load buses, 8.1 MW peak";
    rhodes.notes = {
        {"node ids 200-433", "published feeder description"},
        {"119 load buses, 8.1 MW total peak", "published feeder description"},
        {"per-bus peaks", "proportional to published MV-LV transformer ratings, "
                          "normalized to the 8.1 MW total"},
        {"35 load buses without a published rating", "reconstructed at zero peak"},
        {"conductor families CU-95 main line; ACSR-35/ACSR-16/AAAC-35/CU-35/CU-16 laterals",
         "published feeder description"},
        {"conductor impedances per km", "standard overhead-line data; overridable in file"},
        {"branch runs and coupling points", "placement judgement; the published one-line "
                                            "diagram marks only laterals longer than 3 nodes"},
        {"uniform segment length", "calibrated so the critical loading is ~4.0 MW"},
        {"load power factor 0.95 lagging", "assumed; overridable per bus"},
        {"base 15 kV / 10 MVA", "assumed MV island feeder bases"},
    };
    out.push_back(std::move(rhodes));

    FixtureInfo fleet;
    fleet.name = "rhodes_vpp";
    fleet.description = "VPP fleet on the R-26: 2120 kW DG + 1270 kW interruptible load";
    fleet.notes = {
        {"unit buses, types and ratings", "published fleet table"},
        {"availability factors", "scenario inputs; stochastic units draw them per scenario"},
    };
    out.push_back(std::move(fleet));

    return out;
}

} // namespace vrcom::fixtures
