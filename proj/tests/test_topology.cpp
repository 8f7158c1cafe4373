#include "vrcom/topology.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

using namespace vrcom;

namespace {

NetworkModel chain_network(int n, Complex z) {
    std::vector<Bus> buses;
    std::vector<Segment> segs;
    for (int i = 0; i < n; ++i) {
        Bus b;
        b.id = i;
        b.kind = i == 0 ? BusKind::FeederHead : BusKind::Load;
        b.p_kw = i == 0 ? 0.0 : 10.0;
        buses.push_back(b);
        if (i > 0) segs.push_back({i - 1, i, 0.0, "", z});
    }
    return NetworkModel(std::move(buses), std::move(segs), {}, BaseValues{1.0, 1.0});
}

} // namespace

TEST_CASE("pure chain: main body is the whole chain, no branches") {
    const NetworkModel model = chain_network(5, Complex{0.1, 0.1});
    const MainBody body = extract_main_body(model);
    CHECK(body.chain.size() == 5);
    for (const auto& branch : body.branch_buses) CHECK(branch.empty());
    for (std::size_t p = 1; p < body.chain.size(); ++p)
        CHECK(body.chain_coordinate[p] > body.chain_coordinate[p - 1]);
}

TEST_CASE("uniform chain coordinates form an arithmetic progression") {
    const Complex z{0.3, 0.4}; // |z| = 0.5
    const NetworkModel model = chain_network(6, z);
    const MainBody body = extract_main_body(model);
    for (std::size_t p = 0; p < body.chain.size(); ++p)
        CHECK(body.chain_coordinate[p] ==
              doctest::Approx(0.5 * static_cast<double>(p)).epsilon(1e-12));
    CHECK(coordinate_of(body, model, 1) == doctest::Approx(0.5));
}

TEST_CASE("y-network: heavier path wins, branch concentrates at coupling") {
    // head(0) -> A(1) -> B(2) with |Z| 0.5 + 0.5; branch A -> C(3) with |Z| 0.2.
    std::vector<Bus> buses{{0, BusKind::FeederHead, 0, 0, {}},
                           {1, BusKind::Junction, 0, 0, {}},
                           {2, BusKind::Load, 10, 0, {}},
                           {3, BusKind::Load, 10, 0, {}}};
    std::vector<Segment> segs{{0, 1, 0.0, "", Complex{0.3, 0.4}},
                              {1, 2, 0.0, "", Complex{0.3, 0.4}},
                              {1, 3, 0.0, "", Complex{0.12, 0.16}}};
    const NetworkModel model(std::move(buses), std::move(segs), {}, BaseValues{1.0, 1.0});
    const MainBody body = extract_main_body(model);

    REQUIRE(body.chain.size() == 3);
    CHECK(model.id_of(body.chain[0]) == 0);
    CHECK(model.id_of(body.chain[1]) == 1);
    CHECK(model.id_of(body.chain[2]) == 2);
    REQUIRE(body.branch_buses[1].size() == 1);
    CHECK(model.id_of(body.branch_buses[1][0]) == 3);

    // Branch bus C takes the coupling coordinate of A.
    CHECK(coordinate_of(body, model, 3) == doctest::Approx(0.5));
    CHECK(coordinate_of(body, model, 3) == coordinate_of(body, model, 1));

    // Matches the exhaustive enumeration.
    const auto best = oracles::best_path(model);
    CHECK(best.leaf_id == 2);
    CHECK(best.weight == body.total_length());
}

TEST_CASE("exact tie between two leaves goes to the lower bus id") {
    std::vector<Bus> buses{{0, BusKind::FeederHead, 0, 0, {}},
                           {7, BusKind::Load, 10, 0, {}},
                           {3, BusKind::Load, 10, 0, {}}};
    const Complex z{0.3, 0.4};
    std::vector<Segment> segs{{0, 7, 0.0, "", z}, {0, 3, 0.0, "", z}};
    const NetworkModel model(std::move(buses), std::move(segs), {}, BaseValues{1.0, 1.0});
    const MainBody body = extract_main_body(model);
    CHECK(model.id_of(body.chain.back()) == 3);
}

TEST_CASE("repeated extraction is identical") {
    std::mt19937_64 rng(31);
    const NetworkModel model = oracles::random_radial_network(rng, 8, 12);
    const MainBody a = extract_main_body(model);
    const MainBody b = extract_main_body(model);
    CHECK(a.chain == b.chain);
    CHECK(a.chain_coordinate == b.chain_coordinate);
    CHECK(a.branch_buses == b.branch_buses);
}

TEST_CASE("DFS main body equals brute-force longest path on random networks") {
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 300; ++rep) {
        const NetworkModel model = oracles::random_radial_network(rng, 3, 12);
        const MainBody body = extract_main_body(model);
        const auto best = oracles::best_path(model);
        CHECK(body.total_length() == best.weight);
        CHECK(model.id_of(body.chain.back()) == best.leaf_id);
        REQUIRE(body.chain.size() == best.path.size());
        for (std::size_t p = 0; p < body.chain.size(); ++p)
            CHECK(body.chain[p] == best.path[p]);
    }
}

TEST_CASE("every bus appears exactly once across chain and branch lists") {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        const NetworkModel model = oracles::random_radial_network(rng, 3, 12);
        const MainBody body = extract_main_body(model);
        std::multiset<std::size_t> seen(body.chain.begin(), body.chain.end());
        for (const auto& branch : body.branch_buses)
            seen.insert(branch.begin(), branch.end());
        CHECK(seen.size() == model.size());
        for (std::size_t k = 0; k < model.size(); ++k) CHECK(seen.count(k) == 1);
    }
}

TEST_CASE("load mass over chain plus branches equals total network load") {
    std::mt19937_64 rng(34);
    const NetworkModel model = oracles::random_radial_network(rng, 6, 12);
    const MainBody body = extract_main_body(model);
    double sum = 0.0;
    for (const std::size_t k : body.chain) sum += model.buses()[k].p_kw;
    for (const auto& branch : body.branch_buses)
        for (const std::size_t k : branch) sum += model.buses()[k].p_kw;
    CHECK(sum == doctest::Approx(model.total_load_kw()).epsilon(1e-12));
}

TEST_CASE("unknown bus id in coordinate lookup throws") {
    const NetworkModel model = chain_network(3, Complex{0.1, 0.1});
    const MainBody body = extract_main_body(model);
    CHECK_THROWS_AS(coordinate_of(body, model, 999), DataError);
}
