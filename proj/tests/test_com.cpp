#include "vrcom/com.hpp"

#include "oracles.hpp"
#include "vrcom/controller.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vrcom;

TEST_CASE("flat profile estimates zero current") {
    const Complex v{1.0, 0.0};
    const Complex z{0.1, 0.2};
    CHECK(std::abs(estimate_bus_current(v, v, v, z, z)) == doctest::Approx(0.0));
}

TEST_CASE("zero impedance in the estimate is an error") {
    const Complex v{1.0, 0.0};
    CHECK_THROWS_AS(estimate_bus_current(v, v, v, Complex{}, Complex{0.1, 0.1}), DataError);
}

TEST_CASE("pure pass-through current estimates to zero") {
    // V_prev = V_k + I*Z_prev and V_next = V_k - I*Z_next describe a bus the
    // current only flows through.
    const Complex i{0.4, -0.1};
    const Complex z_prev{0.05, 0.08}, z_next{0.02, 0.03};
    const Complex v_k{0.97, -0.02};
    const Complex v_prev = v_k + i * z_prev;
    const Complex v_next = v_k - i * z_next;
    CHECK(std::abs(estimate_bus_current(v_prev, v_k, v_next, z_prev, z_next)) < 1e-12);
}

TEST_CASE("estimate matches conj(S/V) on interior branch-free buses") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 30; ++rep) {
        const NetworkModel model = oracles::random_radial_network(rng, 4, 10);
        const auto inj = oracles::random_injections(model, rng, 0.05);
        const VoltageSolution sol = solve(model, inj);
        REQUIRE(sol.report.converged);
        const MainBody body = extract_main_body(model);

        const auto currents = estimate_chain_currents(model, body, sol);
        for (std::size_t pos = 1; pos + 1 < body.chain.size(); ++pos) {
            const std::size_t k = body.chain[pos];
            if (!body.branch_buses[pos].empty()) continue;
            const Complex expected = std::conj(inj[k] / sol.voltage(k));
            CHECK(std::abs(currents[pos - 1].current - expected) < 1e-6);
        }
    }
}

TEST_CASE("estimated chain currents sum to the current fed into the chain") {
    std::mt19937_64 rng(52);
    for (int rep = 0; rep < 30; ++rep) {
        const NetworkModel model = oracles::random_radial_network(rng, 4, 12);
        const auto inj = oracles::random_injections(model, rng, 0.05);
        const VoltageSolution sol = solve(model, inj);
        REQUIRE(sol.report.converged);
        const MainBody body = extract_main_body(model);

        Complex sum = 0.0;
        for (const auto& bc : estimate_chain_currents(model, body, sol)) sum += bc.current;

        // Current leaving the head through the first chain segment; equal to
        // the whole feeder-head current when the head has a single child.
        Complex z_first{};
        for (const auto& a : model.neighbors(model.head()))
            if (a.bus == body.chain[1]) z_first = model.segment_impedance_pu(a.segment);
        const Complex chain_feed =
            (sol.voltage(model.head()) - sol.voltage(body.chain[1])) / z_first;
        CHECK(std::abs(sum + chain_feed) < 1e-5);

        if (model.neighbors(model.head()).size() == 1) {
            const Complex head_current =
                std::conj(sol.slack_injection_pu / sol.voltage(model.head()));
            CHECK(std::abs(sum + head_current) < 1e-5);
        }
    }
}

TEST_CASE("single point mass sits at its coordinate with zero width") {
    const double w[] = {2.5};
    const double c[] = {0.7};
    const auto com = compute_center(w, c);
    REQUIRE(com.has_value());
    CHECK(com->g == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(com->delta_g == doctest::Approx(0.0));
}

TEST_CASE("two equal masses: symmetric pair") {
    const double w[] = {1.0, 1.0};
    const double c[] = {0.2, 0.6};
    const auto com = compute_center(w, c);
    REQUIRE(com.has_value());
    CHECK(com->g == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(com->delta_g == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("3:1 masses at 0.0 and 0.4: hand-computed center and width") {
    const double w[] = {3.0, 1.0};
    const double c[] = {0.0, 0.4};
    const auto com = compute_center(w, c);
    REQUIRE(com.has_value());
    CHECK(com->g == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(com->delta_g == doctest::Approx(std::sqrt(0.03)).epsilon(1e-14));
}

TEST_CASE("zero or empty weights mean no center") {
    CHECK(!compute_center({}, {}).has_value());
    const double w[] = {0.0, 0.0};
    const double c[] = {0.1, 0.2};
    CHECK(!compute_center(w, c).has_value());
}

TEST_CASE("negative weights are rejected") {
    const double w[] = {1.0, -0.5};
    const double c[] = {0.1, 0.2};
    CHECK_THROWS_AS(compute_center(w, c), DataError);
}

TEST_CASE("center properties: scale invariance, convexity, translation") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> wd(0.0, 4.0), cd(0.0, 3.0), sd(0.1, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> w(1 + rep % 9), c(w.size());
        for (auto& x : w) x = wd(rng);
        for (auto& x : c) x = cd(rng);
        const auto com = compute_center(w, c);
        if (!com) continue;

        // Convex hull containment.
        const double lo = *std::min_element(c.begin(), c.end());
        const double hi = *std::max_element(c.begin(), c.end());
        CHECK(com->g >= lo - 1e-12);
        CHECK(com->g <= hi + 1e-12);
        CHECK(com->delta_g >= 0.0);

        // Scaling every weight leaves both g and delta_g unchanged.
        const double s = sd(rng);
        auto ws = w;
        for (auto& x : ws) x *= s;
        const auto scaled = compute_center(ws, c);
        REQUIRE(scaled.has_value());
        CHECK(std::abs(scaled->g - com->g) <= 1e-12 * std::max(1.0, std::abs(com->g)));
        CHECK(std::abs(scaled->delta_g - com->delta_g) <=
              1e-12 * std::max(1.0, com->delta_g));

        // Translating coordinates shifts g and keeps delta_g.
        const double t = cd(rng);
        auto ct = c;
        for (auto& x : ct) x += t;
        const auto moved = compute_center(w, ct);
        REQUIRE(moved.has_value());
        CHECK(std::abs(moved->g - (com->g + t)) <= 1e-11);
        CHECK(std::abs(moved->delta_g - com->delta_g) <= 1e-11);
    }
}

TEST_CASE("zero width exactly when a single coordinate carries all weight") {
    const double w[] = {1.0, 2.0};
    const double c_same[] = {0.5, 0.5};
    const auto com = compute_center(w, c_same);
    REQUIRE(com.has_value());
    CHECK(com->delta_g == doctest::Approx(0.0));

    const double c_diff[] = {0.5, 0.6};
    const auto com2 = compute_center(w, c_diff);
    REQUIRE(com2.has_value());
    CHECK(com2->delta_g > 0.0);
}

namespace {

struct ColocatedCase {
    NetworkModel model;
    MainBody body;
    VoltageSolution sol;
};

} // namespace

TEST_CASE("colocated generation and load: class centers match, net center absent") {
    std::mt19937_64 rng(54);
    const NetworkModel model = oracles::random_radial_network(rng, 5, 8);
    const MainBody body = extract_main_body(model);

    std::vector<Complex> load(model.size()), gen(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == model.head()) continue;
        load[k] = Complex{0.02, 0.0};
        gen[k] = load[k]; // perfectly compensated everywhere
    }
    // Net injections are zero, so the exact solution is flat.
    const VoltageSolution sol = solve(model, std::vector<Complex>(model.size(), Complex{}));
    REQUIRE(sol.report.converged);

    const CoordInterval window{0.0, body.total_length()};
    const Centers centers = compute_all_centers(model, body, sol, load, gen, window);
    REQUIRE(centers.load.has_value());
    REQUIRE(centers.generation.has_value());
    CHECK(centers.load->g == doctest::Approx(centers.generation->g).epsilon(1e-12));
    CHECK(!centers.net.has_value());
}

TEST_CASE("no generation online: class center absent, net equals load center") {
    std::mt19937_64 rng(55);
    const NetworkModel model = oracles::random_radial_network(rng, 5, 8);
    const MainBody body = extract_main_body(model);

    std::vector<Complex> load(model.size()), gen(model.size());
    std::vector<Complex> inj(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == model.head()) continue;
        load[k] = Complex{0.02, 0.005};
        inj[k] = -load[k];
    }
    const VoltageSolution sol = solve(model, inj);
    REQUIRE(sol.report.converged);

    const CoordInterval window{0.0, body.total_length()};
    const Centers centers = compute_all_centers(model, body, sol, load, gen, window);
    CHECK(!centers.generation.has_value());
    REQUIRE(centers.load.has_value());
    REQUIRE(centers.net.has_value());
    CHECK(centers.net->g == doctest::Approx(centers.load->g).epsilon(1e-12));
    CHECK(centers.net->delta_g == doctest::Approx(centers.load->delta_g).epsilon(1e-12));
}

TEST_CASE("generation near the head sits left of the load center") {
    // Loads concentrated at the line end, generation at the first bus.
    const int n = 8;
    std::vector<Bus> buses;
    std::vector<Segment> segs;
    for (int i = 0; i < n; ++i) {
        Bus b;
        b.id = i;
        b.kind = i == 0 ? BusKind::FeederHead : BusKind::Load;
        buses.push_back(b);
        if (i > 0) segs.push_back({i - 1, i, 0.0, "", Complex{0.02, 0.03}});
    }
    const NetworkModel model(std::move(buses), std::move(segs), {}, BaseValues{1.0, 1.0});
    const MainBody body = extract_main_body(model);

    std::vector<Complex> load(model.size()), gen(model.size()), inj(model.size());
    load[model.index_of(6)] = Complex{0.05, 0.01};
    load[model.index_of(7)] = Complex{0.06, 0.01};
    gen[model.index_of(1)] = Complex{0.03, 0.0};
    for (std::size_t k = 0; k < model.size(); ++k) inj[k] = gen[k] - load[k];

    const VoltageSolution sol = solve(model, inj);
    REQUIRE(sol.report.converged);
    const Centers centers = compute_all_centers(model, body, sol, load, gen,
                                                {0.0, body.total_length()});
    REQUIRE(centers.generation.has_value());
    REQUIRE(centers.load.has_value());
    CHECK(centers.generation->g < centers.load->g);
}

TEST_CASE("window restriction drops masses outside the interval") {
    std::mt19937_64 rng(56);
    const NetworkModel model = oracles::random_radial_network(rng, 6, 10);
    const MainBody body = extract_main_body(model);

    std::vector<Complex> load(model.size()), gen(model.size()), inj(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == model.head()) continue;
        load[k] = Complex{0.02, 0.004};
        inj[k] = -load[k];
    }
    const VoltageSolution sol = solve(model, inj);
    REQUIRE(sol.report.converged);

    const double mid = body.total_length() / 2.0;
    const Centers left = compute_all_centers(model, body, sol, load, gen, {0.0, mid});
    if (left.load) {
        CHECK(left.load->g <= mid + 1e-12);
        CHECK(left.load->g >= -1e-12);
    }
}
