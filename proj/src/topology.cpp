#include "vrcom/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vrcom {

MainBody extract_main_body(const NetworkModel& model) {
    const std::size_t n = model.size();
    const std::size_t head = model.head();

    // Accumulated |Z| from the head, summed in path order so that any
    // root-to-leaf total is reproducible by a plain forward walk.
    std::vector<double> coord(n, 0.0);
    std::vector<std::size_t> parent(n, n);
    std::vector<std::size_t> order;
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
            coord[a.bus] = coord[u] + std::abs(model.segment_impedance_pu(a.segment));
            stack.push_back(a.bus);
        }
    }

    // Terminal of the main body: the leaf with the greatest accumulated
    // impedance; equal totals resolve to the lower bus id.
    std::size_t best_leaf = head;
    double best_coord = -1.0;
    for (std::size_t u = 0; u < n; ++u) {
        if (u == head) continue;
        const bool leaf = model.neighbors(u).size() == 1;
        if (!leaf) continue;
        if (coord[u] > best_coord ||
            (coord[u] == best_coord && model.id_of(u) < model.id_of(best_leaf))) {
            best_coord = coord[u];
            best_leaf = u;
        }
    }
    if (n == 1) best_leaf = head;

    MainBody body;
    for (std::size_t u = best_leaf;; u = parent[u]) {
        body.chain.push_back(u);
        if (u == head) break;
    }
    std::reverse(body.chain.begin(), body.chain.end());

    body.chain_coordinate.resize(body.chain.size());
    body.branch_buses.resize(body.chain.size());
    std::vector<std::size_t> chain_pos(n, n);
    for (std::size_t p = 0; p < body.chain.size(); ++p) {
        body.chain_coordinate[p] = coord[body.chain[p]];
        chain_pos[body.chain[p]] = p;
    }

    // Every off-chain bus is concentrated at the first chain ancestor.
    body.coordinate.resize(n);
    body.chain_position.resize(n);
    for (const std::size_t u : order) {
        if (chain_pos[u] != n) {
            body.coordinate[u] = coord[u];
            body.chain_position[u] = chain_pos[u];
        } else {
            const std::size_t coupling = body.chain_position[parent[u]];
            body.chain_position[u] = coupling;
            body.coordinate[u] = body.chain_coordinate[coupling];
            body.branch_buses[coupling].push_back(u);
        }
    }
    for (auto& branch : body.branch_buses)
        std::sort(branch.begin(), branch.end());

    return body;
}

double coordinate_of(const MainBody& body, const NetworkModel& model, int bus_id) {
    return body.coordinate[model.index_of(bus_id)];
}

} // namespace vrcom
