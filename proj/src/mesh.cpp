#include "snks/mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace snks {

std::array<int, 4> StructuredMesh2D::element_nodes(int e) const {
    const int ex = e % nx;
    const int ey = e / nx;
    return {node_id(ex, ey), node_id(ex + 1, ey), node_id(ex + 1, ey + 1),
            node_id(ex, ey + 1)};
}

StructuredMesh2D build_mesh(const MeshConfig& config) {
    if (config.nx < 1 || config.ny < 1)
        throw std::invalid_argument("mesh: nx and ny must be >= 1");
    if (!(config.hx > 0.0 && config.hy > 0.0))
        throw std::invalid_argument("mesh: hx and hy must be > 0");

    StructuredMesh2D mesh;
    mesh.nx = config.nx;
    mesh.ny = config.ny;
    mesh.hx = config.hx;
    mesh.hy = config.hy;
    mesh.boundary_condition_of_side = config.boundary;
    mesh.material_of_element.assign(mesh.n_elements(),
                                    config.background_material);
    for (const auto& region : config.regions) {
        if (region.ex0 < 0 || region.ex1 >= config.nx || region.ey0 < 0 ||
            region.ey1 >= config.ny || region.ex0 > region.ex1 ||
            region.ey0 > region.ey1)
            throw std::invalid_argument("mesh: region out of range");
        for (int ey = region.ey0; ey <= region.ey1; ++ey)
            for (int ex = region.ex0; ex <= region.ex1; ++ex)
                mesh.material_of_element[mesh.element_id(ex, ey)] =
                    region.material;
    }
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (mesh.material_of_element[e] < 0)
            throw std::invalid_argument("mesh: element " + std::to_string(e) +
                                        " has no material assigned");
    }
    return mesh;
}

DualGraph dual_graph(const StructuredMesh2D& mesh) {
    DualGraph graph;
    graph.n_vertices = mesh.n_elements();
    graph.adjacency.resize(graph.n_vertices);
    for (int ey = 0; ey < mesh.ny; ++ey) {
        for (int ex = 0; ex < mesh.nx; ++ex) {
            const int e = mesh.element_id(ex, ey);
            if (ex > 0) graph.adjacency[e].push_back(mesh.element_id(ex - 1, ey));
            if (ex + 1 < mesh.nx)
                graph.adjacency[e].push_back(mesh.element_id(ex + 1, ey));
            if (ey > 0) graph.adjacency[e].push_back(mesh.element_id(ex, ey - 1));
            if (ey + 1 < mesh.ny)
                graph.adjacency[e].push_back(mesh.element_id(ex, ey + 1));
            std::sort(graph.adjacency[e].begin(), graph.adjacency[e].end());
        }
    }
    return graph;
}

namespace {

void bisect_recursive(std::vector<int>& elements, int np, int part_base,
                      const std::vector<double>& cx,
                      const std::vector<double>& cy,
                      std::vector<int>& part_of_element) {
    if (np == 1) {
        for (int e : elements) part_of_element[e] = part_base;
        return;
    }
    double xmin = cx[elements[0]], xmax = xmin;
    double ymin = cy[elements[0]], ymax = ymin;
    for (int e : elements) {
        xmin = std::min(xmin, cx[e]);
        xmax = std::max(xmax, cx[e]);
        ymin = std::min(ymin, cy[e]);
        ymax = std::max(ymax, cy[e]);
    }
    const bool split_x = (xmax - xmin) >= (ymax - ymin);
    std::sort(elements.begin(), elements.end(), [&](int a, int b) {
        const double ca = split_x ? cx[a] : cy[a];
        const double cb = split_x ? cx[b] : cy[b];
        if (ca != cb) return ca < cb;
        return a < b;
    });
    const int np_low = np / 2;
    const int np_high = np - np_low;
    const std::size_t cut =
        (elements.size() * static_cast<std::size_t>(np_low)) / np;
    std::vector<int> low(elements.begin(), elements.begin() + cut);
    std::vector<int> high(elements.begin() + cut, elements.end());
    bisect_recursive(low, np_low, part_base, cx, cy, part_of_element);
    bisect_recursive(high, np_high, part_base + np_low, cx, cy,
                     part_of_element);
}

}  // namespace

Partition partition_bisect(const DualGraph& graph, int np,
                           const std::vector<double>& cx,
                           const std::vector<double>& cy) {
    if (np < 1) throw std::invalid_argument("partition: np must be >= 1");
    if (np > graph.n_vertices)
        throw std::invalid_argument("partition: np exceeds element count");
    Partition partition;
    partition.np = np;
    partition.np1 = 1;
    partition.np2 = np;
    partition.part_of_element.assign(graph.n_vertices, -1);
    std::vector<int> elements(graph.n_vertices);
    std::iota(elements.begin(), elements.end(), 0);
    bisect_recursive(elements, np, 0, cx, cy, partition.part_of_element);
    return partition;
}

Partition partition_bisect(const StructuredMesh2D& mesh, int np) {
    std::vector<double> cx(mesh.n_elements()), cy(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        cx[e] = mesh.element_cx(e);
        cy[e] = mesh.element_cy(e);
    }
    return partition_bisect(dual_graph(mesh), np, cx, cy);
}

Partition hierarchical_partition(const StructuredMesh2D& mesh, int np1,
                                 int np2) {
    if (np1 < 1 || np2 < 1)
        throw std::invalid_argument("partition: np1 and np2 must be >= 1");
    if (np1 * np2 > mesh.n_elements())
        throw std::invalid_argument("partition: np1*np2 exceeds element count");
    std::vector<double> cx(mesh.n_elements()), cy(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        cx[e] = mesh.element_cx(e);
        cy[e] = mesh.element_cy(e);
    }
    Partition partition;
    partition.np = np1 * np2;
    partition.np1 = np1;
    partition.np2 = np2;
    partition.part_of_element.assign(mesh.n_elements(), -1);

    std::vector<int> all(mesh.n_elements());
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> big(mesh.n_elements(), -1);
    bisect_recursive(all, np1, 0, cx, cy, big);

    for (int b = 0; b < np1; ++b) {
        std::vector<int> members;
        for (int e = 0; e < mesh.n_elements(); ++e)
            if (big[e] == b) members.push_back(e);
        std::vector<int> small(mesh.n_elements(), -1);
        bisect_recursive(members, np2, 0, cx, cy, small);
        for (int e : members)
            partition.part_of_element[e] = b * np2 + small[e];
    }
    return partition;
}

namespace {

/// Distinct part ids adjacent to each node, sorted.
std::vector<std::vector<int>> parts_of_nodes(const StructuredMesh2D& mesh,
                                             const Partition& partition) {
    std::vector<std::vector<int>> parts(mesh.n_nodes());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const int p = partition.part_of_element[e];
        for (int node : mesh.element_nodes(e)) {
            auto& list = parts[node];
            if (std::find(list.begin(), list.end(), p) == list.end())
                list.push_back(p);
        }
    }
    for (auto& list : parts) std::sort(list.begin(), list.end());
    return parts;
}

}  // namespace

NodeOwnership assign_nodes_lowest_rank(const StructuredMesh2D& mesh,
                                       const Partition& partition) {
    const auto parts = parts_of_nodes(mesh, partition);
    NodeOwnership ownership;
    ownership.owner_of_node.resize(mesh.n_nodes());
    ownership.node_counts.assign(partition.np, 0);
    for (int node = 0; node < mesh.n_nodes(); ++node) {
        const int owner = parts[node].front();
        ownership.owner_of_node[node] = owner;
        ++ownership.node_counts[owner];
    }
    return ownership;
}

NodeOwnership assign_nodes_balanced(const StructuredMesh2D& mesh,
                                    const Partition& partition) {
    const auto parts = parts_of_nodes(mesh, partition);
    NodeOwnership ownership;
    ownership.owner_of_node.assign(mesh.n_nodes(), -1);
    ownership.node_counts.assign(partition.np, 0);

    // Interior nodes are forced; collect interface nodes by part pair.
    std::map<std::pair<int, int>, std::vector<int>> pair_nodes;
    std::vector<int> multi_nodes;
    for (int node = 0; node < mesh.n_nodes(); ++node) {
        const auto& list = parts[node];
        if (list.size() == 1) {
            ownership.owner_of_node[node] = list[0];
            ++ownership.node_counts[list[0]];
        } else if (list.size() == 2) {
            pair_nodes[{list[0], list[1]}].push_back(node);
        } else {
            multi_nodes.push_back(node);
        }
    }

    // Split each two-part interface at the midpoint of the id-sorted list.
    for (auto& [pair, nodes] : pair_nodes) {
        std::sort(nodes.begin(), nodes.end());
        const std::size_t half = nodes.size() / 2;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const int owner = i < half ? pair.first : pair.second;
            ownership.owner_of_node[nodes[i]] = owner;
            ++ownership.node_counts[owner];
        }
    }

    // Multi-part corners go to the least-loaded adjacent part.
    for (int node : multi_nodes) {
        int best = parts[node][0];
        for (int p : parts[node])
            if (ownership.node_counts[p] < ownership.node_counts[best]) best = p;
        ownership.owner_of_node[node] = best;
        ++ownership.node_counts[best];
    }
    return ownership;
}

double node_ratio(const NodeOwnership& ownership) {
    int min_count = -1, max_count = -1;
    for (int c : ownership.node_counts) {
        if (c <= 0)
            throw std::runtime_error("node_ratio: a part owns no nodes");
        if (min_count < 0 || c < min_count) min_count = c;
        if (c > max_count) max_count = c;
    }
    if (min_count < 0) throw std::runtime_error("node_ratio: empty partition");
    return static_cast<double>(max_count) / static_cast<double>(min_count);
}

}  // namespace snks
