/// @file mesh.hpp
/// @brief Structured 2D mesh with material regions, the element dual graph,
/// hierarchical two-level coordinate-bisection partitioning, and the two
/// node-ownership strategies with the NR balance metric.

#ifndef SNKS_MESH_HPP
#define SNKS_MESH_HPP

#include <array>
#include <vector>

namespace snks {

enum class BoundaryCondition { Vacuum, Reflective };

/// Side indices: 0 left, 1 right, 2 bottom, 3 top.
enum Side { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

/// Structured quadrilateral mesh, row-major element and node numbering.
struct StructuredMesh2D {
    int nx = 0;
    int ny = 0;
    double hx = 0.0;
    double hy = 0.0;
    std::vector<int> material_of_element;
    std::array<BoundaryCondition, 4> boundary_condition_of_side = {
        BoundaryCondition::Vacuum, BoundaryCondition::Vacuum,
        BoundaryCondition::Vacuum, BoundaryCondition::Vacuum};

    int n_elements() const { return nx * ny; }
    int n_nodes() const { return (nx + 1) * (ny + 1); }
    int node_id(int ix, int iy) const { return iy * (nx + 1) + ix; }
    int element_id(int ex, int ey) const { return ey * nx + ex; }

    /// Corner nodes of an element in counterclockwise order
    /// (bottom-left, bottom-right, top-right, top-left).
    std::array<int, 4> element_nodes(int e) const;

    /// Node coordinates.
    double node_x(int node) const { return (node % (nx + 1)) * hx; }
    double node_y(int node) const { return (node / (nx + 1)) * hy; }

    double element_cx(int e) const { return ((e % nx) + 0.5) * hx; }
    double element_cy(int e) const { return ((e / nx) + 0.5) * hy; }
};

struct MeshConfig {
    int nx = 0;
    int ny = 0;
    double hx = 1.0;
    double hy = 1.0;
    int background_material = -1;  // -1 means no background
    /// Rectangular material overrides: (material, ex0, ex1, ey0, ey1) with
    /// inclusive element ranges, applied in order.
    struct Region {
        int material;
        int ex0, ex1, ey0, ey1;
    };
    std::vector<Region> regions;
    std::array<BoundaryCondition, 4> boundary = {
        BoundaryCondition::Vacuum, BoundaryCondition::Vacuum,
        BoundaryCondition::Vacuum, BoundaryCondition::Vacuum};
};

StructuredMesh2D build_mesh(const MeshConfig& config);

/// Element adjacency over shared edges (4-neighborhood).
struct DualGraph {
    int n_vertices = 0;
    std::vector<std::vector<int>> adjacency;
};

DualGraph dual_graph(const StructuredMesh2D& mesh);

struct Partition {
    std::vector<int> part_of_element;
    int np = 0;
    int np1 = 1;
    int np2 = 1;
};

/// Deterministic recursive coordinate bisection along the longer axis.
Partition partition_bisect(const DualGraph& graph, int np,
                           const std::vector<double>& cx,
                           const std::vector<double>& cy);

Partition partition_bisect(const StructuredMesh2D& mesh, int np);

/// Two-stage partition: np1 "big" parts, each split independently into np2
/// small parts; final part id = big_id * np2 + small_id.
Partition hierarchical_partition(const StructuredMesh2D& mesh, int np1, int np2);

struct NodeOwnership {
    std::vector<int> owner_of_node;
    std::vector<int> node_counts;
};

/// Every node goes to the minimum part id among its adjacent elements' parts.
NodeOwnership assign_nodes_lowest_rank(const StructuredMesh2D& mesh,
                                       const Partition& partition);

/// Interior nodes go to their unique part; two-part interface nodes are split
/// into near-equal halves per part pair; nodes touching three or more parts go
/// to the adjacent part with the smallest current owned count.
NodeOwnership assign_nodes_balanced(const StructuredMesh2D& mesh,
                                    const Partition& partition);

/// max(node_counts) / min(node_counts); throws if any part owns no node.
double node_ratio(const NodeOwnership& ownership);

}  // namespace snks

#endif  // SNKS_MESH_HPP
