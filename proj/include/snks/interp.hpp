/// @file interp.hpp
/// @brief Direct, classical, and multipass interpolation on the subspace
/// matrix, block-diagonal expansion to the full phase space, and construction
/// of the Galerkin multilevel hierarchy.

#ifndef SNKS_INTERP_HPP
#define SNKS_INTERP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "snks/coarsen.hpp"
#include "snks/sparse.hpp"
#include "snks/transport.hpp"

namespace snks {

/// Subspace interpolation (n_fine x n_coarse). C-point rows are injection;
/// every F-point row is nonempty.
struct Interpolation {
    CsrMatrix matrix;
    std::vector<int> coarse_index_of;  // -1 for F-points
};

/// w_ij = -(p_ij/p_ii) (sum_k p_ik / sum_{l in C_i} p_il) over the strong
/// coarse dependencies C_i, with k running over every stored neighbor.
/// Throws if an F-point has no strong C dependency.
Interpolation direct_interpolation(const CsrMatrix& p_s,
                                   const StrengthGraph& graph,
                                   const CfSplit& split);

/// Ruge-Stuben classical interpolation; requires every strong F-F pair to
/// share a common C dependency (weak neighbors fold into the diagonal).
Interpolation classical_interpolation(const CsrMatrix& p_s,
                                      const StrengthGraph& graph,
                                      const CfSplit& split);

/// Direct weights for F-points with coarse dependencies, then repeated
/// substitution of already-interpolated strong neighbors for the rest.
/// Throws if some F-point is never reached.
Interpolation multipass_interpolation(const CsrMatrix& p_s,
                                      const StrengthGraph& graph,
                                      const CfSplit& split);

/// Block-diagonal replication of the subspace interpolation over the
/// (group, direction) blocks of the flux layout.
CsrMatrix expand_interpolation(const Interpolation& interp, int n_blocks);

struct HierarchyParams {
    double theta = 0.25;
    int agg_levels = 10;       // aggressive coarsening + multipass up top
    int max_levels = 25;
    int coarse_cap = 200;      // stop once the subspace has this few rows
    std::uint64_t seed = 0;
    int subspace_block = 0;    // (group, direction) block used for coarsening
    bool use_classical = false;  // classical instead of direct below agg levels
};

struct HierarchyLevel {
    BlockDiagOperator op;
    std::vector<int> block_of_point;  // subdomain of each subspace point
    Interpolation interp;             // to the next level; empty on the last
    std::string scheme;               // coarsening scheme, "coarsest" at end
};

struct MultilevelHierarchy {
    std::vector<HierarchyLevel> levels;
    std::vector<DenseFactor> coarsest;  // one factor per (group, direction)
    HierarchyParams params;

    int n_levels() const { return static_cast<int>(levels.size()); }
};

/// Coarsens the chosen subspace block level by level (aggressive HCLJP with
/// multipass interpolation for the first agg_levels, HCLJP with direct
/// interpolation below), expands the interpolation blockwise, and forms each
/// next level by a per-block Galerkin product. Subdomain ids propagate to
/// coarse levels through their C-points.
MultilevelHierarchy build_hierarchy(const BlockDiagOperator& p,
                                    const HierarchyParams& params,
                                    const std::vector<int>& block_of_point);

struct HierarchyLevelSummary {
    int rows = 0;          // subspace rows
    long long nnz = 0;     // total over all blocks
    std::string scheme;
};

struct HierarchySummary {
    std::vector<HierarchyLevelSummary> levels;
    double grid_complexity = 0.0;
    double operator_complexity = 0.0;
};

HierarchySummary hierarchy_summary(const MultilevelHierarchy& h);
std::string format_hierarchy_summary(const HierarchySummary& summary);

}  // namespace snks

#endif  // SNKS_INTERP_HPP
