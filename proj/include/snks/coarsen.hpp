/// @file coarsen.hpp
/// @brief Subspace extraction, the strength-of-connection graph, and the four
/// C/F splitting algorithms: sequential RS, randomized-round CLJP, the hybrid
/// HCLJP (block-interior RS pass 1 seeding CLJP), and aggressive HCLJP.

#ifndef SNKS_COARSEN_HPP
#define SNKS_COARSEN_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "snks/sparse.hpp"
#include "snks/transport.hpp"

namespace snks {

/// Directed strength graph: i depends on j when the coupling -p_ij clears the
/// relative threshold on row i.
struct StrengthGraph {
    int n = 0;
    std::vector<std::vector<int>> depends_on;  // sorted, no self edges
    std::vector<std::vector<int>> influences;  // exact transpose of depends_on
};

enum class CfLabel { Unlabeled, C, F };

/// Total C/F labeling of a strength graph's points.
struct CfSplit {
    std::vector<CfLabel> label;

    int n_coarse() const;
    /// Coarse column index per point, -1 for F-points, in point order.
    std::vector<int> coarse_index() const;
};

/// Diagonal block `which` of a block-diagonal operator with G * N_d blocks.
CsrMatrix extract_subspace(const BlockDiagOperator& p, int n_groups, int n_dirs,
                           int which = 0);

/// Same selection applied to an explicitly stored block-diagonal matrix.
CsrMatrix extract_subspace(const CsrMatrix& p, int n_groups, int n_dirs,
                           int which = 0);

/// Edge i -> j iff j != i and -p_ij >= theta * max_{k != i}(-p_ik); rows whose
/// strongest off-diagonal coupling is nonpositive get no dependencies.
StrengthGraph strength_graph(const CsrMatrix& p_s, double theta);

/// Initial measures m_i = |influences(i)|.
std::vector<double> initial_measures(const StrengthGraph& graph);

/// Deterministic perturbation in (0, 1) used by the CLJP family.
double cljp_perturbation(int point, std::uint64_t seed);

/// Two-pass sequential RS coarsening. Pass 1 greedily picks maximum-measure
/// points (lowest index on ties); pass 2 promotes an F-point of every strong
/// F-F pair lacking a common C dependency.
CfSplit rs_coarsen(const StrengthGraph& graph);

/// Pass 1 of RS only, restricted to points with mask set; labels outside the
/// mask are left untouched.
void rs_first_pass(const StrengthGraph& graph, const std::vector<bool>& mask,
                   std::vector<CfLabel>& label);

/// Randomized-round CLJP coarsening; deterministic in (graph, initial, seed).
/// `initial` may pre-label points (pass nullptr for none).
CfSplit cljp_coarsen(const StrengthGraph& graph,
                     const std::vector<CfLabel>* initial, std::uint64_t seed);

/// Hybrid coarsening: RS pass 1 on each block's interior subgraph (points all
/// of whose strength neighbors share the block), then CLJP from those labels.
CfSplit hcljp_coarsen(const StrengthGraph& graph,
                      const std::vector<int>& block_of_point,
                      std::uint64_t seed);

/// Aggressive coarsening: HCLJP once for C1, then HCLJP on the second-level
/// graph connecting C1 points joined by a strong path of length <= 2; the
/// final C is a subset of C1.
CfSplit aggressive_coarsen(const StrengthGraph& graph,
                           const std::vector<int>& block_of_point,
                           std::uint64_t seed);

/// CSV dump of (edges, measures, labels) for golden-file comparisons.
void dump_coarsening_csv(const StrengthGraph& graph,
                         const std::vector<double>& measures,
                         const CfSplit& split, std::ostream& out);

}  // namespace snks

#endif  // SNKS_COARSEN_HPP
