/// @file transport.hpp
/// @brief SAAF-S_N multigroup discretization on the structured mesh: angular
/// quadrature on the unit circle, per-(group,direction) SPD streaming-collision
/// blocks, and matrix-free application of the full transport and fission
/// operators including scattering and specular-reflective coupling.

#ifndef SNKS_TRANSPORT_HPP
#define SNKS_TRANSPORT_HPP

#include <array>
#include <map>
#include <vector>

#include "snks/mesh.hpp"
#include "snks/sparse.hpp"

namespace snks {

/// Per-material multigroup cross sections.
struct MaterialXs {
    std::vector<double> sigma_t;                // [g], cm^-1, > 0
    std::vector<std::vector<double>> sigma_s;   // [g_from][g_to], cm^-1
    std::vector<double> nu_sigma_f;             // [g], cm^-1
    std::vector<double> chi;                    // [g], sums to 1 if fissile
};

struct CrossSectionLibrary {
    int n_groups = 0;
    std::map<int, MaterialXs> materials;

    const MaterialXs& material(int id) const;
    /// Throws if any invariant fails (sigma_t > 0, chi normalized for fissile
    /// materials, per-group scattering sum bounded by sigma_t).
    void validate() const;
};

/// Equally spaced, equally weighted directions on the unit circle with a
/// half-step offset; closed under reflection across either axis. Total weight
/// is 2*pi.
struct AngularQuadrature2D {
    std::vector<std::array<double, 2>> directions;
    std::vector<double> weights;

    int n_dirs() const { return static_cast<int>(directions.size()); }
    /// Index of the direction obtained by flipping the x component.
    int reflect_x(int d) const;
    /// Index of the direction obtained by flipping the y component.
    int reflect_y(int d) const;
};

AngularQuadrature2D build_quadrature(int n_dirs);

/// Aggregate problem description; owns the flux layout
/// index(g, d, node) = (g * N_d + d) * N_nodes + node.
struct TransportProblem {
    StructuredMesh2D mesh;
    CrossSectionLibrary xs;
    AngularQuadrature2D quad;
    int n_groups = 0;

    int n_nodes() const { return mesh.n_nodes(); }
    int n_dirs() const { return quad.n_dirs(); }
    int n_blocks() const { return n_groups * n_dirs(); }
    int size() const { return n_blocks() * n_nodes(); }
    int flux_index(int g, int d, int node) const {
        return (g * n_dirs() + d) * n_nodes() + node;
    }
    void validate() const;
};

/// Streaming + collision + outflow-boundary block for one (group, direction),
/// scaled by the direction weight. Symmetric positive definite.
CsrMatrix assemble_block(const TransportProblem& problem, int g, int d);

/// Block-diagonal operator over (group, direction) blocks, g-major then d.
struct BlockDiagOperator {
    int n_sub = 0;  // rows per block
    std::vector<CsrMatrix> blocks;

    int n_blocks() const { return static_cast<int>(blocks.size()); }
    int size() const { return n_blocks() * n_sub; }
    Vector apply(const Vector& x) const;
    long long total_nnz() const;
};

BlockDiagOperator assemble_preconditioner(const TransportProblem& problem);

/// Matrix-free transport operators. Caches the assembled preconditioner
/// blocks; the scattering, fission, and reflective-coupling terms are applied
/// by element and boundary-edge loops.
class TransportOperators {
public:
    explicit TransportOperators(TransportProblem problem);

    const TransportProblem& problem() const { return problem_; }
    const BlockDiagOperator& preconditioner() const { return prec_; }

    /// y = A x: streaming-collision-outflow minus scattering minus the
    /// specular reflective incoming coupling.
    Vector apply_A(const Vector& x) const;
    /// y = B x: the fission operator against the SAAF-modified test functions.
    Vector apply_B(const Vector& x) const;

private:
    /// y -= contribution of the SAAF-tested source (chi-like per-group nodal
    /// density evaluated elementwise); shared by scattering and fission.
    void apply_saaf_tested_source(const std::vector<Vector>& group_density,
                                  double sign, Vector& y) const;

    TransportProblem problem_;
    BlockDiagOperator prec_;
};

/// Scalar flux of one group: Phi[node] = sum_d w_d x[g, d, node].
Vector scalar_flux(const Vector& x, const TransportProblem& problem, int g);

}  // namespace snks

#endif  // SNKS_TRANSPORT_HPP
