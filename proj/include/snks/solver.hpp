/// @file solver.hpp
/// @brief Newton-Krylov-Schwarz k-eigenvalue solver: one-level nonoverlapping
/// Schwarz with SOR subdomain solves, the recursive multilevel additive
/// Schwarz cycle, the Jacobian-free Newton residual machinery, inverse power
/// initialization, and the phase-timed solver statistics.

#ifndef SNKS_SOLVER_HPP
#define SNKS_SOLVER_HPP

#include <stdexcept>
#include <vector>

#include "snks/interp.hpp"
#include "snks/sparse.hpp"
#include "snks/transport.hpp"

namespace snks {

struct EigenSolveParams {
    double newton_rtol = 1e-6;
    double inner_linear_rtol = 0.5;
    int power_iters_init = 4;
    double power_inner_rtol = 1e-2;
    double tol_psi = 1e-6;
    double tol_k = 1e-6;
    int max_newton = 50;
    int max_power = 100;
    double fd_delta = 0.0;  // 0 means sqrt(machine epsilon)
    int gmres_restart = 30;
    int gmres_max_iters = 2000;

    double effective_fd_delta() const;
    void validate() const;
};

struct SolverStats {
    int ni = 0;       // Newton iterations
    int li = 0;       // all GMRES iterations, including the init phase
    int li_init = 0;  // GMRES iterations spent in inverse-power init
    std::vector<double> k_history;
    double newton_seconds = 0.0;
    double lsolver_seconds = 0.0;
    double mf_seconds = 0.0;
    double pcsetup_seconds = 0.0;
    double pcapply_seconds = 0.0;
};

/// Nonoverlapping subdomain row sets and their extracted diagonal blocks.
struct SchwarzData {
    std::vector<std::vector<int>> rows;  // sorted global indices per subdomain
    std::vector<CsrMatrix> blocks;
};

/// Subdomain s owns every (block, point) row whose point it owns. Empty
/// subdomains throw unless allow_empty is set (they are skipped on apply).
SchwarzData build_schwarz(const BlockDiagOperator& op,
                          const std::vector<int>& owner_of_point,
                          int n_subdomains, bool allow_empty = false);

/// e = sum_i R_i^T solve(P_i, R_i r) with one symmetric SOR sweep (omega = 1,
/// zero initial guess) per subdomain.
Vector one_level_apply(const SchwarzData& data, const Vector& r);

enum class PreconditionerKind { MasmSub, MasmOneLevel, None };

/// Right preconditioner for the Jacobian systems. MasmSub runs the recursive
/// multilevel cycle (two Schwarz-preconditioned Richardson iterations before
/// and after the coarse correction, dense solves at the bottom); MasmOneLevel
/// uses only the level-0 Schwarz sweep; None is the identity.
class MasmPreconditioner {
public:
    MasmPreconditioner(MultilevelHierarchy hierarchy, int n_subdomains,
                       PreconditionerKind kind);

    Vector apply(const Vector& r) const;
    int size() const;
    const MultilevelHierarchy& hierarchy() const { return hierarchy_; }
    PreconditionerKind kind() const { return kind_; }
    double setup_seconds() const { return setup_seconds_; }

private:
    Vector cycle(const Vector& r, int level) const;

    MultilevelHierarchy hierarchy_;
    PreconditionerKind kind_;
    std::vector<SchwarzData> schwarz_;
    std::vector<CsrMatrix> interp_full_;
    std::vector<CsrMatrix> interp_full_t_;
    double setup_seconds_ = 0.0;
};

/// F(psi) = A psi - B psi / ||B psi||; throws on a zero fission source.
Vector residual_F(const TransportOperators& ops, const Vector& psi);

/// Forward-difference Jacobian action (F(psi + d v) - F(psi)) / d with
/// d = delta (1 + ||psi||) / ||v||; returns zero for v = 0.
Vector jfnk_apply_jacobian(const TransportOperators& ops, const Vector& psi,
                           const Vector& v, double delta);

/// Same differencing against an arbitrary residual map (e.g. the pure
/// transport operator with the fission term disabled).
using ResidualMap = std::function<Vector(const Vector&)>;
Vector jfnk_apply_jacobian(const ResidualMap& residual, const Vector& psi,
                           const Vector& v, double delta);

struct EigenResult {
    double k = 0.0;
    Vector psi;
    SolverStats stats;
};

struct NonconvergenceError : std::runtime_error {
    NonconvergenceError(const std::string& message, SolverStats s)
        : std::runtime_error(message), stats(std::move(s)) {}
    SolverStats stats;
};

/// Inverse power iteration with the inner solves done by preconditioned GMRES
/// at the loose power tolerance; stops on both the flux and eigenvalue
/// relative criteria.
EigenResult inverse_power(const TransportOperators& ops,
                          const MasmPreconditioner& prec,
                          const EigenSolveParams& params,
                          const Vector* psi0 = nullptr);

/// A few inverse-power iterations to seed the flux, then inexact Newton on
/// the residual with matrix-free GMRES and the MASM right preconditioner.
EigenResult newton_eigen(const TransportOperators& ops,
                         const MasmPreconditioner& prec,
                         const EigenSolveParams& params,
                         const Vector* psi0 = nullptr);

}  // namespace snks

#endif  // SNKS_SOLVER_HPP
