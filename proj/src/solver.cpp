#include "snks/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace snks {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector subtract(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

void add_scaled(Vector& y, const Vector& x, double alpha) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

double EigenSolveParams::effective_fd_delta() const {
    if (fd_delta > 0.0) return fd_delta;
    return std::sqrt(std::numeric_limits<double>::epsilon());
}

void EigenSolveParams::validate() const {
    if (!(newton_rtol > 0.0) || !(inner_linear_rtol > 0.0) ||
        !(power_inner_rtol > 0.0) || !(tol_psi > 0.0) || !(tol_k > 0.0))
        throw std::invalid_argument("solver params: tolerances must be > 0");
    if (power_iters_init < 0 || max_newton < 1 || max_power < 1)
        throw std::invalid_argument("solver params: iteration counts invalid");
    if (gmres_restart < 1 || gmres_max_iters < 1)
        throw std::invalid_argument("solver params: GMRES settings invalid");
}

SchwarzData build_schwarz(const BlockDiagOperator& op,
                          const std::vector<int>& owner_of_point,
                          int n_subdomains, bool allow_empty) {
    if (static_cast<int>(owner_of_point.size()) != op.n_sub)
        throw std::invalid_argument("schwarz: owner map size mismatch");
    if (n_subdomains < 1)
        throw std::invalid_argument("schwarz: n_subdomains < 1");

    std::vector<std::vector<int>> points(n_subdomains);
    for (int p = 0; p < op.n_sub; ++p) {
        const int owner = owner_of_point[p];
        if (owner < 0 || owner >= n_subdomains)
            throw std::invalid_argument("schwarz: owner out of range");
        points[owner].push_back(p);
    }

    SchwarzData data;
    data.rows.resize(n_subdomains);
    data.blocks.resize(n_subdomains);
    for (int s = 0; s < n_subdomains; ++s) {
        if (points[s].empty()) {
            if (!allow_empty)
                throw std::runtime_error("schwarz: subdomain " +
                                         std::to_string(s) + " owns no rows");
            continue;
        }
        const int n_owned = static_cast<int>(points[s].size());
        for (int b = 0; b < op.n_blocks(); ++b)
            for (int p : points[s]) data.rows[s].push_back(b * op.n_sub + p);
        CsrBuilder builder(n_owned * op.n_blocks(), n_owned * op.n_blocks());
        for (int b = 0; b < op.n_blocks(); ++b) {
            const CsrMatrix sub =
                extract_principal_submatrix(op.blocks[b], points[s]);
            const int base = b * n_owned;
            for (int i = 0; i < sub.n_rows; ++i)
                for (int k = sub.row_offsets[i]; k < sub.row_offsets[i + 1];
                     ++k)
                    builder.add(base + i, base + sub.col_indices[k],
                                sub.values[k]);
        }
        data.blocks[s] = builder.build();
    }
    return data;
}

Vector one_level_apply(const SchwarzData& data, const Vector& r) {
    Vector e(r.size(), 0.0);
    for (std::size_t s = 0; s < data.rows.size(); ++s) {
        const auto& rows = data.rows[s];
        if (rows.empty()) continue;
        Vector r_local(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) r_local[i] = r[rows[i]];
        Vector x_local(rows.size(), 0.0);
        sor_sweep(data.blocks[s], x_local, r_local, 1.0, SorMode::Symmetric, 1);
        for (std::size_t i = 0; i < rows.size(); ++i) e[rows[i]] += x_local[i];
    }
    return e;
}

MasmPreconditioner::MasmPreconditioner(MultilevelHierarchy hierarchy,
                                       int n_subdomains,
                                       PreconditionerKind kind)
    : hierarchy_(std::move(hierarchy)), kind_(kind) {
    const auto start = Clock::now();
    if (kind_ != PreconditionerKind::None) {
        const int n_smoothed = kind_ == PreconditionerKind::MasmSub
                                   ? hierarchy_.n_levels()
                                   : 1;
        for (int l = 0; l < n_smoothed; ++l)
            schwarz_.push_back(build_schwarz(hierarchy_.levels[l].op,
                                             hierarchy_.levels[l].block_of_point,
                                             n_subdomains, l > 0));
    }
    if (kind_ == PreconditionerKind::MasmSub) {
        for (int l = 0; l + 1 < hierarchy_.n_levels(); ++l) {
            interp_full_.push_back(expand_interpolation(
                hierarchy_.levels[l].interp, hierarchy_.levels[l].op.n_blocks()));
            interp_full_t_.push_back(transpose(interp_full_.back()));
        }
    }
    setup_seconds_ = seconds_since(start);
}

int MasmPreconditioner::size() const {
    return hierarchy_.levels.front().op.size();
}

Vector MasmPreconditioner::cycle(const Vector& r, int level) const {
    const BlockDiagOperator& op = hierarchy_.levels[level].op;
    if (level + 1 == hierarchy_.n_levels()) {
        // Redundant dense solve per (group, direction) block.
        Vector x(r.size());
        for (int b = 0; b < op.n_blocks(); ++b) {
            Vector rb(r.begin() + static_cast<std::size_t>(b) * op.n_sub,
                      r.begin() + static_cast<std::size_t>(b + 1) * op.n_sub);
            const Vector xb = hierarchy_.coarsest[b].solve(rb);
            std::copy(xb.begin(), xb.end(),
                      x.begin() + static_cast<std::size_t>(b) * op.n_sub);
        }
        return x;
    }

    const int m_pre = 2, m_post = 2;
    Vector x(r.size(), 0.0);
    for (int it = 0; it < m_pre; ++it) {
        const Vector res = it == 0 ? r : subtract(r, op.apply(x));
        const Vector e = one_level_apply(schwarz_[level], res);
        add_scaled(x, e, 1.0);
    }

    const Vector res = subtract(r, op.apply(x));
    const Vector r_coarse = spmv(interp_full_t_[level], res);
    const Vector e_coarse = cycle(r_coarse, level + 1);
    const Vector correction = spmv(interp_full_[level], e_coarse);
    add_scaled(x, correction, 1.0);

    for (int it = 0; it < m_post; ++it) {
        const Vector post_res = subtract(r, op.apply(x));
        const Vector e = one_level_apply(schwarz_[level], post_res);
        add_scaled(x, e, 1.0);
    }
    return x;
}

Vector MasmPreconditioner::apply(const Vector& r) const {
    if (static_cast<int>(r.size()) != size())
        throw std::invalid_argument("preconditioner: dimension mismatch");
    switch (kind_) {
        case PreconditionerKind::None: return r;
        case PreconditionerKind::MasmOneLevel:
            return one_level_apply(schwarz_[0], r);
        case PreconditionerKind::MasmSub: return cycle(r, 0);
    }
    return r;
}

namespace {

Vector residual_from_parts(const TransportOperators& ops, const Vector& psi) {
    const Vector a = ops.apply_A(psi);
    const Vector b = ops.apply_B(psi);
    const double nb = norm2(b);
    if (nb == 0.0)
        throw std::runtime_error(
            "residual: zero fission source (no fissile material or zero flux)");
    Vector f(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) f[i] = a[i] - b[i] / nb;
    return f;
}

Vector jacobian_action(const TransportOperators& ops, const Vector& psi,
                       const Vector& f0, const Vector& v, double delta) {
    const double nv = norm2(v);
    if (nv == 0.0) return Vector(v.size(), 0.0);
    const double d = delta * (1.0 + norm2(psi)) / nv;
    Vector shifted = psi;
    add_scaled(shifted, v, d);
    const Vector f1 = residual_from_parts(ops, shifted);
    Vector jv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) jv[i] = (f1[i] - f0[i]) / d;
    return jv;
}

}  // namespace

Vector residual_F(const TransportOperators& ops, const Vector& psi) {
    return residual_from_parts(ops, psi);
}

Vector jfnk_apply_jacobian(const TransportOperators& ops, const Vector& psi,
                           const Vector& v, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("jfnk: delta must be > 0");
    if (norm2(v) == 0.0) return Vector(v.size(), 0.0);
    const Vector f0 = residual_from_parts(ops, psi);
    return jacobian_action(ops, psi, f0, v, delta);
}

Vector jfnk_apply_jacobian(const ResidualMap& residual, const Vector& psi,
                           const Vector& v, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("jfnk: delta must be > 0");
    const double nv = norm2(v);
    if (nv == 0.0) return Vector(v.size(), 0.0);
    const double d = delta * (1.0 + norm2(psi)) / nv;
    Vector shifted = psi;
    add_scaled(shifted, v, d);
    const Vector f1 = residual(shifted);
    const Vector f0 = residual(psi);
    Vector jv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) jv[i] = (f1[i] - f0[i]) / d;
    return jv;
}

namespace {

/// One inverse-power update; returns the GMRES iterations spent.
int power_step(const TransportOperators& ops, const MasmPreconditioner& prec,
               const EigenSolveParams& params, Vector& psi, double& k,
               SolverStats& stats) {
    Vector b = ops.apply_B(psi);
    const double nb = norm2(b);
    if (nb == 0.0)
        throw std::runtime_error("inverse power: zero fission source");
    for (double& v : b) v /= nb;

    const LinearOp apply_a = [&](const Vector& x, Vector& y) {
        const auto start = Clock::now();
        y = ops.apply_A(x);
        stats.mf_seconds += seconds_since(start);
    };
    const LinearOp apply_prec = [&](const Vector& x, Vector& y) {
        const auto start = Clock::now();
        y = prec.apply(x);
        stats.pcapply_seconds += seconds_since(start);
    };
    const auto solve_start = Clock::now();
    auto [next, report] =
        gmres(apply_a, apply_prec, b, params.power_inner_rtol,
              params.gmres_max_iters, params.gmres_restart);
    stats.lsolver_seconds += seconds_since(solve_start);
    if (!report.converged)
        throw std::runtime_error(
            "inverse power: inner GMRES failed to converge (" +
            std::to_string(report.iterations) + " iterations)");
    psi = std::move(next);
    k = norm2(ops.apply_B(psi));
    return report.iterations;
}

}  // namespace

EigenResult inverse_power(const TransportOperators& ops,
                          const MasmPreconditioner& prec,
                          const EigenSolveParams& params, const Vector* psi0) {
    params.validate();
    EigenResult result;
    result.stats.pcsetup_seconds = prec.setup_seconds();
    const auto start = Clock::now();
    Vector psi = psi0 ? *psi0 : Vector(ops.problem().size(), 1.0);
    double k_prev = 0.0;
    bool converged = false;
    for (int iter = 0; iter < params.max_power; ++iter) {
        const Vector psi_prev = psi;
        double k = 0.0;
        const int its = power_step(ops, prec, params, psi, k, result.stats);
        result.stats.li += its;
        result.stats.li_init += its;
        result.stats.k_history.push_back(k);

        const Vector diff = subtract(psi, psi_prev);
        const double dpsi = norm2(diff) / norm2(psi);
        const double dk = iter == 0 ? 1.0 : std::abs(k - k_prev) / k;
        k_prev = k;
        if (dpsi <= params.tol_psi && dk <= params.tol_k) {
            converged = true;
            break;
        }
    }
    result.stats.newton_seconds = seconds_since(start);
    result.k = k_prev;
    result.psi = std::move(psi);
    if (!converged)
        throw NonconvergenceError("inverse power: max iterations reached",
                                  result.stats);
    return result;
}

EigenResult newton_eigen(const TransportOperators& ops,
                         const MasmPreconditioner& prec,
                         const EigenSolveParams& params, const Vector* psi0) {
    params.validate();
    EigenResult result;
    result.stats.pcsetup_seconds = prec.setup_seconds();
    const auto start = Clock::now();
    const double delta = params.effective_fd_delta();

    Vector psi = psi0 ? *psi0 : Vector(ops.problem().size(), 1.0);
    for (int iter = 0; iter < params.power_iters_init; ++iter) {
        double k = 0.0;
        const int its = power_step(ops, prec, params, psi, k, result.stats);
        result.stats.li += its;
        result.stats.li_init += its;
        result.stats.k_history.push_back(k);
    }

    Vector f = residual_F(ops, psi);
    const double f_ref = norm2(f);
    bool converged = f_ref == 0.0;
    while (!converged && result.stats.ni < params.max_newton) {
        const LinearOp apply_j = [&](const Vector& v, Vector& y) {
            const auto mf_start = Clock::now();
            y = jacobian_action(ops, psi, f, v, delta);
            result.stats.mf_seconds += seconds_since(mf_start);
        };
        const LinearOp apply_prec = [&](const Vector& x, Vector& y) {
            const auto pc_start = Clock::now();
            y = prec.apply(x);
            result.stats.pcapply_seconds += seconds_since(pc_start);
        };
        Vector rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];

        const auto solve_start = Clock::now();
        auto [step, report] =
            gmres(apply_j, apply_prec, rhs, params.inner_linear_rtol,
                  params.gmres_max_iters, params.gmres_restart);
        result.stats.lsolver_seconds += seconds_since(solve_start);
        result.stats.li += report.iterations;

        add_scaled(psi, step, 1.0);
        ++result.stats.ni;
        f = residual_F(ops, psi);
        result.stats.k_history.push_back(norm2(ops.apply_B(psi)));
        converged = norm2(f) / f_ref <= params.newton_rtol;
    }
    result.stats.newton_seconds = seconds_since(start);
    result.k = norm2(ops.apply_B(psi));
    result.psi = std::move(psi);
    if (!converged)
        throw NonconvergenceError("newton: max iterations reached",
                                  result.stats);
    return result;
}

}  // namespace snks
