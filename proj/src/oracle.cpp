#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "snks/driver.hpp"

namespace snks {

namespace {

constexpr int kOracleCap = 20000;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::array<double, 4> shape_values(double xi, double eta) {
    return {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
}

std::array<double, 4> shape_dxi(double, double eta) {
    return {-(1 - eta), (1 - eta), eta, -eta};
}

std::array<double, 4> shape_deta(double xi, double) {
    return {-(1 - xi), -xi, xi, (1 - xi)};
}

}  // namespace

DenseOperators assemble_dense_operators(const TransportProblem& problem) {
    const auto& mesh = problem.mesh;
    const auto& quad = problem.quad;
    const int n = problem.size();
    DenseOperators ops;
    ops.n = n;
    ops.a.assign(static_cast<std::size_t>(n) * n, 0.0);
    ops.b.assign(static_cast<std::size_t>(n) * n, 0.0);
    auto a_at = [&](int r, int c) -> double& {
        return ops.a[static_cast<std::size_t>(r) * n + c];
    };
    auto b_at = [&](int r, int c) -> double& {
        return ops.b[static_cast<std::size_t>(r) * n + c];
    };

    const double offset = 0.5 / std::sqrt(3.0);
    const double pts[2] = {0.5 - offset, 0.5 + offset};
    const double wq = mesh.hx * mesh.hy / 4.0;

    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& m = problem.xs.material(mesh.material_of_element[e]);
        const auto nodes = mesh.element_nodes(e);
        for (int qj = 0; qj < 2; ++qj) {
            for (int qi = 0; qi < 2; ++qi) {
                const double xi = pts[qi];
                const double eta = pts[qj];
                const auto nv = shape_values(xi, eta);
                const auto dxi = shape_dxi(xi, eta);
                const auto deta = shape_deta(xi, eta);
                std::array<double, 4> ndx, ndy;
                for (int i = 0; i < 4; ++i) {
                    ndx[i] = dxi[i] / mesh.hx;
                    ndy[i] = deta[i] / mesh.hy;
                }

                for (int g = 0; g < problem.n_groups; ++g) {
                    const double sigt = m.sigma_t[g];
                    for (int d = 0; d < quad.n_dirs(); ++d) {
                        const double wd = quad.weights[d];
                        const double ox = quad.directions[d][0];
                        const double oy = quad.directions[d][1];
                        std::array<double, 4> stream, test;
                        for (int i = 0; i < 4; ++i) {
                            stream[i] = ox * ndx[i] + oy * ndy[i];
                            test[i] = stream[i] / sigt + nv[i];
                        }

                        // Streaming + collision, same (g, d) block.
                        for (int i = 0; i < 4; ++i) {
                            const int row = problem.flux_index(g, d, nodes[i]);
                            for (int j = 0; j < 4; ++j) {
                                a_at(row, problem.flux_index(g, d, nodes[j])) +=
                                    wd * wq *
                                    (stream[i] * stream[j] / sigt +
                                     sigt * nv[i] * nv[j]);
                            }
                        }

                        // Scattering and fission against the SAAF tests,
                        // coupling every source group and direction.
                        for (int gs = 0; gs < problem.n_groups; ++gs) {
                            const double scatter = m.sigma_s[gs][g] / kTwoPi;
                            const double fission =
                                m.chi[g] * m.nu_sigma_f[gs] / kTwoPi;
                            if (scatter == 0.0 && fission == 0.0) continue;
                            for (int ds = 0; ds < quad.n_dirs(); ++ds) {
                                const double ws = quad.weights[ds];
                                for (int i = 0; i < 4; ++i) {
                                    const int row =
                                        problem.flux_index(g, d, nodes[i]);
                                    for (int j = 0; j < 4; ++j) {
                                        const int col = problem.flux_index(
                                            gs, ds, nodes[j]);
                                        const double basis =
                                            wd * wq * test[i] * ws * nv[j];
                                        a_at(row, col) -= scatter * basis;
                                        b_at(row, col) += fission * basis;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Boundary terms: outgoing half-range mass on every side, plus the
    // specular incoming coupling on reflective sides.
    struct SideGeom {
        double nx, ny;
    };
    const SideGeom normals[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (int side = 0; side < 4; ++side) {
        const bool reflective = mesh.boundary_condition_of_side[side] ==
                                BoundaryCondition::Reflective;
        std::vector<std::array<int, 2>> edges;
        double length = 0.0;
        if (side == kLeft || side == kRight) {
            const int ix = side == kLeft ? 0 : mesh.nx;
            length = mesh.hy;
            for (int iy = 0; iy < mesh.ny; ++iy)
                edges.push_back({mesh.node_id(ix, iy), mesh.node_id(ix, iy + 1)});
        } else {
            const int iy = side == kBottom ? 0 : mesh.ny;
            length = mesh.hx;
            for (int ix = 0; ix < mesh.nx; ++ix)
                edges.push_back({mesh.node_id(ix, iy), mesh.node_id(ix + 1, iy)});
        }
        const double mass[2][2] = {{length / 3.0, length / 6.0},
                                   {length / 6.0, length / 3.0}};

        for (int g = 0; g < problem.n_groups; ++g) {
            for (int d = 0; d < quad.n_dirs(); ++d) {
                const double wd = quad.weights[d];
                const double mu = quad.directions[d][0] * normals[side].nx +
                                  quad.directions[d][1] * normals[side].ny;
                if (mu > 0.0) {
                    for (const auto& edge : edges)
                        for (int i = 0; i < 2; ++i)
                            for (int j = 0; j < 2; ++j)
                                a_at(problem.flux_index(g, d, edge[i]),
                                     problem.flux_index(g, d, edge[j])) +=
                                    wd * mu * mass[i][j];
                } else if (mu < 0.0 && reflective) {
                    const int r = (side == kLeft || side == kRight)
                                      ? quad.reflect_x(d)
                                      : quad.reflect_y(d);
                    for (const auto& edge : edges)
                        for (int i = 0; i < 2; ++i)
                            for (int j = 0; j < 2; ++j)
                                a_at(problem.flux_index(g, d, edge[i]),
                                     problem.flux_index(g, r, edge[j])) -=
                                    wd * (-mu) * mass[i][j];
                }
            }
        }
    }
    return ops;
}

OracleResult oracle(const TransportProblem& problem) {
    if (problem.size() > kOracleCap)
        throw std::runtime_error(
            "oracle: problem has " + std::to_string(problem.size()) +
            " unknowns, above the dense cap of " + std::to_string(kOracleCap));
    return oracle_power(assemble_dense_operators(problem));
}

OracleResult oracle_power(const DenseOperators& dense) {
    const int n = dense.n;
    const DenseFactor factor = dense_factor(dense.a, n);

    auto apply_b = [&](const Vector& x) {
        Vector y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            const double* row = dense.b.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) sum += row[j] * x[j];
            y[i] = sum;
        }
        return y;
    };

    Vector x(n, 1.0);
    double k = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        Vector source = apply_b(x);
        const double nb = norm2(source);
        if (nb == 0.0)
            throw std::runtime_error("oracle: zero fission source");
        for (double& v : source) v /= nb;
        x = factor.solve(source);
        const double k_next = norm2(apply_b(x));
        const bool settled = iter > 0 && std::abs(k_next - k) <= 1e-12 * k_next;
        k = k_next;
        if (settled) break;
    }
    return {k, std::move(x)};
}

OracleResult oracle(const RunConfig& config) {
    return oracle(build_problem(config));
}

}  // namespace snks
