#include "snks/transport.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace snks {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tabulated bilinear shape data at the 2x2 Gauss points of one uniform
/// element. Node order matches StructuredMesh2D::element_nodes.
struct ShapeTable {
    // [gauss point][local node]
    double n[4][4];
    double dx[4][4];
    double dy[4][4];
    double wq;  // quadrature weight including the Jacobian

    ShapeTable(double hx, double hy) {
        const double offset = 0.5 / std::sqrt(3.0);
        const double pts[2] = {0.5 - offset, 0.5 + offset};
        int q = 0;
        for (int j = 0; j < 2; ++j) {
            for (int i = 0; i < 2; ++i, ++q) {
                const double xi = pts[i];
                const double eta = pts[j];
                n[q][0] = (1 - xi) * (1 - eta);
                n[q][1] = xi * (1 - eta);
                n[q][2] = xi * eta;
                n[q][3] = (1 - xi) * eta;
                const double dxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
                const double deta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
                for (int a = 0; a < 4; ++a) {
                    dx[q][a] = dxi[a] / hx;
                    dy[q][a] = deta[a] / hy;
                }
            }
        }
        wq = hx * hy / 4.0;
    }
};

struct BoundaryEdge {
    int n0, n1;      // nodes in order along the side
    double length;
};

std::array<double, 2> side_normal(int side) {
    switch (side) {
        case kLeft: return {-1.0, 0.0};
        case kRight: return {1.0, 0.0};
        case kBottom: return {0.0, -1.0};
        default: return {0.0, 1.0};
    }
}

std::vector<BoundaryEdge> boundary_edges(const StructuredMesh2D& mesh,
                                         int side) {
    std::vector<BoundaryEdge> edges;
    if (side == kLeft || side == kRight) {
        const int ix = side == kLeft ? 0 : mesh.nx;
        for (int iy = 0; iy < mesh.ny; ++iy)
            edges.push_back({mesh.node_id(ix, iy), mesh.node_id(ix, iy + 1),
                             mesh.hy});
    } else {
        const int iy = side == kBottom ? 0 : mesh.ny;
        for (int ix = 0; ix < mesh.nx; ++ix)
            edges.push_back({mesh.node_id(ix, iy), mesh.node_id(ix + 1, iy),
                             mesh.hx});
    }
    return edges;
}

}  // namespace

const MaterialXs& CrossSectionLibrary::material(int id) const {
    auto it = materials.find(id);
    if (it == materials.end())
        throw std::invalid_argument("cross sections: unknown material " +
                                    std::to_string(id));
    return it->second;
}

void CrossSectionLibrary::validate() const {
    for (const auto& [id, m] : materials) {
        const std::string tag = "material " + std::to_string(id) + ": ";
        if (static_cast<int>(m.sigma_t.size()) != n_groups ||
            static_cast<int>(m.nu_sigma_f.size()) != n_groups ||
            static_cast<int>(m.chi.size()) != n_groups ||
            static_cast<int>(m.sigma_s.size()) != n_groups)
            throw std::invalid_argument(tag + "group count mismatch");
        bool fissile = false;
        for (int g = 0; g < n_groups; ++g) {
            if (!(m.sigma_t[g] > 0.0))
                throw std::invalid_argument(tag + "sigma_t must be > 0");
            if (m.nu_sigma_f[g] < 0.0 || m.chi[g] < 0.0)
                throw std::invalid_argument(tag + "negative fission data");
            if (m.nu_sigma_f[g] > 0.0) fissile = true;
            if (static_cast<int>(m.sigma_s[g].size()) != n_groups)
                throw std::invalid_argument(tag + "sigma_s not G x G");
            double out = 0.0;
            for (int gt = 0; gt < n_groups; ++gt) {
                if (m.sigma_s[g][gt] < 0.0)
                    throw std::invalid_argument(tag + "negative sigma_s");
                out += m.sigma_s[g][gt];
            }
            if (out > m.sigma_t[g] + 1e-12)
                throw std::invalid_argument(
                    tag + "scattering out of group " + std::to_string(g + 1) +
                    " exceeds sigma_t");
        }
        if (fissile) {
            double chi_sum = 0.0;
            for (double c : m.chi) chi_sum += c;
            if (std::abs(chi_sum - 1.0) > 1e-10)
                throw std::invalid_argument(tag + "chi must sum to 1");
        }
    }
}

int AngularQuadrature2D::reflect_x(int d) const {
    const double ox = -directions[d][0];
    const double oy = directions[d][1];
    for (int r = 0; r < n_dirs(); ++r) {
        if (std::abs(directions[r][0] - ox) < 1e-12 &&
            std::abs(directions[r][1] - oy) < 1e-12)
            return r;
    }
    throw std::runtime_error("quadrature not closed under x reflection");
}

int AngularQuadrature2D::reflect_y(int d) const {
    const double ox = directions[d][0];
    const double oy = -directions[d][1];
    for (int r = 0; r < n_dirs(); ++r) {
        if (std::abs(directions[r][0] - ox) < 1e-12 &&
            std::abs(directions[r][1] - oy) < 1e-12)
            return r;
    }
    throw std::runtime_error("quadrature not closed under y reflection");
}

AngularQuadrature2D build_quadrature(int n_dirs) {
    if (n_dirs < 4 || n_dirs % 4 != 0)
        throw std::invalid_argument(
            "quadrature: n_dirs must be a positive multiple of 4");
    AngularQuadrature2D quad;
    quad.directions.resize(n_dirs);
    quad.weights.assign(n_dirs, kTwoPi / n_dirs);
    for (int d = 0; d < n_dirs; ++d) {
        const double phi = kTwoPi * (d + 0.5) / n_dirs;
        quad.directions[d] = {std::cos(phi), std::sin(phi)};
    }
    return quad;
}

void TransportProblem::validate() const {
    if (n_groups < 1) throw std::invalid_argument("problem: n_groups < 1");
    if (xs.n_groups != n_groups)
        throw std::invalid_argument("problem: cross-section group mismatch");
    xs.validate();
    for (int m : mesh.material_of_element) xs.material(m);
    if (quad.n_dirs() < 1)
        throw std::invalid_argument("problem: empty quadrature");
}

CsrMatrix assemble_block(const TransportProblem& problem, int g, int d) {
    const auto& mesh = problem.mesh;
    const auto& quad = problem.quad;
    if (g < 0 || g >= problem.n_groups || d < 0 || d >= quad.n_dirs())
        throw std::invalid_argument("assemble_block: (g,d) out of range");

    const double wd = quad.weights[d];
    const double ox = quad.directions[d][0];
    const double oy = quad.directions[d][1];
    const ShapeTable shape(mesh.hx, mesh.hy);

    CsrBuilder builder(mesh.n_nodes(), mesh.n_nodes());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& m = problem.xs.material(mesh.material_of_element[e]);
        const double sigma_t = m.sigma_t[g];
        if (!(sigma_t > 0.0))
            throw std::runtime_error("assemble_block: nonpositive sigma_t");
        const auto nodes = mesh.element_nodes(e);
        double ke[4][4] = {};
        for (int q = 0; q < 4; ++q) {
            double stream[4];
            for (int a = 0; a < 4; ++a)
                stream[a] = ox * shape.dx[q][a] + oy * shape.dy[q][a];
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    ke[a][b] += shape.wq * (stream[a] * stream[b] / sigma_t +
                                            sigma_t * shape.n[q][a] *
                                                shape.n[q][b]);
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                builder.add(nodes[a], nodes[b], wd * ke[a][b]);
    }

    // Outflow boundary term on every side; the outgoing half-range is purely
    // geometric and independent of the reflectivity.
    for (int side = 0; side < 4; ++side) {
        const auto normal = side_normal(side);
        const double mu = ox * normal[0] + oy * normal[1];
        if (mu <= 0.0) continue;
        for (const auto& edge : boundary_edges(mesh, side)) {
            const double m11 = edge.length / 3.0;
            const double m12 = edge.length / 6.0;
            builder.add(edge.n0, edge.n0, wd * mu * m11);
            builder.add(edge.n0, edge.n1, wd * mu * m12);
            builder.add(edge.n1, edge.n0, wd * mu * m12);
            builder.add(edge.n1, edge.n1, wd * mu * m11);
        }
    }
    return builder.build();
}

Vector BlockDiagOperator::apply(const Vector& x) const {
    if (static_cast<int>(x.size()) != size())
        throw std::invalid_argument("block operator: dimension mismatch");
    Vector y(size(), 0.0);
    for (int b = 0; b < n_blocks(); ++b) {
        const CsrMatrix& block = blocks[b];
        const int base = b * n_sub;
        for (int i = 0; i < block.n_rows; ++i) {
            double sum = 0.0;
            for (int k = block.row_offsets[i]; k < block.row_offsets[i + 1]; ++k)
                sum += block.values[k] * x[base + block.col_indices[k]];
            y[base + i] = sum;
        }
    }
    return y;
}

long long BlockDiagOperator::total_nnz() const {
    long long nnz = 0;
    for (const auto& block : blocks) nnz += block.nnz();
    return nnz;
}

BlockDiagOperator assemble_preconditioner(const TransportProblem& problem) {
    BlockDiagOperator op;
    op.n_sub = problem.n_nodes();
    op.blocks.reserve(problem.n_blocks());
    for (int g = 0; g < problem.n_groups; ++g)
        for (int d = 0; d < problem.n_dirs(); ++d)
            op.blocks.push_back(assemble_block(problem, g, d));
    return op;
}

TransportOperators::TransportOperators(TransportProblem problem)
    : problem_(std::move(problem)) {
    problem_.validate();
    prec_ = assemble_preconditioner(problem_);
}

void TransportOperators::apply_saaf_tested_source(
    const std::vector<Vector>& density_gp, double sign, Vector& y) const {
    const auto& mesh = problem_.mesh;
    const auto& quad = problem_.quad;
    const ShapeTable shape(mesh.hx, mesh.hy);

    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& m = problem_.xs.material(mesh.material_of_element[e]);
        const auto nodes = mesh.element_nodes(e);
        for (int g = 0; g < problem_.n_groups; ++g) {
            const double inv_sigma_t = 1.0 / m.sigma_t[g];
            for (int d = 0; d < quad.n_dirs(); ++d) {
                const double wd = quad.weights[d];
                const double ox = quad.directions[d][0];
                const double oy = quad.directions[d][1];
                const int base = (g * quad.n_dirs() + d) * mesh.n_nodes();
                for (int q = 0; q < 4; ++q) {
                    const double rho = density_gp[g][e * 4 + q];
                    if (rho == 0.0) continue;
                    const double c = sign * wd * shape.wq * rho;
                    for (int a = 0; a < 4; ++a) {
                        const double test =
                            inv_sigma_t * (ox * shape.dx[q][a] +
                                           oy * shape.dy[q][a]) +
                            shape.n[q][a];
                        y[base + nodes[a]] += c * test;
                    }
                }
            }
        }
    }
}

namespace {

/// Gauss-point values of nodal group fields on every element.
std::vector<Vector> values_at_gauss_points(const TransportProblem& problem,
                                           const std::vector<Vector>& nodal) {
    const auto& mesh = problem.mesh;
    const ShapeTable shape(mesh.hx, mesh.hy);
    std::vector<Vector> gp(nodal.size(),
                           Vector(mesh.n_elements() * 4, 0.0));
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        for (std::size_t g = 0; g < nodal.size(); ++g) {
            for (int q = 0; q < 4; ++q) {
                double v = 0.0;
                for (int a = 0; a < 4; ++a)
                    v += shape.n[q][a] * nodal[g][nodes[a]];
                gp[g][e * 4 + q] = v;
            }
        }
    }
    return gp;
}

}  // namespace

Vector TransportOperators::apply_A(const Vector& x) const {
    if (static_cast<int>(x.size()) != problem_.size())
        throw std::invalid_argument("apply_A: dimension mismatch");
    Vector y = prec_.apply(x);

    // Scattering: isotropic phase function 1/(2*pi) against the scalar flux.
    std::vector<Vector> phi(problem_.n_groups);
    for (int g = 0; g < problem_.n_groups; ++g)
        phi[g] = scalar_flux(x, problem_, g);
    auto phi_gp = values_at_gauss_points(problem_, phi);

    const auto& mesh = problem_.mesh;
    std::vector<Vector> scatter_gp(problem_.n_groups,
                                   Vector(mesh.n_elements() * 4, 0.0));
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& m = problem_.xs.material(mesh.material_of_element[e]);
        for (int g = 0; g < problem_.n_groups; ++g) {
            for (int q = 0; q < 4; ++q) {
                double s = 0.0;
                for (int gf = 0; gf < problem_.n_groups; ++gf)
                    s += m.sigma_s[gf][g] * phi_gp[gf][e * 4 + q];
                scatter_gp[g][e * 4 + q] = s / kTwoPi;
            }
        }
    }
    apply_saaf_tested_source(scatter_gp, -1.0, y);

    // Specular reflective incoming coupling on reflective sides.
    const auto& quad = problem_.quad;
    for (int side = 0; side < 4; ++side) {
        if (mesh.boundary_condition_of_side[side] !=
            BoundaryCondition::Reflective)
            continue;
        const auto normal = side_normal(side);
        const auto edges = boundary_edges(mesh, side);
        for (int d = 0; d < quad.n_dirs(); ++d) {
            const double mu = quad.directions[d][0] * normal[0] +
                              quad.directions[d][1] * normal[1];
            if (mu >= 0.0) continue;  // rows are the incoming directions
            const int r = (side == kLeft || side == kRight)
                              ? quad.reflect_x(d)
                              : quad.reflect_y(d);
            const double wd = quad.weights[d];
            for (int g = 0; g < problem_.n_groups; ++g) {
                const int row_base = (g * quad.n_dirs() + d) * mesh.n_nodes();
                const int col_base = (g * quad.n_dirs() + r) * mesh.n_nodes();
                for (const auto& edge : edges) {
                    const double m11 = edge.length / 3.0;
                    const double m12 = edge.length / 6.0;
                    const double v0 = x[col_base + edge.n0];
                    const double v1 = x[col_base + edge.n1];
                    y[row_base + edge.n0] -= wd * (-mu) * (m11 * v0 + m12 * v1);
                    y[row_base + edge.n1] -= wd * (-mu) * (m12 * v0 + m11 * v1);
                }
            }
        }
    }
    return y;
}

Vector TransportOperators::apply_B(const Vector& x) const {
    if (static_cast<int>(x.size()) != problem_.size())
        throw std::invalid_argument("apply_B: dimension mismatch");
    Vector y(problem_.size(), 0.0);

    std::vector<Vector> phi(problem_.n_groups);
    for (int g = 0; g < problem_.n_groups; ++g)
        phi[g] = scalar_flux(x, problem_, g);
    auto phi_gp = values_at_gauss_points(problem_, phi);

    const auto& mesh = problem_.mesh;
    std::vector<Vector> fission_gp(problem_.n_groups,
                                   Vector(mesh.n_elements() * 4, 0.0));
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& m = problem_.xs.material(mesh.material_of_element[e]);
        for (int q = 0; q < 4; ++q) {
            double production = 0.0;
            for (int gf = 0; gf < problem_.n_groups; ++gf)
                production += m.nu_sigma_f[gf] * phi_gp[gf][e * 4 + q];
            for (int g = 0; g < problem_.n_groups; ++g)
                fission_gp[g][e * 4 + q] = m.chi[g] * production / kTwoPi;
        }
    }
    apply_saaf_tested_source(fission_gp, 1.0, y);
    return y;
}

Vector scalar_flux(const Vector& x, const TransportProblem& problem, int g) {
    if (g < 0 || g >= problem.n_groups)
        throw std::invalid_argument("scalar_flux: group out of range");
    Vector phi(problem.n_nodes(), 0.0);
    for (int d = 0; d < problem.n_dirs(); ++d) {
        const double wd = problem.quad.weights[d];
        const int base = problem.flux_index(g, d, 0);
        for (int node = 0; node < problem.n_nodes(); ++node)
            phi[node] += wd * x[base + node];
    }
    return phi;
}

}  // namespace snks
