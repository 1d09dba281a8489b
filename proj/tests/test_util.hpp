/// Shared fixtures for the test suites: random M-matrices, the 5-point
/// Laplacian, and small transport configurations.

#ifndef SNKS_TESTS_TEST_UTIL_HPP
#define SNKS_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "snks/config.hpp"
#include "snks/sparse.hpp"

namespace snks_test {

/// Random sparse symmetric M-matrix with nonpositive off-diagonals. With
/// zero_row_sums the diagonal equals the negated off-diagonal sum; otherwise
/// it is boosted to keep the matrix diagonally dominant.
inline snks::CsrMatrix random_m_matrix(int n, std::uint64_t seed,
                                       bool zero_row_sums) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.2, 1.5);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<std::vector<double>> off(n, std::vector<double>(n, 0.0));
    // A random spanning chain keeps the graph connected, plus extra edges.
    for (int i = 1; i < n; ++i) {
        const double v = mag(rng);
        off[i][i - 1] -= v;
        off[i - 1][i] -= v;
    }
    const int extras = 2 * n;
    for (int t = 0; t < extras; ++t) {
        const int i = pick(rng);
        const int j = pick(rng);
        if (i == j) continue;
        const double v = mag(rng);
        off[i][j] -= v;
        off[j][i] -= v;
    }
    snks::CsrBuilder builder(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (off[i][j] != 0.0) {
                builder.add(i, j, off[i][j]);
                diag -= off[i][j];
            }
        }
        if (!zero_row_sums) diag += 0.3 * mag(rng);
        builder.add(i, i, diag);
    }
    return builder.build();
}

/// 5-point Laplacian on an nx x ny grid; pure Neumann style rows (zero row
/// sums) when zero_row_sums is set, Dirichlet-like diagonal 4 otherwise.
inline snks::CsrMatrix laplacian_5pt(int nx, int ny, bool zero_row_sums) {
    const int n = nx * ny;
    snks::CsrBuilder builder(n, n);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const int i = y * nx + x;
            int degree = 0;
            auto link = [&](int j) {
                builder.add(i, j, -1.0);
                ++degree;
            };
            if (x > 0) link(i - 1);
            if (x + 1 < nx) link(i + 1);
            if (y > 0) link(i - nx);
            if (y + 1 < ny) link(i + nx);
            builder.add(i, i, zero_row_sums ? degree : 4.0);
        }
    }
    return builder.build();
}

/// Contiguous blocking of [0, n) into roughly equal pieces.
inline std::vector<int> contiguous_blocks(int n, int n_blocks) {
    std::vector<int> block(n);
    for (int i = 0; i < n; ++i)
        block[i] = static_cast<int>((static_cast<long long>(i) * n_blocks) / n);
    return block;
}

/// Two-group heterogeneous fixture with a central fissile block; nx, ny and
/// boundaries are adjusted by the callers.
inline snks::RunConfig two_group_config() {
    const std::string text = R"(
[mesh]
nx = 8
ny = 8
hx = 1.0
hy = 1.0
background_material = 1
region = 2 2 5 2 5

[problem]
groups = 2
directions = 4

[material 1]
sigma_t = 1.0 1.2
sigma_s = 0.4 0.3 ; 0.0 0.5
nu_sigma_f = 0.0 0.0
chi = 0.0 0.0

[material 2]
sigma_t = 1.1 1.3
sigma_s = 0.35 0.3 ; 0.0 0.45
nu_sigma_f = 0.4 0.7
chi = 0.9 0.1
)";
    return snks::parse_config(text);
}

/// Homogeneous infinite-medium fixture: all sides reflective, k = 1.2.
inline snks::RunConfig infinite_medium_config(int nx, int ny) {
    const std::string text = R"(
[mesh]
nx = )" + std::to_string(nx) + R"(
ny = )" + std::to_string(ny) + R"(
hx = 1.0
hy = 1.0
background_material = 1
boundary_left = reflective
boundary_right = reflective
boundary_bottom = reflective
boundary_top = reflective

[problem]
groups = 1
directions = 4

[material 1]
sigma_t = 1.0
sigma_s = 0.5
nu_sigma_f = 0.6
chi = 1.0
)";
    return snks::parse_config(text);
}

}  // namespace snks_test

#endif  // SNKS_TESTS_TEST_UTIL_HPP
