#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "snks/driver.hpp"
#include "snks/interp.hpp"
#include "test_util.hpp"

using namespace snks;

namespace {

/// Symmetric path graph with unit couplings, zero row sums.
CsrMatrix path_matrix(int n) {
    CsrBuilder builder(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        if (i > 0) {
            builder.add(i, i - 1, -1.0);
            diag += 1.0;
        }
        if (i + 1 < n) {
            builder.add(i, i + 1, -1.0);
            diag += 1.0;
        }
        builder.add(i, i, diag);
    }
    return builder.build();
}

CfSplit make_split(std::vector<CfLabel> labels) {
    CfSplit split;
    split.label = std::move(labels);
    return split;
}

void check_row_sums_one(const Interpolation& interp) {
    const CsrMatrix& m = interp.matrix;
    for (int i = 0; i < m.n_rows; ++i) {
        double sum = 0.0;
        for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
            sum += m.values[k];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

void check_c_rows_injection(const Interpolation& interp, const CfSplit& split) {
    const CsrMatrix& m = interp.matrix;
    for (int i = 0; i < m.n_rows; ++i) {
        if (split.label[i] != CfLabel::C) continue;
        REQUIRE(m.row_offsets[i + 1] - m.row_offsets[i] == 1);
        CHECK(m.values[m.row_offsets[i]] == 1.0);
        CHECK(m.col_indices[m.row_offsets[i]] == interp.coarse_index_of[i]);
    }
}

}  // namespace

TEST_CASE("direct interpolation splits the path midpoint evenly") {
    const CsrMatrix p = path_matrix(3);
    const StrengthGraph graph = strength_graph(p, 0.25);
    const CfSplit split = make_split({CfLabel::C, CfLabel::F, CfLabel::C});
    const Interpolation interp = direct_interpolation(p, graph, split);
    REQUIRE(interp.matrix.n_rows == 3);
    REQUIRE(interp.matrix.n_cols == 2);
    CHECK(interp.matrix.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(interp.matrix.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    check_c_rows_injection(interp, split);
    check_row_sums_one(interp);
}

TEST_CASE("classical interpolation on the same midpoint agrees") {
    const CsrMatrix p = path_matrix(3);
    const StrengthGraph graph = strength_graph(p, 0.25);
    const CfSplit split = make_split({CfLabel::C, CfLabel::F, CfLabel::C});
    const Interpolation interp = classical_interpolation(p, graph, split);
    CHECK(interp.matrix.at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(interp.matrix.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("direct interpolation rejects F-points without coarse support") {
    const CsrMatrix p = path_matrix(3);
    const StrengthGraph graph = strength_graph(p, 0.25);
    // Point 2 only depends on point 1, also F.
    const CfSplit split = make_split({CfLabel::C, CfLabel::F, CfLabel::F});
    CHECK_THROWS_AS(direct_interpolation(p, graph, split), std::runtime_error);
}

TEST_CASE("classical interpolation rejects F-F pairs without a common C") {
    const CsrMatrix p = path_matrix(4);
    const StrengthGraph graph = strength_graph(p, 0.25);
    const CfSplit split =
        make_split({CfLabel::C, CfLabel::F, CfLabel::F, CfLabel::C});
    CHECK_THROWS_AS(classical_interpolation(p, graph, split),
                    std::runtime_error);
}

TEST_CASE("multipass reaches F-points through interpolated neighbors") {
    const CsrMatrix p = path_matrix(3);
    const StrengthGraph graph = strength_graph(p, 0.25);
    // C - F - F: point 2 is only reachable through point 1.
    const CfSplit split = make_split({CfLabel::C, CfLabel::F, CfLabel::F});
    const Interpolation interp = multipass_interpolation(p, graph, split);
    REQUIRE(interp.matrix.n_cols == 1);
    CHECK(interp.matrix.at(0, 0) == 1.0);
    CHECK(interp.matrix.at(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(interp.matrix.at(2, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("row sums are one on zero-row-sum matrices") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const CsrMatrix p = snks_test::random_m_matrix(36, 200 + seed, true);
        const StrengthGraph graph = strength_graph(p, 0.25);
        const CfSplit split = rs_coarsen(graph);
        for (const auto& interp :
             {direct_interpolation(p, graph, split),
              classical_interpolation(p, graph, split),
              multipass_interpolation(p, graph, split)}) {
            check_row_sums_one(interp);
            check_c_rows_injection(interp, split);
            CHECK(interp.matrix.n_cols == split.n_coarse());
        }
    }
}

TEST_CASE("tiny weights are truncated and the row sum preserved") {
    CsrBuilder builder(3, 3);
    builder.add(0, 0, 1.0 + 1e-6);
    builder.add(0, 1, -1.0);
    builder.add(0, 2, -1e-6);
    builder.add(1, 1, 1.0);
    builder.add(1, 0, -1.0);
    builder.add(2, 2, 1e-6);
    builder.add(2, 0, -1e-6);
    const CsrMatrix p = builder.build();
    const StrengthGraph graph = strength_graph(p, 1e-9);
    const CfSplit split = make_split({CfLabel::F, CfLabel::C, CfLabel::C});
    const Interpolation interp = direct_interpolation(p, graph, split);
    // The 1e-6-sized weight is dropped and its mass folded into the survivor.
    CHECK(interp.matrix.row_offsets[1] - interp.matrix.row_offsets[0] == 1);
    CHECK(interp.matrix.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expanded interpolation replicates the block diagonally") {
    const CsrMatrix p = path_matrix(3);
    const StrengthGraph graph = strength_graph(p, 0.25);
    const CfSplit split = make_split({CfLabel::C, CfLabel::F, CfLabel::C});
    const Interpolation interp = direct_interpolation(p, graph, split);
    const CsrMatrix full = expand_interpolation(interp, 3);
    REQUIRE(full.n_rows == 9);
    REQUIRE(full.n_cols == 6);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(full.at(b * 3 + i, b * 2 + j) == interp.matrix.at(i, j));
    // Nothing off the block diagonal.
    CHECK(full.nnz() == 3 * interp.matrix.nnz());
}

TEST_CASE("hierarchy coarsens the transport preconditioner") {
    RunConfig config = snks_test::two_group_config();
    config.mesh.nx = 16;
    config.mesh.ny = 16;
    config.mesh.regions = {{2, 4, 11, 4, 11}};
    const TransportProblem problem = build_problem(config);
    const BlockDiagOperator op = assemble_preconditioner(problem);
    HierarchyParams params;
    params.coarse_cap = 20;
    const std::vector<int> blocks =
        snks_test::contiguous_blocks(problem.n_nodes(), 4);
    const MultilevelHierarchy h = build_hierarchy(op, params, blocks);

    REQUIRE(h.n_levels() >= 2);
    CHECK(h.levels[0].op.n_sub == problem.n_nodes());
    for (int l = 1; l < h.n_levels(); ++l) {
        CHECK(h.levels[l].op.n_sub < h.levels[l - 1].op.n_sub);
        CHECK(static_cast<int>(h.levels[l].block_of_point.size()) ==
              h.levels[l].op.n_sub);
        for (int b : h.levels[l].block_of_point) CHECK((b >= 0 && b < 4));
    }
    CHECK(h.levels.back().scheme == "coarsest");
    CHECK(static_cast<int>(h.coarsest.size()) == problem.n_blocks());
    CHECK(h.levels.back().op.n_sub <= params.coarse_cap);

    const HierarchySummary summary = hierarchy_summary(h);
    CHECK(summary.grid_complexity >= 1.0);
    CHECK(summary.operator_complexity >= 1.0);
    CHECK(static_cast<int>(summary.levels.size()) == h.n_levels());
    CHECK(!format_hierarchy_summary(summary).empty());

    // Determinism under the same seed.
    const MultilevelHierarchy h2 = build_hierarchy(op, params, blocks);
    REQUIRE(h2.n_levels() == h.n_levels());
    for (int l = 0; l < h.n_levels(); ++l)
        CHECK(h2.levels[l].op.n_sub == h.levels[l].op.n_sub);
}

TEST_CASE("each coarse level is the Galerkin product of the finer one") {
    RunConfig config = snks_test::two_group_config();
    config.mesh.nx = 6;
    config.mesh.ny = 6;
    config.mesh.regions = {{2, 2, 3, 2, 3}};
    const TransportProblem problem = build_problem(config);
    const BlockDiagOperator op = assemble_preconditioner(problem);
    HierarchyParams params;
    params.coarse_cap = 8;
    const std::vector<int> blocks =
        snks_test::contiguous_blocks(problem.n_nodes(), 2);
    const MultilevelHierarchy h = build_hierarchy(op, params, blocks);
    REQUIRE(h.n_levels() >= 2);

    for (int l = 0; l + 1 < h.n_levels(); ++l) {
        const CsrMatrix p_sub = h.levels[l].interp.matrix;
        const CsrMatrix p_sub_t = transpose(p_sub);
        for (int b = 0; b < h.levels[l].op.n_blocks(); ++b) {
            const CsrMatrix rap =
                triple_product(p_sub_t, h.levels[l].op.blocks[b], p_sub);
            const CsrMatrix& coarse = h.levels[l + 1].op.blocks[b];
            REQUIRE(rap.n_rows == coarse.n_rows);
            double max_diff = 0.0, max_val = 0.0;
            for (int i = 0; i < rap.n_rows; ++i)
                for (int j = 0; j < rap.n_cols; ++j) {
                    max_diff = std::max(
                        max_diff, std::abs(rap.at(i, j) - coarse.at(i, j)));
                    max_val = std::max(max_val, std::abs(rap.at(i, j)));
                }
            CHECK(max_diff <= 1e-12 * max_val);
        }
    }
}

TEST_CASE("hierarchy reports stagnation when nothing coarsens") {
    // Identity blocks have no strong connections, so no C-points exist.
    BlockDiagOperator op;
    op.n_sub = 50;
    op.blocks.push_back(CsrMatrix::identity(50));
    HierarchyParams params;
    params.coarse_cap = 10;
    const std::vector<int> blocks = snks_test::contiguous_blocks(50, 2);
    CHECK_THROWS_AS(build_hierarchy(op, params, blocks), std::runtime_error);
}
