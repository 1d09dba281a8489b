#include "snks/interp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace snks {

namespace {

constexpr double kTruncationFactor = 1e-4;

/// Drops entries below the relative threshold and rescales the survivors so
/// the row sum is unchanged.
void truncate_row(std::vector<std::pair<int, double>>& entries) {
    if (entries.empty()) return;
    double max_w = 0.0;
    double sum_old = 0.0;
    for (const auto& [col, w] : entries) {
        max_w = std::max(max_w, std::abs(w));
        sum_old += w;
    }
    std::vector<std::pair<int, double>> kept;
    double sum_new = 0.0;
    for (const auto& [col, w] : entries) {
        if (std::abs(w) >= kTruncationFactor * max_w) {
            kept.push_back({col, w});
            sum_new += w;
        }
    }
    if (sum_new != 0.0) {
        const double scale = sum_old / sum_new;
        for (auto& [col, w] : kept) w *= scale;
    }
    entries = std::move(kept);
}

double diagonal_of_row(const CsrMatrix& p, int i) {
    for (int k = p.row_offsets[i]; k < p.row_offsets[i + 1]; ++k)
        if (p.col_indices[k] == i) return p.values[k];
    return 0.0;
}

Interpolation assemble(const CsrMatrix& p_s, const CfSplit& split,
                       std::vector<std::vector<std::pair<int, double>>>& rows) {
    Interpolation interp;
    interp.coarse_index_of = split.coarse_index();
    const int nc = split.n_coarse();
    CsrBuilder builder(p_s.n_rows, nc);
    for (int i = 0; i < p_s.n_rows; ++i) {
        if (split.label[i] == CfLabel::C) {
            builder.add(i, interp.coarse_index_of[i], 1.0);
            continue;
        }
        truncate_row(rows[i]);
        if (rows[i].empty())
            throw std::runtime_error("interpolation: F-point " +
                                     std::to_string(i) + " has an empty row");
        for (const auto& [col, w] : rows[i])
            builder.add(i, interp.coarse_index_of[col], w);
    }
    interp.matrix = builder.build();
    return interp;
}

/// Direct formula on an explicit row (columns exclude the diagonal). C_i is
/// the set of C-labeled columns.
std::vector<std::pair<int, double>> direct_row(
    const std::map<int, double>& row, double p_ii, const CfSplit& split,
    int point) {
    if (p_ii == 0.0)
        throw std::runtime_error("direct interpolation: zero diagonal at point " +
                                 std::to_string(point));
    double sum_all = 0.0;
    double sum_c = 0.0;
    for (const auto& [col, val] : row) {
        sum_all += val;
        if (split.label[col] == CfLabel::C) sum_c += val;
    }
    if (sum_c == 0.0)
        throw std::runtime_error(
            "direct interpolation: degenerate coarse denominator at point " +
            std::to_string(point));
    std::vector<std::pair<int, double>> weights;
    for (const auto& [col, val] : row) {
        if (split.label[col] != CfLabel::C) continue;
        weights.push_back({col, -(val / p_ii) * (sum_all / sum_c)});
    }
    return weights;
}

}  // namespace

Interpolation direct_interpolation(const CsrMatrix& p_s,
                                   const StrengthGraph& graph,
                                   const CfSplit& split) {
    std::vector<std::vector<std::pair<int, double>>> rows(p_s.n_rows);
    for (int i = 0; i < p_s.n_rows; ++i) {
        if (split.label[i] != CfLabel::F) continue;
        bool has_c = false;
        for (int j : graph.depends_on[i])
            if (split.label[j] == CfLabel::C) has_c = true;
        if (!has_c)
            throw std::runtime_error(
                "direct interpolation: F-point " + std::to_string(i) +
                " has no strong C dependency");
        // Only strong C neighbors carry weights, but every stored neighbor
        // enters the row-sum factor.
        std::map<int, double> row;
        for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k)
            if (p_s.col_indices[k] != i) row[p_s.col_indices[k]] = p_s.values[k];
        const double p_ii = diagonal_of_row(p_s, i);
        double sum_all = 0.0;
        double sum_c = 0.0;
        for (const auto& [col, val] : row) sum_all += val;
        for (int j : graph.depends_on[i])
            if (split.label[j] == CfLabel::C) sum_c += row.count(j) ? row[j] : 0.0;
        if (p_ii == 0.0)
            throw std::runtime_error(
                "direct interpolation: zero diagonal at point " +
                std::to_string(i));
        if (sum_c == 0.0)
            throw std::runtime_error(
                "direct interpolation: degenerate coarse denominator at point " +
                std::to_string(i));
        for (int j : graph.depends_on[i]) {
            if (split.label[j] != CfLabel::C) continue;
            const double p_ij = row.count(j) ? row[j] : 0.0;
            rows[i].push_back({j, -(p_ij / p_ii) * (sum_all / sum_c)});
        }
    }
    return assemble(p_s, split, rows);
}

Interpolation classical_interpolation(const CsrMatrix& p_s,
                                      const StrengthGraph& graph,
                                      const CfSplit& split) {
    std::vector<std::vector<std::pair<int, double>>> rows(p_s.n_rows);
    for (int i = 0; i < p_s.n_rows; ++i) {
        if (split.label[i] != CfLabel::F) continue;
        std::map<int, double> row;
        for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k)
            if (p_s.col_indices[k] != i) row[p_s.col_indices[k]] = p_s.values[k];
        const double p_ii = diagonal_of_row(p_s, i);

        std::vector<int> c_set, f_strong;
        for (int j : graph.depends_on[i]) {
            if (split.label[j] == CfLabel::C) c_set.push_back(j);
            else f_strong.push_back(j);
        }
        if (c_set.empty())
            throw std::runtime_error(
                "classical interpolation: F-point " + std::to_string(i) +
                " has no strong C dependency; use direct or multipass");

        double weak_sum = 0.0;
        for (const auto& [col, val] : row)
            if (!std::binary_search(graph.depends_on[i].begin(),
                                    graph.depends_on[i].end(), col))
                weak_sum += val;
        const double denom = p_ii + weak_sum;
        if (denom == 0.0)
            throw std::runtime_error(
                "classical interpolation: zero folded diagonal at point " +
                std::to_string(i));

        // Per strong F neighbor: its coupling distributed over C_i.
        std::vector<double> f_denoms(f_strong.size());
        for (std::size_t s = 0; s < f_strong.size(); ++s) {
            const int k = f_strong[s];
            double d = 0.0;
            for (int m : c_set) d += p_s.at(k, m);
            if (d == 0.0)
                throw std::runtime_error(
                    "classical interpolation: strong F-F pair (" +
                    std::to_string(i) + ", " + std::to_string(k) +
                    ") without a common C-point; use direct or multipass");
            f_denoms[s] = d;
        }
        for (int j : c_set) {
            double val = row.count(j) ? row[j] : 0.0;
            for (std::size_t s = 0; s < f_strong.size(); ++s) {
                const int k = f_strong[s];
                val += (row.count(k) ? row[k] : 0.0) * p_s.at(k, j) /
                       f_denoms[s];
            }
            rows[i].push_back({j, -val / denom});
        }
    }
    return assemble(p_s, split, rows);
}

Interpolation multipass_interpolation(const CsrMatrix& p_s,
                                      const StrengthGraph& graph,
                                      const CfSplit& split) {
    const int n = p_s.n_rows;
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<bool> done(n, false);
    int undone = 0;

    // Pass 1: direct weights for F-points with a strong C dependency.
    for (int i = 0; i < n; ++i) {
        if (split.label[i] != CfLabel::F) continue;
        bool has_c = false;
        for (int j : graph.depends_on[i])
            if (split.label[j] == CfLabel::C) has_c = true;
        if (!has_c) {
            ++undone;
            continue;
        }
        std::map<int, double> row;
        for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k)
            if (p_s.col_indices[k] != i) row[p_s.col_indices[k]] = p_s.values[k];
        const double p_ii = diagonal_of_row(p_s, i);
        double sum_all = 0.0, sum_c = 0.0;
        for (const auto& [col, val] : row) sum_all += val;
        for (int j : graph.depends_on[i])
            if (split.label[j] == CfLabel::C)
                sum_c += row.count(j) ? row[j] : 0.0;
        if (p_ii == 0.0 || sum_c == 0.0)
            throw std::runtime_error(
                "multipass interpolation: degenerate row at point " +
                std::to_string(i));
        for (int j : graph.depends_on[i])
            if (split.label[j] == CfLabel::C)
                rows[i].push_back(
                    {j, -((row.count(j) ? row[j] : 0.0) / p_ii) *
                            (sum_all / sum_c)});
        done[i] = true;
    }

    // Later passes: substitute interpolated strong F neighbors and apply the
    // direct formula to the modified row.
    while (undone > 0) {
        const std::vector<bool> done_snapshot = done;
        int progressed = 0;
        for (int i = 0; i < n; ++i) {
            if (split.label[i] != CfLabel::F || done[i]) continue;
            std::vector<int> interpolated;
            for (int j : graph.depends_on[i])
                if (split.label[j] == CfLabel::F && done_snapshot[j])
                    interpolated.push_back(j);
            if (interpolated.empty()) continue;

            std::map<int, double> row;
            for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k)
                if (p_s.col_indices[k] != i)
                    row[p_s.col_indices[k]] = p_s.values[k];
            const double p_ii = diagonal_of_row(p_s, i);
            for (int j : interpolated) {
                const double p_ij = row.count(j) ? row[j] : 0.0;
                row.erase(j);
                if (p_ij == 0.0) continue;
                for (const auto& [k, w_jk] : rows[j]) row[k] += p_ij * w_jk;
            }
            rows[i] = direct_row(row, p_ii, split, i);
            done[i] = true;
            ++progressed;
        }
        undone -= progressed;
        if (progressed == 0)
            throw std::runtime_error(
                "multipass interpolation: unreachable F-points remain "
                "(over-aggressive coarsening)");
    }
    return assemble(p_s, split, rows);
}

CsrMatrix expand_interpolation(const Interpolation& interp, int n_blocks) {
    if (n_blocks < 1)
        throw std::invalid_argument("expand_interpolation: n_blocks < 1");
    const CsrMatrix& m = interp.matrix;
    CsrBuilder builder(m.n_rows * n_blocks, m.n_cols * n_blocks);
    for (int b = 0; b < n_blocks; ++b)
        for (int i = 0; i < m.n_rows; ++i)
            for (int k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
                builder.add(b * m.n_rows + i, b * m.n_cols + m.col_indices[k],
                            m.values[k]);
    return builder.build();
}

MultilevelHierarchy build_hierarchy(const BlockDiagOperator& p,
                                    const HierarchyParams& params,
                                    const std::vector<int>& block_of_point) {
    if (params.agg_levels > params.max_levels)
        throw std::invalid_argument("hierarchy: agg_levels > max_levels");
    if (static_cast<int>(block_of_point.size()) != p.n_sub)
        throw std::invalid_argument("hierarchy: block map size mismatch");
    if (params.subspace_block < 0 || params.subspace_block >= p.n_blocks())
        throw std::invalid_argument("hierarchy: subspace block out of range");

    MultilevelHierarchy h;
    h.params = params;
    h.levels.push_back({p, block_of_point, {}, ""});

    for (int level = 0;; ++level) {
        HierarchyLevel& current = h.levels.back();
        const int n_s = current.op.n_sub;
        if (n_s <= params.coarse_cap || level + 1 >= params.max_levels) {
            current.scheme = "coarsest";
            break;
        }
        const CsrMatrix& p_s = current.op.blocks[params.subspace_block];
        const StrengthGraph graph = strength_graph(p_s, params.theta);
        const bool aggressive = level < params.agg_levels;

        CfSplit split;
        Interpolation interp;
        if (aggressive) {
            split = aggressive_coarsen(graph, current.block_of_point,
                                       params.seed + level);
            current.scheme = "aggressive";
        } else {
            split = hcljp_coarsen(graph, current.block_of_point,
                                  params.seed + level);
            current.scheme = "hcljp";
        }
        const int nc = split.n_coarse();
        if (nc == n_s)
            throw std::runtime_error(
                "hierarchy: coarsening stagnated at level " +
                std::to_string(level) + " (theta=" +
                std::to_string(params.theta) + ")");
        if (nc == 0)
            throw std::runtime_error("hierarchy: no coarse points at level " +
                                     std::to_string(level));
        if (aggressive) {
            interp = multipass_interpolation(p_s, graph, split);
        } else {
            try {
                interp = params.use_classical
                             ? classical_interpolation(p_s, graph, split)
                             : direct_interpolation(p_s, graph, split);
            } catch (const std::runtime_error&) {
                interp = multipass_interpolation(p_s, graph, split);
            }
        }

        HierarchyLevel next;
        next.op.n_sub = nc;
        const CsrMatrix interp_t = transpose(interp.matrix);
        for (const CsrMatrix& block : current.op.blocks)
            next.op.blocks.push_back(
                triple_product(interp_t, block, interp.matrix));
        next.block_of_point.resize(nc);
        for (int i = 0; i < n_s; ++i)
            if (interp.coarse_index_of[i] >= 0)
                next.block_of_point[interp.coarse_index_of[i]] =
                    current.block_of_point[i];
        current.interp = std::move(interp);
        h.levels.push_back(std::move(next));
    }

    // Redundant dense factorization of every coarsest block.
    const BlockDiagOperator& bottom = h.levels.back().op;
    for (const CsrMatrix& block : bottom.blocks) {
        std::vector<double> dense(
            static_cast<std::size_t>(block.n_rows) * block.n_rows, 0.0);
        for (int i = 0; i < block.n_rows; ++i)
            for (int k = block.row_offsets[i]; k < block.row_offsets[i + 1];
                 ++k)
                dense[static_cast<std::size_t>(i) * block.n_rows +
                      block.col_indices[k]] = block.values[k];
        h.coarsest.push_back(dense_factor(dense, block.n_rows));
    }
    return h;
}

HierarchySummary hierarchy_summary(const MultilevelHierarchy& h) {
    HierarchySummary summary;
    double rows0 = 0.0, nnz0 = 0.0, rows_sum = 0.0, nnz_sum = 0.0;
    for (int l = 0; l < h.n_levels(); ++l) {
        HierarchyLevelSummary level;
        level.rows = h.levels[l].op.n_sub;
        level.nnz = h.levels[l].op.total_nnz();
        level.scheme = h.levels[l].scheme;
        if (l == 0) {
            rows0 = level.rows;
            nnz0 = static_cast<double>(level.nnz);
        }
        rows_sum += level.rows;
        nnz_sum += static_cast<double>(level.nnz);
        summary.levels.push_back(std::move(level));
    }
    summary.grid_complexity = rows0 > 0 ? rows_sum / rows0 : 0.0;
    summary.operator_complexity = nnz0 > 0 ? nnz_sum / nnz0 : 0.0;
    return summary;
}

std::string format_hierarchy_summary(const HierarchySummary& summary) {
    std::ostringstream out;
    out << "level  rows  nnz  scheme\n";
    for (std::size_t l = 0; l < summary.levels.size(); ++l) {
        const auto& level = summary.levels[l];
        out << l << "  " << level.rows << "  " << level.nnz << "  "
            << level.scheme << "\n";
    }
    out << "grid complexity " << summary.grid_complexity << "\n";
    out << "operator complexity " << summary.operator_complexity << "\n";
    return out.str();
}

}  // namespace snks
