#include "snks/coarsen.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace snks {

int CfSplit::n_coarse() const {
    int count = 0;
    for (CfLabel l : label)
        if (l == CfLabel::C) ++count;
    return count;
}

std::vector<int> CfSplit::coarse_index() const {
    std::vector<int> index(label.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < label.size(); ++i)
        if (label[i] == CfLabel::C) index[i] = next++;
    return index;
}

CsrMatrix extract_subspace(const BlockDiagOperator& p, int n_groups, int n_dirs,
                           int which) {
    if (which < 0 || which >= n_groups * n_dirs ||
        which >= p.n_blocks())
        throw std::invalid_argument("extract_subspace: block out of range");
    return p.blocks[which];
}

CsrMatrix extract_subspace(const CsrMatrix& p, int n_groups, int n_dirs,
                           int which) {
    const int n_blocks = n_groups * n_dirs;
    if (which < 0 || which >= n_blocks)
        throw std::invalid_argument("extract_subspace: block out of range");
    if (p.n_rows != p.n_cols || p.n_rows % n_blocks != 0)
        throw std::invalid_argument("extract_subspace: size not divisible");
    const int n_sub = p.n_rows / n_blocks;
    std::vector<int> rows(n_sub);
    for (int i = 0; i < n_sub; ++i) rows[i] = which * n_sub + i;
    return extract_principal_submatrix(p, rows);
}

StrengthGraph strength_graph(const CsrMatrix& p_s, double theta) {
    if (p_s.n_rows != p_s.n_cols)
        throw std::invalid_argument("strength_graph: matrix not square");
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("strength_graph: theta must be in (0, 1]");
    StrengthGraph graph;
    graph.n = p_s.n_rows;
    graph.depends_on.resize(graph.n);
    graph.influences.resize(graph.n);
    for (int i = 0; i < graph.n; ++i) {
        double strongest = 0.0;
        for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k) {
            if (p_s.col_indices[k] == i) continue;
            strongest = std::max(strongest, -p_s.values[k]);
        }
        if (strongest <= 0.0) continue;
        const double threshold = theta * strongest;
        for (int k = p_s.row_offsets[i]; k < p_s.row_offsets[i + 1]; ++k) {
            const int j = p_s.col_indices[k];
            if (j == i) continue;
            if (-p_s.values[k] >= threshold) graph.depends_on[i].push_back(j);
        }
    }
    for (int i = 0; i < graph.n; ++i)
        for (int j : graph.depends_on[i]) graph.influences[j].push_back(i);
    for (auto& list : graph.influences) std::sort(list.begin(), list.end());
    return graph;
}

std::vector<double> initial_measures(const StrengthGraph& graph) {
    std::vector<double> measures(graph.n);
    for (int i = 0; i < graph.n; ++i)
        measures[i] = static_cast<double>(graph.influences[i].size());
    return measures;
}

double cljp_perturbation(int point, std::uint64_t seed) {
    std::uint64_t z = seed ^ (static_cast<std::uint64_t>(point) + 1) *
                                 0x9E3779B97F4A7C15ull;
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    const std::uint64_t mask = (1ull << 53) - 1;
    return static_cast<double>(z & mask) /
           static_cast<double>(1ull << 53);
}

void rs_first_pass(const StrengthGraph& graph, const std::vector<bool>& mask,
                   std::vector<CfLabel>& label) {
    if (static_cast<int>(mask.size()) != graph.n ||
        static_cast<int>(label.size()) != graph.n)
        throw std::invalid_argument("rs_first_pass: size mismatch");

    auto active = [&](int i) {
        return mask[i] && label[i] == CfLabel::Unlabeled;
    };
    std::vector<double> measure(graph.n, 0.0);
    int remaining = 0;
    for (int i = 0; i < graph.n; ++i) {
        if (!active(i)) continue;
        ++remaining;
        for (int j : graph.influences[i])
            if (active(j)) measure[i] += 1.0;
    }

    while (remaining > 0) {
        int v = -1;
        for (int i = 0; i < graph.n; ++i) {
            if (!active(i)) continue;
            if (v < 0 || measure[i] > measure[v]) v = i;
        }
        label[v] = CfLabel::C;
        --remaining;
        std::vector<int> new_f;
        for (int j : graph.influences[v])
            if (active(j)) new_f.push_back(j);
        for (int j : new_f) {
            label[j] = CfLabel::F;
            --remaining;
        }
        for (int j : new_f)
            for (int k : graph.depends_on[j])
                if (active(k)) measure[k] += 1.0;
    }
}

CfSplit rs_coarsen(const StrengthGraph& graph) {
    CfSplit split;
    split.label.assign(graph.n, CfLabel::Unlabeled);
    rs_first_pass(graph, std::vector<bool>(graph.n, true), split.label);

    // Pass 2: every remaining strong F-F pair must share a common C
    // dependency; promote the influencing F-point otherwise.
    auto common_c = [&](int a, int b) {
        for (int c : graph.depends_on[a]) {
            if (split.label[c] != CfLabel::C) continue;
            if (std::binary_search(graph.depends_on[b].begin(),
                                   graph.depends_on[b].end(), c))
                return true;
        }
        return false;
    };
    for (int i = 0; i < graph.n; ++i) {
        if (split.label[i] != CfLabel::F) continue;
        for (int j : graph.depends_on[i]) {
            if (split.label[j] != CfLabel::F) continue;
            if (!common_c(i, j)) split.label[j] = CfLabel::C;
        }
    }
    return split;
}

namespace {

/// Mutable edge state for the CLJP rounds; edges are dropped as points are
/// labeled or as common-C couplings are discovered.
struct CljpState {
    const StrengthGraph& graph;
    std::vector<std::vector<bool>> dep_alive;  // parallel to depends_on
    std::vector<std::vector<bool>> inf_alive;  // parallel to influences
    std::vector<double> measure;
    std::vector<CfLabel> label;
    int remaining = 0;

    explicit CljpState(const StrengthGraph& g, std::uint64_t seed)
        : graph(g), measure(initial_measures(g)),
          label(g.n, CfLabel::Unlabeled), remaining(g.n) {
        dep_alive.resize(g.n);
        inf_alive.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            dep_alive[i].assign(g.depends_on[i].size(), true);
            inf_alive[i].assign(g.influences[i].size(), true);
            measure[i] += cljp_perturbation(i, seed);
        }
    }

    bool depends_alive(int i, int j) const {
        const auto& deps = graph.depends_on[i];
        const auto it = std::lower_bound(deps.begin(), deps.end(), j);
        if (it == deps.end() || *it != j) return false;
        return dep_alive[i][it - deps.begin()];
    }

    void remove_dependency(int i, int j) {
        const auto& deps = graph.depends_on[i];
        const auto it = std::lower_bound(deps.begin(), deps.end(), j);
        if (it == deps.end() || *it != j) return;
        dep_alive[i][it - deps.begin()] = false;
        const auto& infs = graph.influences[j];
        const auto jt = std::lower_bound(infs.begin(), infs.end(), i);
        inf_alive[j][jt - infs.begin()] = false;
    }

    void detach(int i) {
        for (std::size_t k = 0; k < graph.depends_on[i].size(); ++k)
            if (dep_alive[i][k]) remove_dependency(i, graph.depends_on[i][k]);
        for (std::size_t k = 0; k < graph.influences[i].size(); ++k)
            if (inf_alive[i][k])
                remove_dependency(graph.influences[i][k], i);
    }

    void mark_f(int i) {
        label[i] = CfLabel::F;
        --remaining;
        detach(i);
    }

    /// Labels v as C and applies the measure decrements and edge removals of
    /// one selection.
    void select_c(int v) {
        label[v] = CfLabel::C;
        --remaining;
        std::vector<int> dependents;
        for (std::size_t k = 0; k < graph.influences[v].size(); ++k)
            if (inf_alive[v][k]) dependents.push_back(graph.influences[v][k]);
        for (int vn : dependents) measure[vn] -= 1.0;
        for (int vn : dependents) {
            for (std::size_t k = 0; k < graph.influences[vn].size(); ++k) {
                if (!inf_alive[vn][k]) continue;
                const int vnn = graph.influences[vn][k];
                if (vnn == v) continue;
                if (depends_alive(vnn, v)) {
                    measure[vnn] -= 1.0;
                    remove_dependency(vnn, vn);
                }
            }
        }
        detach(v);
    }

    /// Local maximum over still-connected unlabeled neighbors, both edge
    /// directions; the index breaks the (perturbation-excluded) exact tie.
    bool is_local_max(int i) const {
        auto beats = [&](int j) {
            if (label[j] != CfLabel::Unlabeled) return true;
            if (measure[i] != measure[j]) return measure[i] > measure[j];
            return i < j;
        };
        for (std::size_t k = 0; k < graph.depends_on[i].size(); ++k)
            if (dep_alive[i][k] && !beats(graph.depends_on[i][k])) return false;
        for (std::size_t k = 0; k < graph.influences[i].size(); ++k)
            if (inf_alive[i][k] && !beats(graph.influences[i][k])) return false;
        return true;
    }
};

}  // namespace

CfSplit cljp_coarsen(const StrengthGraph& graph,
                     const std::vector<CfLabel>* initial, std::uint64_t seed) {
    CljpState state(graph, seed);
    if (initial) {
        if (static_cast<int>(initial->size()) != graph.n)
            throw std::invalid_argument("cljp_coarsen: initial size mismatch");
        for (int i = 0; i < graph.n; ++i)
            if ((*initial)[i] == CfLabel::F) state.mark_f(i);
        for (int i = 0; i < graph.n; ++i)
            if ((*initial)[i] == CfLabel::C) state.select_c(i);
        for (int i = 0; i < graph.n; ++i)
            if (state.label[i] == CfLabel::Unlabeled && state.measure[i] < 1.0)
                state.mark_f(i);
    }

    while (state.remaining > 0) {
        std::vector<int> selected;
        for (int i = 0; i < graph.n; ++i)
            if (state.label[i] == CfLabel::Unlabeled && state.is_local_max(i))
                selected.push_back(i);
        if (selected.empty()) {
            // Guard; unreachable with distinct perturbed measures.
            int v = -1;
            for (int i = 0; i < graph.n; ++i)
                if (state.label[i] == CfLabel::Unlabeled &&
                    (v < 0 || state.measure[i] > state.measure[v]))
                    v = i;
            selected.push_back(v);
        }
        for (int v : selected) state.select_c(v);
        for (int i = 0; i < graph.n; ++i)
            if (state.label[i] == CfLabel::Unlabeled && state.measure[i] < 1.0)
                state.mark_f(i);
    }
    CfSplit split;
    split.label = std::move(state.label);
    return split;
}

CfSplit hcljp_coarsen(const StrengthGraph& graph,
                      const std::vector<int>& block_of_point,
                      std::uint64_t seed) {
    if (static_cast<int>(block_of_point.size()) != graph.n)
        throw std::invalid_argument("hcljp_coarsen: block map size mismatch");

    // Interior points: every strength neighbor shares the block.
    std::vector<bool> interior(graph.n, true);
    for (int i = 0; i < graph.n; ++i) {
        for (int j : graph.depends_on[i])
            if (block_of_point[j] != block_of_point[i]) interior[i] = false;
        for (int j : graph.influences[i])
            if (block_of_point[j] != block_of_point[i]) interior[i] = false;
    }

    int max_block = -1;
    for (int b : block_of_point) max_block = std::max(max_block, b);
    std::vector<CfLabel> label(graph.n, CfLabel::Unlabeled);
    for (int b = 0; b <= max_block; ++b) {
        std::vector<bool> mask(graph.n, false);
        bool any = false;
        for (int i = 0; i < graph.n; ++i) {
            if (interior[i] && block_of_point[i] == b) {
                mask[i] = true;
                any = true;
            }
        }
        if (any) rs_first_pass(graph, mask, label);
    }
    return cljp_coarsen(graph, &label, seed);
}

CfSplit aggressive_coarsen(const StrengthGraph& graph,
                           const std::vector<int>& block_of_point,
                           std::uint64_t seed) {
    const CfSplit first = hcljp_coarsen(graph, block_of_point, seed);

    std::vector<int> c_points;
    std::vector<int> compact(graph.n, -1);
    for (int i = 0; i < graph.n; ++i) {
        if (first.label[i] == CfLabel::C) {
            compact[i] = static_cast<int>(c_points.size());
            c_points.push_back(i);
        }
    }

    // Second-level graph on C1: connected by strong paths of length <= 2.
    StrengthGraph second;
    second.n = static_cast<int>(c_points.size());
    second.depends_on.resize(second.n);
    second.influences.resize(second.n);
    std::vector<int> block2(second.n);
    for (int ci = 0; ci < second.n; ++ci) {
        const int i = c_points[ci];
        block2[ci] = block_of_point[i];
        std::vector<int> reach;
        for (int j : graph.depends_on[i]) {
            if (compact[j] >= 0 && j != i) reach.push_back(compact[j]);
            for (int k : graph.depends_on[j])
                if (compact[k] >= 0 && k != i) reach.push_back(compact[k]);
        }
        std::sort(reach.begin(), reach.end());
        reach.erase(std::unique(reach.begin(), reach.end()), reach.end());
        second.depends_on[ci] = std::move(reach);
    }
    for (int ci = 0; ci < second.n; ++ci)
        for (int cj : second.depends_on[ci]) second.influences[cj].push_back(ci);
    for (auto& list : second.influences) std::sort(list.begin(), list.end());

    const CfSplit refined = hcljp_coarsen(second, block2, seed + 1);

    CfSplit split;
    split.label.assign(graph.n, CfLabel::F);
    for (int ci = 0; ci < second.n; ++ci)
        if (refined.label[ci] == CfLabel::C)
            split.label[c_points[ci]] = CfLabel::C;
    return split;
}

void dump_coarsening_csv(const StrengthGraph& graph,
                         const std::vector<double>& measures,
                         const CfSplit& split, std::ostream& out) {
    out << "point,label,measure,depends_on\n";
    for (int i = 0; i < graph.n; ++i) {
        out << i << ',' << (split.label[i] == CfLabel::C ? 'C' : 'F') << ','
            << measures[i] << ',';
        for (std::size_t k = 0; k < graph.depends_on[i].size(); ++k) {
            if (k) out << ' ';
            out << graph.depends_on[i][k];
        }
        out << '\n';
    }
}

}  // namespace snks
