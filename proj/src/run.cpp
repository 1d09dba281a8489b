#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "snks/driver.hpp"

namespace snks {

namespace {

NodeOwnership make_ownership(const StructuredMesh2D& mesh,
                             const Partition& partition,
                             NodeAssignment assignment) {
    return assignment == NodeAssignment::Lowest
               ? assign_nodes_lowest_rank(mesh, partition)
               : assign_nodes_balanced(mesh, partition);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace

TransportProblem build_problem(const RunConfig& config) {
    TransportProblem problem;
    problem.mesh = build_mesh(config.mesh);
    problem.xs = config.xs;
    problem.quad = build_quadrature(config.n_dirs);
    problem.n_groups = config.n_groups;
    problem.validate();
    return problem;
}

PartitionSummary partition_summary(const RunConfig& config) {
    const StructuredMesh2D mesh = build_mesh(config.mesh);
    const Partition partition =
        hierarchical_partition(mesh, config.np1, config.np2);

    PartitionSummary summary;
    summary.np1 = config.np1;
    summary.np2 = config.np2;
    summary.used = config.node_assignment;
    summary.element_counts.assign(partition.np, 0);
    for (int part : partition.part_of_element)
        ++summary.element_counts[part];
    summary.nr_lowest =
        node_ratio(assign_nodes_lowest_rank(mesh, partition));
    summary.nr_balanced = node_ratio(assign_nodes_balanced(mesh, partition));
    return summary;
}

std::string format_partition_summary(const PartitionSummary& summary) {
    std::ostringstream out;
    out << "partition np1 x np2 = " << summary.np1 << " x " << summary.np2
        << " (" << summary.np() << " parts)\n";
    out << "elements per part:";
    for (int count : summary.element_counts) out << ' ' << count;
    out << "\n";
    out << "NR lowest-rank " << summary.nr_lowest << "\n";
    out << "NR balanced " << summary.nr_balanced << "\n";
    out << "NR used ("
        << (summary.used == NodeAssignment::Lowest ? "lowest" : "balanced")
        << ") " << summary.nr_used() << "\n";
    return out.str();
}

RunReport run(const RunConfig& config) {
    using Clock = std::chrono::steady_clock;
    config.validate();

    RunReport report;
    report.partition = partition_summary(config);
    switch (config.preconditioner) {
        case PreconditionerKind::MasmSub: report.scheme = "masm_sub"; break;
        case PreconditionerKind::MasmOneLevel:
            report.scheme = "masm_onelevel";
            break;
        case PreconditionerKind::None: report.scheme = "none"; break;
    }
    report.config_echo = serialize_config(config);

    const TransportProblem problem = build_problem(config);
    const Partition partition =
        hierarchical_partition(problem.mesh, config.np1, config.np2);
    const NodeOwnership ownership =
        make_ownership(problem.mesh, partition, config.node_assignment);

    const auto setup_start = Clock::now();
    TransportOperators ops(problem);
    MultilevelHierarchy hierarchy = build_hierarchy(
        ops.preconditioner(), config.hierarchy, ownership.owner_of_node);
    report.hierarchy = hierarchy_summary(hierarchy);
    MasmPreconditioner prec(std::move(hierarchy), partition.np,
                            config.preconditioner);
    const double setup_seconds =
        std::chrono::duration<double>(Clock::now() - setup_start).count();

    EigenResult result = newton_eigen(ops, prec, config.solver);
    report.k_effective = result.k;
    report.stats = result.stats;
    report.stats.pcsetup_seconds = setup_seconds;

    if (!config.report_path.empty())
        write_file(config.report_path, format_report(report));
    if (!config.report_csv_path.empty())
        write_file(config.report_csv_path, report_csv(report));
    if (!config.flux_csv_path.empty()) {
        std::ostringstream out;
        out << "node,x,y";
        for (int g = 0; g < problem.n_groups; ++g) out << ",phi_g" << g;
        out << "\n";
        std::vector<Vector> phi(problem.n_groups);
        for (int g = 0; g < problem.n_groups; ++g)
            phi[g] = scalar_flux(result.psi, problem, g);
        out << std::setprecision(17);
        for (int node = 0; node < problem.n_nodes(); ++node) {
            out << node << ',' << problem.mesh.node_x(node) << ','
                << problem.mesh.node_y(node);
            for (int g = 0; g < problem.n_groups; ++g)
                out << ',' << phi[g][node];
            out << "\n";
        }
        write_file(config.flux_csv_path, out.str());
    }
    if (!config.dump_blocks_prefix.empty()) {
        const BlockDiagOperator& blocks = ops.preconditioner();
        for (int b = 0; b < blocks.n_blocks(); ++b)
            write_matrix_market(blocks.blocks[b], config.dump_blocks_prefix +
                                                      "_block" +
                                                      std::to_string(b) +
                                                      ".mtx");
    }
    return report;
}

std::string format_report(const RunReport& report) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "k_effective " << report.k_effective << "\n";
    out << "flux normalization: ||B psi|| = k\n\n";
    out << "np " << report.partition.np() << "\n";
    out << "scheme " << report.scheme << "\n";
    out << "NI " << report.stats.ni << "\n";
    out << "LI " << report.stats.li << "\n";
    out << "LI_init " << report.stats.li_init << "\n";
    out << "Newton " << report.stats.newton_seconds << "\n";
    out << "LSolver " << report.stats.lsolver_seconds << "\n";
    out << "MF " << report.stats.mf_seconds << "\n";
    out << "PCSetup " << report.stats.pcsetup_seconds << "\n";
    out << "PCApply " << report.stats.pcapply_seconds << "\n";
    out << "NR " << report.partition.nr_used() << "\n\n";
    out << format_partition_summary(report.partition) << "\n";
    out << format_hierarchy_summary(report.hierarchy) << "\n";
    out << "k history:";
    for (double k : report.stats.k_history) out << ' ' << k;
    out << "\n\nconfig echo:\n" << report.config_echo;
    return out.str();
}

std::string report_csv(const RunReport& report) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "np,scheme,NI,LI,Newton,LSolver,MF,PCSetup,PCApply,NR\n";
    out << report.partition.np() << ',' << report.scheme << ','
        << report.stats.ni << ',' << report.stats.li << ','
        << report.stats.newton_seconds << ',' << report.stats.lsolver_seconds
        << ',' << report.stats.mf_seconds << ','
        << report.stats.pcsetup_seconds << ',' << report.stats.pcapply_seconds
        << ',' << report.partition.nr_used() << "\n";
    return out.str();
}

}  // namespace snks
