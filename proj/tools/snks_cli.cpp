/// Command-line front end: run a configured eigenvalue solve, the dense
/// oracle, or the partition/hierarchy reports.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "snks/driver.hpp"

namespace {

int thread_cap(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SNKS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel Newton-Krylov-Schwarz S_N transport solver"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (default 1)");

    std::string run_config, oracle_config, part_config, hier_config;
    auto* cmd_run = app.add_subcommand("run", "Solve the configured problem");
    cmd_run->add_option("config", run_config, "Config file")->required();
    auto* cmd_oracle =
        app.add_subcommand("oracle", "Dense brute-force eigenvalue reference");
    cmd_oracle->add_option("config", oracle_config, "Config file")->required();
    auto* cmd_part =
        app.add_subcommand("partition-report", "Partition and NR summary");
    cmd_part->add_option("config", part_config, "Config file")->required();
    auto* cmd_hier =
        app.add_subcommand("hierarchy-report", "Multilevel hierarchy summary");
    cmd_hier->add_option("config", hier_config, "Config file")->required();

    CLI11_PARSE(app, argc, argv);
    // All kernels currently run on the orchestrating thread; the cap is
    // accepted for interface stability.
    (void)thread_cap(threads);

    try {
        if (*cmd_run) {
            const snks::RunReport report =
                snks::run(snks::parse_config_file(run_config));
            std::cout << snks::format_report(report);
            std::cout << "\n" << snks::report_csv(report);
        } else if (*cmd_oracle) {
            const snks::OracleResult result =
                snks::oracle(snks::parse_config_file(oracle_config));
            std::cout << std::setprecision(15) << "k_dense " << result.k
                      << "\n";
        } else if (*cmd_part) {
            std::cout << snks::format_partition_summary(
                snks::partition_summary(snks::parse_config_file(part_config)));
        } else if (*cmd_hier) {
            const snks::RunConfig config = snks::parse_config_file(hier_config);
            const snks::TransportProblem problem = snks::build_problem(config);
            const snks::StructuredMesh2D& mesh = problem.mesh;
            const snks::Partition partition =
                snks::hierarchical_partition(mesh, config.np1, config.np2);
            const snks::NodeOwnership ownership =
                config.node_assignment == snks::NodeAssignment::Lowest
                    ? snks::assign_nodes_lowest_rank(mesh, partition)
                    : snks::assign_nodes_balanced(mesh, partition);
            snks::TransportOperators ops(problem);
            const snks::MultilevelHierarchy hierarchy = snks::build_hierarchy(
                ops.preconditioner(), config.hierarchy, ownership.owner_of_node);
            std::cout << snks::format_hierarchy_summary(
                snks::hierarchy_summary(hierarchy));
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
