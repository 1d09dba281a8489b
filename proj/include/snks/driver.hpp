/// @file driver.hpp
/// @brief Batch orchestration: build the problem from a RunConfig, run the
/// eigenvalue solve with the selected preconditioner, emit reports, and the
/// dense brute-force oracle used as the reference for eigenvalues.

#ifndef SNKS_DRIVER_HPP
#define SNKS_DRIVER_HPP

#include <string>
#include <vector>

#include "snks/config.hpp"
#include "snks/interp.hpp"
#include "snks/solver.hpp"
#include "snks/transport.hpp"

namespace snks {

TransportProblem build_problem(const RunConfig& config);

struct PartitionSummary {
    int np1 = 1;
    int np2 = 1;
    std::vector<int> element_counts;
    double nr_lowest = 0.0;
    double nr_balanced = 0.0;
    NodeAssignment used = NodeAssignment::Lowest;

    int np() const { return np1 * np2; }
    double nr_used() const {
        return used == NodeAssignment::Lowest ? nr_lowest : nr_balanced;
    }
};

PartitionSummary partition_summary(const RunConfig& config);
std::string format_partition_summary(const PartitionSummary& summary);

struct RunReport {
    double k_effective = 0.0;
    SolverStats stats;
    HierarchySummary hierarchy;
    PartitionSummary partition;
    std::string scheme;  // preconditioner variant name
    std::string config_echo;
};

/// Full pipeline: mesh, partition, ownership, operators, hierarchy, Newton
/// eigenvalue solve; writes the configured report/flux outputs.
RunReport run(const RunConfig& config);

std::string format_report(const RunReport& report);
/// One header and one data row with exactly the stats-table columns.
std::string report_csv(const RunReport& report);

/// Dense row-major transport and fission operators assembled independently of
/// the matrix-free path.
struct DenseOperators {
    int n = 0;
    std::vector<double> a;
    std::vector<double> b;
};

DenseOperators assemble_dense_operators(const TransportProblem& problem);

struct OracleResult {
    double k = 0.0;
    Vector psi;
};

/// Dense LU inverse power iteration to a 1e-12 relative eigenvalue change.
/// Refuses problems above 20,000 unknowns.
OracleResult oracle(const RunConfig& config);
OracleResult oracle(const TransportProblem& problem);

/// The underlying dense power iteration on explicit operators.
OracleResult oracle_power(const DenseOperators& dense);

}  // namespace snks

#endif  // SNKS_DRIVER_HPP
