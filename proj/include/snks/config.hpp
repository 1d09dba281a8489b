/// @file config.hpp
/// @brief Run configuration: a flat sectioned key-value text format with
/// strict key checking, defaults matching the solver settings, and a
/// canonical serializer for round-trip checks.

#ifndef SNKS_CONFIG_HPP
#define SNKS_CONFIG_HPP

#include <string>

#include "snks/interp.hpp"
#include "snks/mesh.hpp"
#include "snks/solver.hpp"
#include "snks/transport.hpp"

namespace snks {

enum class NodeAssignment { Lowest, Balanced };

struct RunConfig {
    MeshConfig mesh;
    CrossSectionLibrary xs;
    int n_groups = 0;
    int n_dirs = 0;
    int np1 = 1;
    int np2 = 1;
    NodeAssignment node_assignment = NodeAssignment::Lowest;
    HierarchyParams hierarchy;
    EigenSolveParams solver;
    PreconditionerKind preconditioner = PreconditionerKind::MasmSub;
    std::string report_path;
    std::string report_csv_path;
    std::string flux_csv_path;
    std::string dump_blocks_prefix;

    void validate() const;
};

/// Parses the documented key set; unknown keys, missing required keys, and
/// invariant violations raise std::invalid_argument naming the key.
RunConfig parse_config(const std::string& text);

RunConfig parse_config_file(const std::string& path);

/// Canonical text form; parse(serialize(parse(text))) == parse(text).
std::string serialize_config(const RunConfig& config);

}  // namespace snks

#endif  // SNKS_CONFIG_HPP
