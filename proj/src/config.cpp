#include "snks/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace snks {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
    throw std::invalid_argument("config: [" + section + "] " + key + ": " +
                                what);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(section, key, "not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& section, const std::string& key,
                    const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(section, key, "not an integer: '" + value + "'");
    }
}

std::vector<double> parse_doubles(const std::string& section,
                                  const std::string& key,
                                  const std::string& value) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string token;
    while (in >> token) out.push_back(parse_double(section, key, token));
    return out;
}

BoundaryCondition parse_boundary(const std::string& section,
                                 const std::string& key,
                                 const std::string& value) {
    if (value == "vacuum") return BoundaryCondition::Vacuum;
    if (value == "reflective") return BoundaryCondition::Reflective;
    fail(section, key, "expected vacuum or reflective");
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::string format_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (mesh.nx < 1 || mesh.ny < 1)
        throw std::invalid_argument("config: [mesh] nx/ny must be >= 1");
    if (n_groups < 1)
        throw std::invalid_argument("config: [problem] groups must be >= 1");
    if (n_dirs < 4 || n_dirs % 4 != 0)
        throw std::invalid_argument(
            "config: [problem] directions must be a positive multiple of 4");
    if (np1 < 1 || np2 < 1)
        throw std::invalid_argument("config: [partition] np1/np2 must be >= 1");
    if (hierarchy.agg_levels > hierarchy.max_levels)
        throw std::invalid_argument(
            "config: [hierarchy] agg_levels exceeds max_levels");
    if (xs.n_groups != n_groups)
        throw std::invalid_argument(
            "config: material group counts do not match [problem] groups");
    xs.validate();
    auto check_material = [&](int id) {
        if (id >= 0 && !xs.materials.count(id))
            throw std::invalid_argument("config: material " +
                                        std::to_string(id) + " not defined");
    };
    check_material(mesh.background_material);
    for (const auto& region : mesh.regions) check_material(region.material);
    solver.validate();
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    config.xs.n_groups = -1;  // filled from [problem]

    std::string section;
    int material_id = -1;
    MaterialXs* material = nullptr;
    bool saw_nx = false, saw_ny = false, saw_groups = false, saw_dirs = false;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section: " +
                                            line);
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.rfind("material", 0) == 0) {
                const std::string id_text = trim(name.substr(8));
                if (id_text.empty())
                    throw std::invalid_argument(
                        "config: material section needs an id");
                material_id =
                    static_cast<int>(parse_int("material", "id", id_text));
                material = &config.xs.materials[material_id];
                section = "material";
            } else if (name == "mesh" || name == "problem" ||
                       name == "partition" || name == "hierarchy" ||
                       name == "solver" || name == "run") {
                section = name;
                material = nullptr;
            } else {
                throw std::invalid_argument("config: unknown section [" +
                                            name + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value: " +
                                        line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw std::invalid_argument("config: key outside any section: " +
                                        key);

        if (section == "mesh") {
            if (key == "nx") {
                config.mesh.nx = static_cast<int>(parse_int(section, key, value));
                saw_nx = true;
            } else if (key == "ny") {
                config.mesh.ny = static_cast<int>(parse_int(section, key, value));
                saw_ny = true;
            } else if (key == "hx") {
                config.mesh.hx = parse_double(section, key, value);
            } else if (key == "hy") {
                config.mesh.hy = parse_double(section, key, value);
            } else if (key == "background_material") {
                config.mesh.background_material =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "region") {
                std::istringstream fields(value);
                MeshConfig::Region region{};
                if (!(fields >> region.material >> region.ex0 >> region.ex1 >>
                      region.ey0 >> region.ey1))
                    fail(section, key,
                         "expected: material ex0 ex1 ey0 ey1");
                config.mesh.regions.push_back(region);
            } else if (key == "boundary_left") {
                config.mesh.boundary[kLeft] = parse_boundary(section, key, value);
            } else if (key == "boundary_right") {
                config.mesh.boundary[kRight] = parse_boundary(section, key, value);
            } else if (key == "boundary_bottom") {
                config.mesh.boundary[kBottom] =
                    parse_boundary(section, key, value);
            } else if (key == "boundary_top") {
                config.mesh.boundary[kTop] = parse_boundary(section, key, value);
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "problem") {
            if (key == "groups") {
                config.n_groups = static_cast<int>(parse_int(section, key, value));
                saw_groups = true;
            } else if (key == "directions") {
                config.n_dirs = static_cast<int>(parse_int(section, key, value));
                saw_dirs = true;
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "material") {
            if (key == "sigma_t") {
                material->sigma_t = parse_doubles(section, key, value);
            } else if (key == "nu_sigma_f") {
                material->nu_sigma_f = parse_doubles(section, key, value);
            } else if (key == "chi") {
                material->chi = parse_doubles(section, key, value);
            } else if (key == "sigma_s") {
                // Rows (from-group) separated by ';'.
                material->sigma_s.clear();
                std::istringstream rows(value);
                std::string row;
                while (std::getline(rows, row, ';'))
                    material->sigma_s.push_back(
                        parse_doubles(section, key, trim(row)));
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "partition") {
            if (key == "np1") {
                config.np1 = static_cast<int>(parse_int(section, key, value));
            } else if (key == "np2") {
                config.np2 = static_cast<int>(parse_int(section, key, value));
            } else if (key == "node_assignment") {
                if (value == "lowest") config.node_assignment = NodeAssignment::Lowest;
                else if (value == "balanced")
                    config.node_assignment = NodeAssignment::Balanced;
                else fail(section, key, "expected lowest or balanced");
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "hierarchy") {
            if (key == "theta") {
                config.hierarchy.theta = parse_double(section, key, value);
            } else if (key == "agg_levels") {
                config.hierarchy.agg_levels =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "max_levels") {
                config.hierarchy.max_levels =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "coarse_cap") {
                config.hierarchy.coarse_cap =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "seed") {
                config.hierarchy.seed =
                    static_cast<std::uint64_t>(parse_int(section, key, value));
            } else if (key == "subspace_block") {
                config.hierarchy.subspace_block =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "interp") {
                if (value == "direct") config.hierarchy.use_classical = false;
                else if (value == "classical")
                    config.hierarchy.use_classical = true;
                else fail(section, key, "expected direct or classical");
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "solver") {
            if (key == "newton_rtol") {
                config.solver.newton_rtol = parse_double(section, key, value);
            } else if (key == "inner_linear_rtol") {
                config.solver.inner_linear_rtol =
                    parse_double(section, key, value);
            } else if (key == "power_iters_init") {
                config.solver.power_iters_init =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "power_inner_rtol") {
                config.solver.power_inner_rtol =
                    parse_double(section, key, value);
            } else if (key == "tol_psi") {
                config.solver.tol_psi = parse_double(section, key, value);
            } else if (key == "tol_k") {
                config.solver.tol_k = parse_double(section, key, value);
            } else if (key == "max_newton") {
                config.solver.max_newton =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "max_power") {
                config.solver.max_power =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "fd_delta") {
                config.solver.fd_delta = parse_double(section, key, value);
            } else if (key == "gmres_restart") {
                config.solver.gmres_restart =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "gmres_max_iters") {
                config.solver.gmres_max_iters =
                    static_cast<int>(parse_int(section, key, value));
            } else if (key == "preconditioner") {
                if (value == "masm_sub")
                    config.preconditioner = PreconditionerKind::MasmSub;
                else if (value == "masm_onelevel")
                    config.preconditioner = PreconditionerKind::MasmOneLevel;
                else if (value == "none")
                    config.preconditioner = PreconditionerKind::None;
                else fail(section, key,
                          "expected masm_sub, masm_onelevel, or none");
            } else {
                fail(section, key, "unknown key");
            }
        } else if (section == "run") {
            if (key == "report") config.report_path = value;
            else if (key == "report_csv") config.report_csv_path = value;
            else if (key == "flux_csv") config.flux_csv_path = value;
            else if (key == "dump_blocks") config.dump_blocks_prefix = value;
            else fail(section, key, "unknown key");
        }
    }

    if (!saw_nx || !saw_ny)
        throw std::invalid_argument("config: [mesh] nx and ny are required");
    if (!saw_groups || !saw_dirs)
        throw std::invalid_argument(
            "config: [problem] groups and directions are required");
    if (config.xs.materials.empty())
        throw std::invalid_argument("config: at least one material is required");
    config.xs.n_groups = config.n_groups;
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    out << "[mesh]\n";
    out << "nx = " << config.mesh.nx << "\n";
    out << "ny = " << config.mesh.ny << "\n";
    out << "hx = " << format_double(config.mesh.hx) << "\n";
    out << "hy = " << format_double(config.mesh.hy) << "\n";
    out << "background_material = " << config.mesh.background_material << "\n";
    for (const auto& region : config.mesh.regions)
        out << "region = " << region.material << ' ' << region.ex0 << ' '
            << region.ex1 << ' ' << region.ey0 << ' ' << region.ey1 << "\n";
    const char* side_keys[4] = {"boundary_left", "boundary_right",
                                "boundary_bottom", "boundary_top"};
    for (int side = 0; side < 4; ++side)
        out << side_keys[side] << " = "
            << (config.mesh.boundary[side] == BoundaryCondition::Vacuum
                    ? "vacuum"
                    : "reflective")
            << "\n";

    out << "\n[problem]\n";
    out << "groups = " << config.n_groups << "\n";
    out << "directions = " << config.n_dirs << "\n";

    for (const auto& [id, m] : config.xs.materials) {
        out << "\n[material " << id << "]\n";
        out << "sigma_t = " << format_doubles(m.sigma_t) << "\n";
        out << "sigma_s = ";
        for (std::size_t g = 0; g < m.sigma_s.size(); ++g) {
            if (g) out << " ; ";
            out << format_doubles(m.sigma_s[g]);
        }
        out << "\n";
        out << "nu_sigma_f = " << format_doubles(m.nu_sigma_f) << "\n";
        out << "chi = " << format_doubles(m.chi) << "\n";
    }

    out << "\n[partition]\n";
    out << "np1 = " << config.np1 << "\n";
    out << "np2 = " << config.np2 << "\n";
    out << "node_assignment = "
        << (config.node_assignment == NodeAssignment::Lowest ? "lowest"
                                                             : "balanced")
        << "\n";

    out << "\n[hierarchy]\n";
    out << "theta = " << format_double(config.hierarchy.theta) << "\n";
    out << "agg_levels = " << config.hierarchy.agg_levels << "\n";
    out << "max_levels = " << config.hierarchy.max_levels << "\n";
    out << "coarse_cap = " << config.hierarchy.coarse_cap << "\n";
    out << "seed = " << config.hierarchy.seed << "\n";
    out << "subspace_block = " << config.hierarchy.subspace_block << "\n";
    out << "interp = "
        << (config.hierarchy.use_classical ? "classical" : "direct") << "\n";

    out << "\n[solver]\n";
    out << "newton_rtol = " << format_double(config.solver.newton_rtol) << "\n";
    out << "inner_linear_rtol = "
        << format_double(config.solver.inner_linear_rtol) << "\n";
    out << "power_iters_init = " << config.solver.power_iters_init << "\n";
    out << "power_inner_rtol = "
        << format_double(config.solver.power_inner_rtol) << "\n";
    out << "tol_psi = " << format_double(config.solver.tol_psi) << "\n";
    out << "tol_k = " << format_double(config.solver.tol_k) << "\n";
    out << "max_newton = " << config.solver.max_newton << "\n";
    out << "max_power = " << config.solver.max_power << "\n";
    out << "fd_delta = " << format_double(config.solver.fd_delta) << "\n";
    out << "gmres_restart = " << config.solver.gmres_restart << "\n";
    out << "gmres_max_iters = " << config.solver.gmres_max_iters << "\n";
    out << "preconditioner = ";
    switch (config.preconditioner) {
        case PreconditionerKind::MasmSub: out << "masm_sub"; break;
        case PreconditionerKind::MasmOneLevel: out << "masm_onelevel"; break;
        case PreconditionerKind::None: out << "none"; break;
    }
    out << "\n";

    out << "\n[run]\n";
    if (!config.report_path.empty())
        out << "report = " << config.report_path << "\n";
    if (!config.report_csv_path.empty())
        out << "report_csv = " << config.report_csv_path << "\n";
    if (!config.flux_csv_path.empty())
        out << "flux_csv = " << config.flux_csv_path << "\n";
    if (!config.dump_blocks_prefix.empty())
        out << "dump_blocks = " << config.dump_blocks_prefix << "\n";
    return out.str();
}

}  // namespace snks
