#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "snks/driver.hpp"
#include "test_util.hpp"

using namespace snks;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    return status == 0 ? 0 : 1;
}

}  // namespace

TEST_CASE("fixture configs parse into the expected cross sections") {
    const RunConfig config = snks_test::two_group_config();
    CHECK(config.n_groups == 2);
    CHECK(config.n_dirs == 4);
    CHECK(config.mesh.background_material == 1);
    REQUIRE(config.mesh.regions.size() == 1);
    CHECK(config.mesh.regions[0].material == 2);
    CHECK(config.mesh.regions[0].ex0 == 2);
    CHECK(config.mesh.regions[0].ey1 == 5);

    const MaterialXs& m1 = config.xs.material(1);
    CHECK(m1.sigma_t == std::vector<double>({1.0, 1.2}));
    // sigma_s rows are from-group rows separated by ';'.
    CHECK(m1.sigma_s[0] == std::vector<double>({0.4, 0.3}));
    CHECK(m1.sigma_s[1] == std::vector<double>({0.0, 0.5}));
    const MaterialXs& m2 = config.xs.material(2);
    CHECK(m2.nu_sigma_f == std::vector<double>({0.4, 0.7}));
    CHECK(m2.chi == std::vector<double>({0.9, 0.1}));

    const RunConfig medium = snks_test::infinite_medium_config(4, 4);
    for (int side = 0; side < 4; ++side)
        CHECK(medium.mesh.boundary[side] == BoundaryCondition::Reflective);
}

TEST_CASE("parsed defaults match the solver defaults") {
    const RunConfig config = snks_test::two_group_config();
    const EigenSolveParams defaults;
    CHECK(config.solver.newton_rtol == defaults.newton_rtol);
    CHECK(config.solver.inner_linear_rtol == defaults.inner_linear_rtol);
    CHECK(config.solver.power_iters_init == defaults.power_iters_init);
    CHECK(config.solver.gmres_restart == defaults.gmres_restart);
    CHECK(config.hierarchy.theta == 0.25);
    CHECK(config.hierarchy.agg_levels == 10);
    CHECK(config.preconditioner == PreconditionerKind::MasmSub);
    CHECK(config.node_assignment == NodeAssignment::Lowest);
}

TEST_CASE("serialization round trips through the parser") {
    RunConfig config = snks_test::two_group_config();
    config.np1 = 2;
    config.np2 = 2;
    config.node_assignment = NodeAssignment::Balanced;
    config.hierarchy.theta = 0.3;
    config.solver.newton_rtol = 2.5e-7;
    config.mesh.boundary[kTop] = BoundaryCondition::Reflective;
    const std::string once = serialize_config(config);
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);

    const RunConfig back = parse_config(once);
    CHECK(back.np1 == 2);
    CHECK(back.node_assignment == NodeAssignment::Balanced);
    CHECK(back.hierarchy.theta == 0.3);
    CHECK(back.solver.newton_rtol == 2.5e-7);
    CHECK(back.mesh.boundary[kTop] == BoundaryCondition::Reflective);
}

TEST_CASE("parser errors name the offending section and key") {
    const std::string base = serialize_config(snks_test::two_group_config());

    try {
        parse_config(base + "\n[mesh]\nfrobz = 1\n");
        FAIL("expected an error");
    } catch (const std::invalid_argument& error) {
        CHECK(std::string(error.what()) ==
              "config: [mesh] frobz: unknown key");
    }

    CHECK_THROWS_WITH(parse_config("[problem]\ngroups = 1\ndirections = 4\n"),
                      "config: [mesh] nx and ny are required");
    CHECK_THROWS_AS(parse_config(base + "\n[weird]\nx = 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(base + "\n[mesh]\nboundary_left = mirror\n"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config(base + "\n[solver]\npreconditioner = ilu\n"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_config(base + "\n[problem]\ndirections = 6\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("nx = 1\n"), std::invalid_argument);
}

TEST_CASE("partition summary reports both balance metrics") {
    RunConfig config = snks_test::two_group_config();
    config.np1 = 2;
    config.np2 = 2;
    config.node_assignment = NodeAssignment::Balanced;
    const PartitionSummary summary = partition_summary(config);
    CHECK(summary.np() == 4);
    int total = 0;
    for (int c : summary.element_counts) total += c;
    CHECK(total == config.mesh.nx * config.mesh.ny);
    CHECK(summary.nr_lowest >= 1.0);
    CHECK(summary.nr_balanced >= 1.0);
    CHECK(summary.nr_used() == summary.nr_balanced);

    const std::string text = format_partition_summary(summary);
    CHECK(text.find("NR lowest-rank") != std::string::npos);
    CHECK(text.find("NR balanced") != std::string::npos);
}

TEST_CASE("run writes the report, CSV, and flux outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "snks_run_test";
    fs::create_directories(dir);

    RunConfig config = snks_test::infinite_medium_config(8, 8);
    config.np1 = 2;
    config.np2 = 2;
    config.hierarchy.coarse_cap = 20;
    config.report_path = (dir / "report.txt").string();
    config.report_csv_path = (dir / "report.csv").string();
    config.flux_csv_path = (dir / "flux.csv").string();
    config.dump_blocks_prefix = (dir / "op").string();

    const RunReport report = run(config);
    CHECK(std::abs(report.k_effective - 1.2) <= 1e-5);
    CHECK(report.scheme == "masm_sub");
    CHECK(report.stats.ni >= 1);

    const std::string text = slurp(config.report_path);
    CHECK(text.find("k_effective") != std::string::npos);
    CHECK(text.find("flux normalization: ||B psi|| = k") != std::string::npos);
    CHECK(text.find("NR ") != std::string::npos);
    CHECK(text.find("config echo:") != std::string::npos);

    std::ifstream csv(config.report_csv_path);
    std::string header, row;
    REQUIRE(std::getline(csv, header));
    REQUIRE(std::getline(csv, row));
    CHECK(header == "np,scheme,NI,LI,Newton,LSolver,MF,PCSetup,PCApply,NR");
    CHECK(row.rfind("4,masm_sub,", 0) == 0);

    std::ifstream flux(config.flux_csv_path);
    std::string flux_header;
    REQUIRE(std::getline(flux, flux_header));
    CHECK(flux_header == "node,x,y,phi_g0");
    int data_lines = 0;
    std::string line;
    while (std::getline(flux, line))
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 81);

    // Dumped level-0 blocks parse back as Matrix Market files.
    bool found_block = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".mtx") {
            const CsrMatrix block =
                read_matrix_market_file(entry.path().string());
            CHECK(block.n_rows == 81);
            found_block = true;
        }
    }
    CHECK(found_block);
    fs::remove_all(dir);
}

TEST_CASE("oracle refuses problems above the dense cap") {
    RunConfig config = snks_test::infinite_medium_config(60, 60);
    config.n_dirs = 8;
    try {
        oracle(config);
        FAIL("expected a refusal");
    } catch (const std::runtime_error& error) {
        CHECK(std::string(error.what()).find("20000") != std::string::npos);
    }
}

TEST_CASE("command-line interface end to end") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "snks_cli_test";
    fs::create_directories(dir);
    const fs::path cfg = dir / "medium.cfg";
    RunConfig config = snks_test::infinite_medium_config(6, 6);
    config.np1 = 2;
    config.hierarchy.coarse_cap = 15;
    spit(cfg, serialize_config(config));
    const fs::path out = dir / "out.txt";

    CHECK(run_command("./snks_cli run " + cfg.string() + " > " +
                      out.string()) == 0);
    const std::string run_text = slurp(out);
    CHECK(run_text.find("k_effective") != std::string::npos);
    CHECK(run_text.find("np,scheme,NI,LI,Newton,LSolver,MF,PCSetup,PCApply,NR") !=
          std::string::npos);

    CHECK(run_command("./snks_cli --threads 2 oracle " + cfg.string() +
                      " > " + out.string()) == 0);
    std::istringstream oracle_out(slurp(out));
    std::string tag;
    double k_dense = 0.0;
    oracle_out >> tag >> k_dense;
    CHECK(tag == "k_dense");
    CHECK(k_dense == doctest::Approx(1.2).epsilon(1e-6));

    CHECK(run_command("./snks_cli partition-report " + cfg.string() + " > " +
                      out.string()) == 0);
    CHECK(slurp(out).find("NR balanced") != std::string::npos);

    CHECK(run_command("./snks_cli hierarchy-report " + cfg.string() + " > " +
                      out.string()) == 0);
    CHECK(slurp(out).find("complexity") != std::string::npos);

    // Failures surface as a nonzero exit status.
    CHECK(run_command("./snks_cli run " + (dir / "missing.cfg").string() +
                      " 2> " + out.string()) == 1);
    CHECK(slurp(out).find("error:") != std::string::npos);
    CHECK(run_command("./snks_cli > " + out.string() + " 2>&1") == 1);
    fs::remove_all(dir);
}
