#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "wdeg_cli_out.txt";
    const std::string cmd = std::string(WDEG_CLI_PATH) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    return {WEXITSTATUS(status), buf.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kSmallCampaign = R"(
[campaign]
count = 2000
p_values = 2, 3
dimensions = 2
seed = 42
)";

}  // namespace

TEST_CASE("verify-lemmas: pass, determinism, falsifiability") {
    const fs::path dir = fresh_dir("wdeg_cli_verify");
    write_file(dir / "c.ini", kSmallCampaign);

    const auto a = run_cli("verify-lemmas --config " + (dir / "c.ini").string() + " --out " +
                           (dir / "run1").string());
    INFO(a.output);
    REQUIRE(a.exit_code == 0);
    REQUIRE(fs::exists(dir / "run1" / "inequality_reports.jsonl"));
    REQUIRE(fs::exists(dir / "run1" / "manifest.json"));

    // byte-identical records on a repeated run
    const auto b = run_cli("verify-lemmas --config " + (dir / "c.ini").string() + " --out " +
                           (dir / "run2").string());
    REQUIRE(b.exit_code == 0);
    REQUIRE(slurp(dir / "run1" / "inequality_reports.jsonl") ==
            slurp(dir / "run2" / "inequality_reports.jsonl"));

    // different seed changes the records
    const auto c = run_cli("verify-lemmas --config " + (dir / "c.ini").string() +
                           " --seed 7 --out " + (dir / "run3").string());
    REQUIRE(c.exit_code == 0);
    REQUIRE(slurp(dir / "run1" / "inequality_reports.jsonl") !=
            slurp(dir / "run3" / "inequality_reports.jsonl"));

    // a broken constant is a failure exit with the worst sample echoed
    write_file(dir / "broken.ini", std::string(kSmallCampaign) + "c_star_scale = 1e6\n");
    const auto d = run_cli("verify-lemmas --config " + (dir / "broken.ini").string() +
                           " --out " + (dir / "run4").string());
    REQUIRE(d.exit_code == 1);
    REQUIRE(d.output.find("worst sample") != std::string::npos);
}

TEST_CASE("verify-lemmas: usage errors") {
    const fs::path dir = fresh_dir("wdeg_cli_usage");
    write_file(dir / "zero.ini", "[campaign]\ncount = 0\n");
    const auto a = run_cli("verify-lemmas --config " + (dir / "zero.ini").string() + " --out " +
                           (dir / "o").string());
    REQUIRE(a.exit_code == 2);

    write_file(dir / "typo.ini", "[campaign]\ncuont = 10\n");
    const auto b = run_cli("verify-lemmas --config " + (dir / "typo.ini").string() + " --out " +
                           (dir / "o").string());
    REQUIRE(b.exit_code == 2);

    const auto c = run_cli("verify-lemmas --config /does/not/exist.ini --out " +
                           (dir / "o").string());
    REQUIRE(c.exit_code == 2);

    const auto d = run_cli("no-such-subcommand");
    REQUIRE(d.exit_code == 2);
}

TEST_CASE("solve subcommand writes tables, reports and trends") {
    const fs::path dir = fresh_dir("wdeg_cli_solve");
    write_file(dir / "p.ini", R"(
[problem]
nx = 8
ny = 8
tolerance = 1e-8
[solve]
levels = 8, 16
)");
    const auto a = run_cli("solve --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "run").string());
    INFO(a.output);
    REQUIRE(a.exit_code == 0);
    REQUIRE(fs::exists(dir / "run" / "solve_reports.jsonl"));
    REQUIRE(fs::exists(dir / "run" / "refinement.csv"));
    REQUIRE(fs::exists(dir / "run" / "solution_8.txt"));
    REQUIRE(fs::exists(dir / "run" / "triangles_16.txt"));

    // node table column layout: index x y boundary value
    std::ifstream table(dir / "run" / "solution_8.txt");
    std::string first;
    std::getline(table, first);
    std::istringstream head(first);
    long idx;
    double x, y, value;
    int boundary;
    REQUIRE((head >> idx >> x >> y >> boundary >> value));
    REQUIRE(idx == 0);
    REQUIRE(boundary == 1);

    // measured order in the refinement table is first order or better
    {
        std::ifstream csv(dir / "run" / "refinement.csv");
        std::string line;
        std::getline(csv, line);  // header
        std::getline(csv, line);  // coarse row
        REQUIRE(std::getline(csv, line));
        double order = 0.0;
        int field = 0;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ','); ++field)
            if (field == 4) order = std::stod(cell);
        REQUIRE(order >= 0.9);
    }

    // report consolidates the run directory and is idempotent
    const auto r1 = run_cli("report " + (dir / "run").string());
    REQUIRE(r1.exit_code == 0);
    const std::string summary = slurp(dir / "run" / "summary.txt");
    REQUIRE(summary.find("refinement trend") != std::string::npos);
    const auto r2 = run_cli("report " + (dir / "run").string());
    REQUIRE(r2.exit_code == 0);
    REQUIRE(slurp(dir / "run" / "summary.txt") == summary);
}

TEST_CASE("solve determinism: byte-identical records") {
    const fs::path dir = fresh_dir("wdeg_cli_solve_det");
    write_file(dir / "p.ini", "[problem]\nnx = 8\nny = 8\n[solve]\nlevels = 8\n");
    const auto a = run_cli("solve --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "r1").string());
    const auto b = run_cli("solve --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "r2").string());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(slurp(dir / "r1" / "solve_reports.jsonl") == slurp(dir / "r2" / "solve_reports.jsonl"));
    REQUIRE(slurp(dir / "r1" / "solution_8.txt") == slurp(dir / "r2" / "solution_8.txt"));
    REQUIRE(slurp(dir / "r1" / "refinement.csv") == slurp(dir / "r2" / "refinement.csv"));
}

TEST_CASE("solver budget exhaustion exits with its own code") {
    const fs::path dir = fresh_dir("wdeg_cli_budget");
    write_file(dir / "p.ini", "[problem]\nnx = 8\nny = 8\nmax_inner = 2\n[solve]\nlevels = 8\n");
    const auto a = run_cli("solve --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "r").string());
    REQUIRE(a.exit_code == 3);
}

TEST_CASE("compare subcommand") {
    const fs::path dir = fresh_dir("wdeg_cli_compare");
    write_file(dir / "p.ini", R"(
[problem]
nx = 8
ny = 8
rhs_kind = constant
rhs_value = 2
rhs_positive = true
rhs_nonincreasing = true
boundary = -(x^2)
[compare]
pairs = 2
seed = 42
)");
    const auto a = run_cli("compare --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "run").string());
    INFO(a.output);
    REQUIRE(a.exit_code == 0);
    REQUIRE(fs::exists(dir / "run" / "compare_reports.jsonl"));
    REQUIRE(a.output.find("pass") != std::string::npos);
}

TEST_CASE("compare subcommand: explicit translation pair") {
    const fs::path dir = fresh_dir("wdeg_cli_compare_shift");
    write_file(dir / "p.ini", R"(
[problem]
nx = 8
ny = 8
rhs_positive = true
rhs_nonincreasing = true
boundary = -(x^2)
[compare]
boundary_lower = -(x^2)
boundary_upper = -(x^2) + 1
)");
    const auto a = run_cli("compare --config " + (dir / "p.ini").string() + " --out " +
                           (dir / "run").string());
    INFO(a.output);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.output.find("pass") != std::string::npos);
}

TEST_CASE("diagnose and sobolev-check subcommands") {
    const fs::path dir = fresh_dir("wdeg_cli_diag");
    write_file(dir / "d.ini", "[problem]\nnx = 8\nny = 8\n[diagnose]\nlevels = 8, 16\n");
    const auto a = run_cli("diagnose --config " + (dir / "d.ini").string() + " --out " +
                           (dir / "d").string());
    INFO(a.output);
    REQUIRE(a.exit_code == 0);
    REQUIRE(fs::exists(dir / "d" / "regularity.jsonl"));
    REQUIRE(fs::exists(dir / "d" / "regularity_trend.csv"));

    write_file(dir / "s.ini", "[problem]\nnx = 8\nny = 8\n[sobolev]\nt = 1\nq = 3\nlevels = 8\n");
    const auto b = run_cli("sobolev-check --config " + (dir / "s.ini").string() + " --out " +
                           (dir / "s").string());
    INFO(b.output);
    REQUIRE(b.exit_code == 0);
    REQUIRE(fs::exists(dir / "s" / "sobolev_reports.jsonl"));

    // exponent conditions are named in the error message
    write_file(dir / "bad.ini",
               "[problem]\nnx = 8\nny = 8\n[sobolev]\nt = 1\nq = 4.5\nlevels = 8\n");
    const auto c = run_cli("sobolev-check --config " + (dir / "bad.ini").string() + " --out " +
                           (dir / "sb").string());
    REQUIRE(c.exit_code == 2);
    REQUIRE(c.output.find("(iii)") != std::string::npos);
}

TEST_CASE("report on a directory without a manifest") {
    const fs::path dir = fresh_dir("wdeg_cli_report_empty");
    const auto a = run_cli("report " + dir.string());
    REQUIRE(a.exit_code == 6);
    REQUIRE(a.output.find("manifest") != std::string::npos);
}
