// Command-line front end: inequality campaigns, solves, comparison and
// regularity experiments, and weighted Sobolev checks, all driven by
// key-value config files. See README.md for the schema and exit codes.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wdeg/campaign.hpp"
#include "wdeg/config.hpp"
#include "wdeg/diagnostics.hpp"
#include "wdeg/experiments.hpp"
#include "wdeg/records.hpp"
#include "wdeg/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
    kOk = 0,
    kViolation = 1,
    kUsage = 2,
    kBudgetExhausted = 3,
    kComparisonViolation = 4,
    kNumericalFailure = 5,
    kMissingInput = 6,
};

json resolved_problem(const wdeg::ProblemSetup& setup) {
    return {{"bounds", {setup.bounds.x0, setup.bounds.x1, setup.bounds.y0, setup.bounds.y1}},
            {"nx", setup.nx},
            {"ny", setup.ny},
            {"p", setup.p},
            {"rhs", setup.rhs.description},
            {"rhs_positive", setup.rhs.positive},
            {"rhs_nonincreasing", setup.rhs.nonincreasing_in_s},
            {"boundary", setup.boundary.text},
            {"solve", wdeg::to_json(setup.solve)}};
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    auto* c = cmd->add_option("--config", args.config_path, "configuration file");
    if (needs_config) c->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override")->each([&args](const std::string&) {
        args.seed_given = true;
    });
    cmd->add_option("--threads", args.threads, "worker threads");
}

int cmd_verify_lemmas(const CommonArgs& args) {
    wdeg::Config cfg = wdeg::Config::parse_file(args.config_path);
    cfg.restrict({{"campaign", wdeg::campaign_keys()}});
    wdeg::SampleCampaign campaign = wdeg::campaign_from_config(cfg);
    if (args.seed_given) campaign.seed = args.seed;

    const auto reports = wdeg::run_campaign(campaign, args.threads);

    fs::create_directories(args.out_dir);
    {
        wdeg::RecordWriter writer(fs::path(args.out_dir) / "inequality_reports.jsonl",
                                  "inequality-report");
        for (const auto& r : reports) writer.write(wdeg::to_json(r));
    }
    wdeg::write_manifest(args.out_dir, "verify-lemmas", cfg, campaign.seed,
                         {"inequality_reports.jsonl"}, iso_timestamp(),
                         {{"campaign", wdeg::to_json(campaign)}, {"threads", args.threads}});

    bool violated = false;
    for (const auto& r : reports) {
        std::printf("%-24s samples %-10llu violations %-6llu worst rel margin %.3e\n",
                    r.check_id.c_str(), static_cast<unsigned long long>(r.samples),
                    static_cast<unsigned long long>(r.violations), r.worst_rel_margin);
        if (!r.passed()) {
            violated = true;
            std::printf("  worst sample: %s\n", wdeg::to_json(r.worst).dump().c_str());
        }
    }
    return violated ? kViolation : kOk;
}

const std::set<std::string> kSolveKeys = {"levels", "write_solutions"};

int cmd_solve(const CommonArgs& args) {
    wdeg::Config cfg = wdeg::Config::parse_file(args.config_path);
    auto schema = wdeg::problem_schema();
    schema["solve"] = kSolveKeys;
    cfg.restrict(schema);
    const wdeg::ProblemSetup setup = wdeg::problem_from_config(cfg);
    std::vector<std::size_t> levels;
    for (double v : cfg.get_numbers("solve", "levels", {static_cast<double>(setup.nx)}))
        levels.push_back(static_cast<std::size_t>(v));
    const bool write_solutions = cfg.get_bool("solve", "write_solutions", true);

    fs::create_directories(args.out_dir);
    std::vector<wdeg::LevelResult> rows;
    std::vector<std::string> outputs = {"solve_reports.jsonl", "refinement.csv"};
    {
        wdeg::RecordWriter writer(fs::path(args.out_dir) / "solve_reports.jsonl",
                                  "solve-report");
        for (const std::size_t n : levels) {
            const wdeg::TriMesh mesh = wdeg::TriMesh::build(setup.bounds, n, n);
            wdeg::LevelResult lvl = wdeg::run_level(setup, n, n, mesh);
            json rec = {{"nx", lvl.nx},
                        {"ny", lvl.ny},
                        {"spacing", lvl.spacing},
                        {"h", lvl.h},
                        {"max_error", lvl.max_error},
                        {"report", wdeg::to_json(lvl.result.report)}};
            writer.write(rec);
            if (write_solutions) {
                char name[64];
                std::snprintf(name, sizeof(name), "solution_%zu.txt", n);
                std::ofstream table(fs::path(args.out_dir) / name);
                wdeg::write_node_table(table, mesh, &lvl.result.u.values);
                outputs.emplace_back(name);
                std::snprintf(name, sizeof(name), "triangles_%zu.txt", n);
                std::ofstream tri_table(fs::path(args.out_dir) / name);
                wdeg::write_triangle_table(tri_table, mesh);
                outputs.emplace_back(name);
            }
            std::printf("level nx=%zu spacing=%.6g max_error=%.6g weak_residual=%.3e "
                        "energy=%.12g iterations=%d\n",
                        n, lvl.spacing, lvl.max_error, lvl.result.report.weak_residual,
                        lvl.result.report.energy, lvl.result.report.inner_iterations);
            rows.push_back(std::move(lvl));
        }
    }
    {
        std::ofstream csv(fs::path(args.out_dir) / "refinement.csv");
        csv << "nx,spacing,h,max_error,order,weak_residual,energy,inner_iterations\n";
        const auto orders = wdeg::measured_orders(rows);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            char line[256];
            std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n",
                          rows[k].nx, rows[k].spacing, rows[k].h, rows[k].max_error,
                          k == 0 ? 0.0 : orders[k - 1], rows[k].result.report.weak_residual,
                          rows[k].result.report.energy, rows[k].result.report.inner_iterations);
            csv << line;
        }
    }
    json resolved = {{"problem", resolved_problem(setup)}, {"levels", levels},
                     {"write_solutions", write_solutions}};
    wdeg::write_manifest(args.out_dir, "solve", cfg, args.seed_given ? args.seed : 0, outputs,
                         iso_timestamp(), resolved);
    return kOk;
}

const std::set<std::string> kCompareKeys = {"boundary_lower", "boundary_upper", "pairs",
                                            "tol_cmp", "seed"};

int cmd_compare(const CommonArgs& args) {
    wdeg::Config cfg = wdeg::Config::parse_file(args.config_path);
    auto schema = wdeg::problem_schema();
    schema["compare"] = kCompareKeys;
    cfg.restrict(schema);
    const wdeg::ProblemSetup setup = wdeg::problem_from_config(cfg);
    const std::uint64_t seed = args.seed_given
                                   ? args.seed
                                   : static_cast<std::uint64_t>(
                                         cfg.get_integer("compare", "seed", 42));
    const double tol_cmp = cfg.get_number("compare", "tol_cmp", -1.0);

    std::vector<std::pair<std::string, std::string>> pairs;
    if (cfg.has("compare", "boundary_lower") || cfg.has("compare", "boundary_upper")) {
        pairs.emplace_back(cfg.get_string("compare", "boundary_lower"),
                           cfg.get_string("compare", "boundary_upper"));
    } else {
        const auto count = static_cast<int>(cfg.get_integer("compare", "pairs", 5));
        for (int k = 0; k < count; ++k)
            pairs.push_back(wdeg::seeded_boundary_pair(setup.bounds, setup.boundary.text, seed, k));
    }

    const wdeg::TriMesh mesh = wdeg::TriMesh::build(setup.bounds, setup.nx, setup.ny);
    fs::create_directories(args.out_dir);
    bool violated = false;
    {
        wdeg::RecordWriter writer(fs::path(args.out_dir) / "compare_reports.jsonl",
                                  "comparison-verdict");
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto lower = wdeg::boundary_from_text(pairs[k].first);
            const auto upper = wdeg::boundary_from_text(pairs[k].second);
            const wdeg::ComparisonVerdict verdict = wdeg::compare(
                mesh, lower.g, upper.g, setup.rhs, setup.p, setup.solve, tol_cmp);
            json rec = {{"pair", k},
                        {"boundary_lower", pairs[k].first},
                        {"boundary_upper", pairs[k].second},
                        {"min_difference", verdict.min_difference},
                        {"tol_cmp", verdict.tol_cmp},
                        {"violating_nodes", verdict.violating_nodes.size()},
                        {"passed", verdict.passed()}};
            writer.write(rec);
            std::printf("pair %zu: min(v - u) = %.6e (tolerance -%.3e) %s\n", k,
                        verdict.min_difference, verdict.tol_cmp,
                        verdict.passed() ? "pass" : "VIOLATION");
            if (!verdict.passed()) violated = true;
        }
    }
    json pair_list = json::array();
    for (const auto& [lo, hi] : pairs) pair_list.push_back({{"lower", lo}, {"upper", hi}});
    wdeg::write_manifest(args.out_dir, "compare", cfg, seed, {"compare_reports.jsonl"},
                         iso_timestamp(),
                         {{"problem", resolved_problem(setup)},
                          {"pairs", pair_list},
                          {"tol_cmp", tol_cmp}});
    return violated ? kComparisonViolation : kOk;
}

const std::set<std::string> kDiagnoseKeys = {"levels", "beta", "t", "eps_floors", "lattice"};

int cmd_diagnose(const CommonArgs& args) {
    wdeg::Config cfg = wdeg::Config::parse_file(args.config_path);
    auto schema = wdeg::problem_schema();
    schema["diagnose"] = kDiagnoseKeys;
    cfg.restrict(schema);
    const wdeg::ProblemSetup setup = wdeg::problem_from_config(cfg);
    std::vector<std::size_t> levels;
    for (double v : cfg.get_numbers("diagnose", "levels", {static_cast<double>(setup.nx)}))
        levels.push_back(static_cast<std::size_t>(v));
    const double beta = cfg.get_number("diagnose", "beta", 0.0);
    const double t_exp =
        cfg.get_number("diagnose", "t", std::max(0.0, (setup.p - 2.0) / setup.p));
    const auto eps_floors = cfg.get_numbers("diagnose", "eps_floors", {1e-2, 1e-4, 0.0});
    wdeg::KernelParams kernel;
    kernel.lattice = static_cast<std::size_t>(cfg.get_integer("diagnose", "lattice", 5));
    kernel.validate();

    fs::create_directories(args.out_dir);
    std::vector<wdeg::RegularityReport> reports;
    {
        wdeg::RecordWriter writer(fs::path(args.out_dir) / "regularity.jsonl",
                                  "regularity-report");
        for (const std::size_t n : levels) {
            const wdeg::TriMesh mesh = wdeg::TriMesh::build(setup.bounds, n, n);
            const wdeg::SolveResult solved =
                wdeg::minimize(mesh, setup.boundary.g, setup.rhs, setup.p, setup.solve);
            wdeg::RegularityReport rep =
                wdeg::regularity_report(solved.u, setup.p, beta, t_exp,
                                        wdeg::default_interior(mesh), eps_floors, kernel);
            writer.write(wdeg::to_json(rep));
            std::printf("level nx=%zu i1=%.6g i2=%.6g seminorm_half=%.6g seminorm_flux=%.6g\n",
                        n, rep.i1, rep.i2, rep.seminorm_half, rep.seminorm_flux);
            reports.push_back(std::move(rep));
        }
    }
    {
        std::ofstream csv(fs::path(args.out_dir) / "regularity_trend.csv");
        csv << "h,i1,i2,seminorm_half,seminorm_flux,degeneracy_at_1,ratio_seminorm_half\n";
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const double ratio =
                k == 0 ? 0.0 : reports[k].seminorm_half / reports[k - 1].seminorm_half;
            char line[256];
            std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                          reports[k].h, reports[k].i1, reports[k].i2, reports[k].seminorm_half,
                          reports[k].seminorm_flux, reports[k].degeneracy[0].second, ratio);
            csv << line;
        }
    }
    wdeg::write_manifest(args.out_dir, "diagnose", cfg, 0,
                         {"regularity.jsonl", "regularity_trend.csv"}, iso_timestamp(),
                         {{"problem", resolved_problem(setup)},
                          {"levels", levels},
                          {"beta", beta},
                          {"t", t_exp},
                          {"eps_floors", eps_floors}});
    return kOk;
}

const std::set<std::string> kSobolevKeys = {"t",         "gamma",   "q",      "rho",
                                            "rho_floor", "functions", "levels", "lattice"};

int cmd_sobolev(const CommonArgs& args) {
    wdeg::Config cfg = wdeg::Config::parse_file(args.config_path);
    auto schema = wdeg::problem_schema();
    schema["sobolev"] = kSobolevKeys;
    cfg.restrict(schema);
    const wdeg::ProblemSetup setup = wdeg::problem_from_config(cfg);

    wdeg::SobolevParams params;
    params.t = cfg.get_number("sobolev", "t", 1.0);
    params.gamma = cfg.get_number("sobolev", "gamma", 0.0);
    params.q = cfg.get_number("sobolev", "q", 3.0);
    params.lattice = static_cast<std::size_t>(cfg.get_integer("sobolev", "lattice", 5));
    params.check_conditions();

    const std::string rho_kind = cfg.get_string("sobolev", "rho", "one");
    const double rho_floor = cfg.get_number("sobolev", "rho_floor", 0.1);
    const auto functions = static_cast<std::size_t>(cfg.get_integer("sobolev", "functions", 10));
    std::vector<std::size_t> levels;
    for (double v : cfg.get_numbers("sobolev", "levels", {static_cast<double>(setup.nx)}))
        levels.push_back(static_cast<std::size_t>(v));

    fs::create_directories(args.out_dir);
    double c_n = -1.0;
    bool all_within = true;
    {
        wdeg::RecordWriter writer(fs::path(args.out_dir) / "sobolev_reports.jsonl",
                                  "sobolev-report");
        for (const std::size_t n : levels) {
            const wdeg::TriMesh mesh = wdeg::TriMesh::build(setup.bounds, n, n);
            const auto bumps = wdeg::standard_test_bumps(mesh, functions);

            std::vector<double> rho(mesh.tri_count(), 1.0);
            if (rho_kind == "solution") {
                const wdeg::SolveResult solved =
                    wdeg::minimize(mesh, setup.boundary.g, setup.rhs, setup.p, setup.solve);
                const wdeg::GradField g = wdeg::gradient(solved.u);
                for (std::size_t t = 0; t < mesh.tri_count(); ++t)
                    rho[t] = std::pow(
                        wdeg::positive_part(g.per_tri[t].norm() - 1.0) + rho_floor,
                        setup.p - 1.0);
            } else if (rho_kind != "one") {
                throw wdeg::config_error("sobolev: rho must be 'one' or 'solution'");
            }

            if (c_n <= 0.0) {
                // dimensional constant fitted once on rho = 1, then frozen
                const std::vector<double> ones(mesh.tri_count(), 1.0);
                c_n = wdeg::sobolev_check(mesh, bumps, ones, params, -1.0).c_n;
            }
            const wdeg::SobolevReport rep = wdeg::sobolev_check(mesh, bumps, rho, params, c_n);
            json rec = wdeg::to_json(rep);
            rec["nx"] = n;
            rec["rho"] = rho_kind;
            writer.write(rec);
            std::printf("level nx=%zu q*=%.6g K=%.6g max_ratio=%.6g budget=%.6g %s\n", n,
                        rep.q_star, rep.big_k, rep.max_ratio, rep.budget,
                        rep.within_budget ? "pass" : "EXCEEDED");
            all_within = all_within && rep.within_budget;
        }
    }
    wdeg::write_manifest(args.out_dir, "sobolev-check", cfg, 0, {"sobolev_reports.jsonl"},
                         iso_timestamp(),
                         {{"problem", resolved_problem(setup)},
                          {"t", params.t},
                          {"gamma", params.gamma},
                          {"q", params.q},
                          {"rho", rho_kind},
                          {"rho_floor", rho_floor},
                          {"functions", functions},
                          {"levels", levels},
                          {"c_n", c_n}});
    return all_within ? kOk : kViolation;
}

int cmd_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    if (!fs::exists(dir / "manifest.json")) {
        std::fprintf(stderr, "error: missing manifest: %s\n",
                     (dir / "manifest.json").string().c_str());
        return kMissingInput;
    }
    std::ifstream mf(dir / "manifest.json");
    const json manifest = json::parse(mf);

    std::vector<fs::path> record_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".jsonl") record_files.push_back(entry.path());
    }
    std::sort(record_files.begin(), record_files.end());

    std::ofstream summary(dir / "summary.txt");
    std::ofstream csv(dir / "summary.csv");
    summary << "run summary for subcommand: " << manifest.value("subcommand", "?") << "\n";
    csv << "file,record,key,value\n";
    for (const auto& file : record_files) {
        const auto records = wdeg::read_records(file);
        summary << file.filename().string() << ": " << records.size() << " records\n";
        for (std::size_t k = 0; k < records.size(); ++k) {
            for (const auto& [key, value] : records[k].items()) {
                if (value.is_number() || value.is_boolean() || value.is_string())
                    csv << file.filename().string() << ',' << k << ',' << key << ','
                        << value.dump() << '\n';
            }
        }
        // refinement trends recomputed from the records themselves
        if (file.filename() == "solve_reports.jsonl" && records.size() > 1) {
            summary << "  refinement trend (recomputed):\n";
            for (std::size_t k = 1; k < records.size(); ++k) {
                const double e0 = records[k - 1].value("max_error", 0.0);
                const double e1 = records[k].value("max_error", 0.0);
                const double s0 = records[k - 1].value("spacing", 1.0);
                const double s1 = records[k].value("spacing", 1.0);
                const double order = std::log2(e0 / e1) / std::log2(s0 / s1);
                char line[128];
                std::snprintf(line, sizeof(line),
                              "    spacing %.6g -> %.6g: error ratio %.4g, order %.3f\n", s0,
                              s1, e0 / std::max(e1, 1e-300), order);
                summary << line;
            }
        }
        if (file.filename() == "regularity.jsonl" && records.size() > 1) {
            summary << "  seminorm growth ratios:\n";
            for (std::size_t k = 1; k < records.size(); ++k) {
                const double r = records[k].value("seminorm_half", 0.0) /
                                 std::max(records[k - 1].value("seminorm_half", 0.0), 1e-300);
                char line[96];
                std::snprintf(line, sizeof(line), "    level %zu/%zu: %.4f\n", k, k - 1, r);
                summary << line;
            }
        }
    }
    if (record_files.empty()) {
        std::fprintf(stderr, "error: no record files in %s\n", run_dir.c_str());
        return kMissingInput;
    }
    std::printf("wrote %s and %s\n", (dir / "summary.txt").string().c_str(),
                (dir / "summary.csv").string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"laboratory for a widely degenerate elliptic operator"};
    app.require_subcommand(1);

    CommonArgs verify_args, solve_args, compare_args, diagnose_args, sobolev_args;
    std::string report_dir;

    auto* verify = app.add_subcommand("verify-lemmas", "run the inequality campaigns");
    add_common(verify, verify_args);
    auto* solve = app.add_subcommand("solve", "solve a problem across refinement levels");
    add_common(solve, solve_args);
    auto* compare = app.add_subcommand("compare", "ordered boundary data comparison runs");
    add_common(compare, compare_args);
    auto* diagnose = app.add_subcommand("diagnose", "regularity diagnostics on solutions");
    add_common(diagnose, diagnose_args);
    auto* sobolev = app.add_subcommand("sobolev-check", "weighted Sobolev ratio checks");
    add_common(sobolev, sobolev_args);
    auto* report = app.add_subcommand("report", "consolidate a run directory");
    report->add_option("run", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (verify->parsed()) return cmd_verify_lemmas(verify_args);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (diagnose->parsed()) return cmd_diagnose(diagnose_args);
        if (sobolev->parsed()) return cmd_sobolev(sobolev_args);
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const wdeg::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const wdeg::precondition_error& e) {
        std::fprintf(stderr, "precondition error: %s\n", e.what());
        return kUsage;
    } catch (const wdeg::invalid_input& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kUsage;
    } catch (const wdeg::parse_error& e) {
        std::fprintf(stderr, "expression error: %s\n", e.what());
        return kUsage;
    } catch (const wdeg::solve_budget_exhausted& e) {
        std::fprintf(stderr, "solver budget exhausted: %s (best energy %.12g, residual %.3e)\n",
                     e.what(), e.report.energy, e.report.grad_residual);
        return kBudgetExhausted;
    } catch (const wdeg::outer_divergence& e) {
        std::fprintf(stderr, "outer iteration diverged: %s\n", e.what());
        return kBudgetExhausted;
    } catch (const wdeg::numerical_failure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalFailure;
    }
    return kUsage;
}
