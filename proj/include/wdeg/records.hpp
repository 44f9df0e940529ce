#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wdeg/campaign.hpp"
#include "wdeg/config.hpp"
#include "wdeg/diagnostics.hpp"
#include "wdeg/errors.hpp"
#include "wdeg/solver.hpp"

namespace wdeg {

inline constexpr int kFormatVersion = 1;

/// Line-delimited JSON record files. The first line is a header record
/// carrying the format version and the record kind; every following line is
/// one record. Numeric fields serialize via shortest round-trip, so files
/// are byte-identical across runs with identical inputs. No timestamps:
/// those are confined to the run manifest.
class RecordWriter {
public:
    RecordWriter(const std::filesystem::path& path, const std::string& kind) : out_(path) {
        if (!out_) throw config_error("cannot open record file: " + path.string());
        nlohmann::json header;
        header["format_version"] = kFormatVersion;
        header["kind"] = kind;
        out_ << header.dump() << '\n';
    }

    void write(const nlohmann::json& record) { out_ << record.dump() << '\n'; }

    ~RecordWriter() { out_.flush(); }

private:
    std::ofstream out_;
};

inline std::vector<nlohmann::json> read_records(const std::filesystem::path& path,
                                                const std::string& expected_kind = "") {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open record file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw config_error("empty record file: " + path.string());
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("format_version", -1) != kFormatVersion)
        throw config_error("unsupported format version in " + path.string());
    if (!expected_kind.empty() && header.value("kind", "") != expected_kind)
        throw config_error("unexpected record kind in " + path.string());
    std::vector<nlohmann::json> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(nlohmann::json::parse(line));
    }
    return records;
}

inline nlohmann::json to_json(const ShellStat& s) {
    return {{"delta", s.delta},
            {"samples", s.samples},
            {"violations", s.violations},
            {"worst_rel_margin", s.worst_rel_margin}};
}

inline nlohmann::json to_json(const PerExponentStat& s) {
    return {{"p", s.p},
            {"samples", s.samples},
            {"violations", s.violations},
            {"worst_rel_margin", s.worst_rel_margin},
            {"empirical_constant", s.empirical_constant}};
}

inline nlohmann::json to_json(const WorstSample& w) {
    nlohmann::json j{{"rel_margin", w.rel_margin}, {"margin", w.margin}, {"p", w.p}};
    if (!w.xi.empty()) {
        j["xi"] = w.xi;
        j["eta"] = w.eta;
        j["dimension"] = w.dimension;
    } else {
        j["s"] = w.s;
        j["beta"] = w.beta;
        j["eps"] = w.eps;
        j["sigma"] = w.sigma;
    }
    return j;
}

inline nlohmann::json to_json(const InequalityReport& r) {
    nlohmann::json per_p = nlohmann::json::array();
    for (const auto& s : r.per_p) per_p.push_back(to_json(s));
    nlohmann::json shells = nlohmann::json::array();
    for (const auto& s : r.shells) shells.push_back(to_json(s));
    return {{"check", r.check_id},
            {"samples", r.samples},
            {"violations", r.violations},
            {"worst_rel_margin", r.worst_rel_margin},
            {"per_p", per_p},
            {"shells", shells},
            {"worst_sample", to_json(r.worst)}};
}

inline nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json continuation = nlohmann::json::array();
    for (const auto& c : r.continuation)
        continuation.push_back(
            {{"eps", c.eps}, {"iterations", c.iterations}, {"energy", c.energy}});
    return {{"energy", r.energy},
            {"inner_iterations", r.inner_iterations},
            {"outer_iterations", r.outer_iterations},
            {"grad_residual", r.grad_residual},
            {"weak_residual", r.weak_residual},
            {"converged", r.converged},
            {"outer_contracted", r.outer_contracted},
            {"continuation", continuation},
            {"outer_diffs", r.outer_diffs},
            {"lipschitz_constant", r.lipschitz_constant}};
}

inline nlohmann::json to_json(const RegularityReport& r) {
    nlohmann::json degeneracy = nlohmann::json::array();
    for (const auto& [theta, area] : r.degeneracy)
        degeneracy.push_back({{"threshold", theta}, {"area", area}});
    nlohmann::json inverse = nlohmann::json::array();
    for (const auto& iw : r.inverse_weight)
        inverse.push_back({{"eps_floor", iw.eps_floor},
                           {"value", iw.divergent ? -1.0 : iw.value},
                           {"divergent", iw.divergent},
                           {"argmax_x", iw.argmax[0]},
                           {"argmax_y", iw.argmax[1]}});
    return {{"h", r.h},
            {"p", r.p},
            {"beta", r.beta},
            {"t", r.t_exponent},
            {"degeneracy", degeneracy},
            {"i1", r.i1},
            {"i2", r.i2},
            {"inverse_weight", inverse},
            {"seminorm_half", r.seminorm_half},
            {"seminorm_flux", r.seminorm_flux}};
}

inline nlohmann::json to_json(const SobolevReport& r) {
    return {{"q_star", r.q_star},      {"K", r.big_k},
            {"c_n", r.c_n},            {"budget", r.budget},
            {"max_ratio", r.max_ratio}, {"ratios", r.ratios},
            {"within_budget", r.within_budget}};
}

/// The run manifest echoes both the configuration file as written and the
/// fully resolved settings (defaults filled in). It is the one file allowed
/// to carry a timestamp.
inline void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                           const Config& config, std::uint64_t seed,
                           const std::vector<std::string>& outputs,
                           const std::string& timestamp,
                           const nlohmann::json& resolved = nlohmann::json::object()) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["outputs"] = outputs;
    j["timestamp"] = timestamp;
    nlohmann::json cfg;
    for (const auto& [section, keys] : config.sections()) {
        nlohmann::json sec;
        for (const auto& [key, value] : keys) sec[key] = value;
        cfg[section.empty() ? "(top)" : section] = sec;
    }
    j["config"] = cfg;
    j["resolved"] = resolved;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw config_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
}

inline nlohmann::json to_json(const SampleCampaign& c) {
    nlohmann::json shells = nlohmann::json::array();
    for (const auto& s : c.shells)
        shells.push_back({{"delta", s.delta}, {"fraction", s.fraction}});
    return {{"seed", c.seed},
            {"count", c.count},
            {"p_values", c.p_values},
            {"magnitude_range", {c.magnitude_range.first, c.magnitude_range.second}},
            {"shells", shells},
            {"dimensions", c.dimensions},
            {"c_star_scale", c.c_star_scale}};
}

inline nlohmann::json to_json(const SolveConfig& c) {
    return {{"tolerance", c.tolerance},
            {"max_inner", c.max_inner},
            {"max_outer", c.max_outer},
            {"eps_schedule", c.eps_schedule},
            {"damping", c.damping},
            {"outer_tolerance", c.outer_tolerance}};
}

}  // namespace wdeg
