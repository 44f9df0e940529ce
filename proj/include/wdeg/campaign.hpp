#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "wdeg/errors.hpp"
#include "wdeg/inequalities.hpp"
#include "wdeg/rng.hpp"
#include "wdeg/vec.hpp"

namespace wdeg {

/// A shell of magnitudes |xi| in [1-delta, 1+delta] that a fraction of the
/// samples is forced into. Violations of the degenerate estimates, if any,
/// would hide next to |xi| = 1, so the ball boundary is sampled on purpose.
struct ShellSpec {
    double delta;
    double fraction;
};

struct SampleCampaign {
    std::uint64_t seed = 42;
    std::uint64_t count = 100000;  // samples per (p, n) pair
    std::vector<double> p_values = {2.0, 3.0, 5.0};
    std::pair<double, double> magnitude_range = {1e-3, 1e3};
    std::vector<ShellSpec> shells = {{1e-2, 0.1}, {1e-4, 0.1}, {1e-8, 0.1}};
    std::vector<std::size_t> dimensions = {2, 3};
    double c_star_scale = 1.0;  // falsifiability hook; 1 = the candidate constant

    void validate() const {
        if (count < 1) throw invalid_input("campaign: count must be >= 1");
        if (p_values.empty()) throw invalid_input("campaign: p_values must be nonempty");
        for (double p : p_values)
            if (!(p >= 2.0)) throw invalid_input("campaign: p values must be >= 2");
        if (!(magnitude_range.first > 0.0 && magnitude_range.first <= magnitude_range.second))
            throw invalid_input("campaign: magnitude bounds must be positive and ordered");
        double total = 0.0;
        for (const auto& s : shells) {
            if (!(s.delta > 0.0 && s.delta < 1.0))
                throw invalid_input("campaign: shell delta must lie in (0, 1)");
            if (!(s.fraction >= 0.0)) throw invalid_input("campaign: negative shell fraction");
            total += s.fraction;
        }
        if (total > 1.0 + 1e-12) throw invalid_input("campaign: shell fractions must sum to <= 1");
        if (dimensions.empty()) throw invalid_input("campaign: dimensions must be nonempty");
        for (std::size_t n : dimensions)
            if (n < 2 || n > kMaxDim)
                throw invalid_input("campaign: dimensions must lie in [2, 8]");
        if (!(c_star_scale > 0.0)) throw invalid_input("campaign: c_star_scale must be > 0");
    }
};

struct ShellStat {
    double delta = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;
    double worst_rel_margin = std::numeric_limits<double>::infinity();
};

struct PerExponentStat {
    double p = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;
    double worst_rel_margin = std::numeric_limits<double>::infinity();
    /// Observed infimum of the check's sharpness ratio, +inf when the
    /// check has no associated ratio or no admissible sample was seen.
    double empirical_constant = std::numeric_limits<double>::infinity();
};

/// The arguments that produced the smallest relative margin.
struct WorstSample {
    double rel_margin = std::numeric_limits<double>::infinity();
    double margin = std::numeric_limits<double>::infinity();
    std::vector<double> xi, eta;
    double p = 0.0;
    std::size_t dimension = 0;
    // truncation-positivity arguments (unused by the vector checks)
    double s = 0.0, beta = 0.0, eps = 0.0, sigma = 0.0;
};

struct InequalityReport {
    std::string check_id;
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;
    double worst_rel_margin = std::numeric_limits<double>::infinity();
    std::vector<PerExponentStat> per_p;
    std::vector<ShellStat> shells;
    WorstSample worst;

    bool passed() const { return violations == 0; }
};

namespace campaign_detail {

inline constexpr std::size_t kNumChecks = 6;

inline const char* check_name(std::size_t k) {
    static const char* names[kNumChecks] = {
        "algebraic-quotient", "h-monotonicity",   "h-lipschitz",
        "anchored-monotonicity", "pair-ellipticity", "truncation-positivity"};
    return names[k];
}

/// One block's contribution to one check's report; merged in block order.
struct Partial {
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;
    double worst_rel_margin = std::numeric_limits<double>::infinity();
    double empirical = std::numeric_limits<double>::infinity();
    std::vector<ShellStat> shells;
    WorstSample worst;
};

struct Task {
    std::size_t p_index;
    std::size_t n_index;
    std::uint64_t block;         // global block index, also the RNG stream id
    std::uint64_t sample_count;  // samples in this block
};

struct Drawn {
    VecN v;
    int shell = -1;  // index into campaign.shells, -1 when unforced
};

inline Drawn draw_vector(Rng& rng, const SampleCampaign& c, std::size_t n) {
    Drawn d{VecN::zero(n), -1};
    double u = rng.uniform01();
    double magnitude = -1.0;
    for (std::size_t k = 0; k < c.shells.size(); ++k) {
        if (u < c.shells[k].fraction) {
            magnitude = 1.0 + c.shells[k].delta * rng.uniform(-1.0, 1.0);
            d.shell = static_cast<int>(k);
            break;
        }
        u -= c.shells[k].fraction;
    }
    if (magnitude < 0.0)
        magnitude = rng.log_uniform(c.magnitude_range.first, c.magnitude_range.second);
    d.v = rng.unit_vector(n);
    d.v *= magnitude;
    return d;
}

struct Sampled {
    Drawn xi, eta;
    double p;
    // truncation-positivity draw
    double s, beta, eps, sigma;
};

inline void record(Partial& part, const Sampled& smp, const CheckDetail& detail,
                   double empirical_ratio, bool vector_args) {
    part.samples += 1;
    const double rel = detail.margin / detail.slack_scale();
    const bool violated = rel < -1e-12;
    if (violated) part.violations += 1;
    if (smp.xi.shell >= 0) {
        auto& sh = part.shells[static_cast<std::size_t>(smp.xi.shell)];
        sh.samples += 1;
        if (violated) sh.violations += 1;
        sh.worst_rel_margin = std::min(sh.worst_rel_margin, rel);
    }
    part.empirical = std::min(part.empirical, empirical_ratio);
    if (rel < part.worst_rel_margin) {
        part.worst_rel_margin = rel;
        part.worst.rel_margin = rel;
        part.worst.margin = detail.margin;
        if (vector_args) {
            part.worst.xi.assign(smp.xi.v.begin(), smp.xi.v.end());
            part.worst.eta.assign(smp.eta.v.begin(), smp.eta.v.end());
            part.worst.dimension = smp.xi.v.size();
        } else {
            part.worst.xi.clear();
            part.worst.eta.clear();
            part.worst.dimension = 0;
            part.worst.s = smp.s;
            part.worst.beta = smp.beta;
            part.worst.eps = smp.eps;
            part.worst.sigma = smp.sigma;
        }
        part.worst.p = smp.p;
    }
}

inline void run_block(const SampleCampaign& c, const Task& task,
                      std::array<Partial, kNumChecks>& out) {
    const double p = c.p_values[task.p_index];
    const std::size_t n = c.dimensions[task.n_index];
    for (auto& part : out) {
        part.shells.resize(c.shells.size());
        for (std::size_t k = 0; k < c.shells.size(); ++k) part.shells[k].delta = c.shells[k].delta;
    }
    Rng rng = Rng::stream(c.seed, task.block);
    const double inf = std::numeric_limits<double>::infinity();

    for (std::uint64_t i = 0; i < task.sample_count; ++i) {
        Sampled smp;
        smp.p = p;
        smp.xi = draw_vector(rng, c, n);
        smp.eta = draw_vector(rng, c, n);

        // scalar draw for the truncation profile
        smp.eps = rng.log_uniform(1e-6, 1.0);
        if (rng.bernoulli(0.25)) {
            smp.beta = 1.0;
            smp.sigma = 0.0;
        } else {
            smp.beta = rng.uniform01();
            smp.sigma = rng.uniform01() * 0.5 * (1.0 - smp.beta) * (1.0 - 0x1.0p-12);
        }
        const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        if (rng.bernoulli(0.3)) {
            smp.s = sign * (1.0 + smp.eps * rng.uniform(0.0, 3.0));  // around the ramp
        } else {
            smp.s = sign * rng.log_uniform(c.magnitude_range.first, c.magnitude_range.second);
        }

        const double a = smp.xi.v.norm(), b = smp.eta.v.norm();
        record(out[0], smp, check_algebraic_detail(a, b, p), inf, true);
        record(out[1], smp, check_h_monotonicity_detail(smp.xi.v, smp.eta.v, p),
               h_monotonicity_ratio(smp.xi.v, smp.eta.v, p), true);
        record(out[2], smp, check_h_lipschitz_detail(smp.xi.v, smp.eta.v, p), inf, true);
        if (b > 1.0)
            record(out[3], smp, check_mon_eta_detail(smp.xi.v, smp.eta.v, p), inf, true);
        record(out[4], smp,
               check_pair_ellipticity_detail(smp.xi.v, smp.eta.v, p, c.c_star_scale),
               pair_ellipticity_ratio(smp.xi.v, smp.eta.v, p), true);
        record(out[5], smp, check_teps_nonneg_detail(smp.s, smp.beta, smp.eps, smp.sigma), inf,
               false);
    }
}

}  // namespace campaign_detail

/// Runs all inequality checks over the sampled campaign and returns one
/// report per check. Deterministic for a fixed seed: samples are drawn in
/// fixed-size blocks with per-block generator streams and merged in block
/// order, so the result does not depend on the number of threads.
inline std::vector<InequalityReport> run_campaign(const SampleCampaign& campaign,
                                                  unsigned threads = 1) {
    using namespace campaign_detail;
    campaign.validate();
    if (threads == 0) threads = 1;

    constexpr std::uint64_t kBlockSize = 16384;
    std::vector<Task> tasks;
    std::uint64_t global_block = 0;
    for (std::size_t pi = 0; pi < campaign.p_values.size(); ++pi) {
        for (std::size_t ni = 0; ni < campaign.dimensions.size(); ++ni) {
            std::uint64_t remaining = campaign.count;
            while (remaining > 0) {
                const std::uint64_t take = std::min(remaining, kBlockSize);
                tasks.push_back({pi, ni, global_block++, take});
                remaining -= take;
            }
        }
    }

    std::vector<std::array<Partial, kNumChecks>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            run_block(campaign, tasks[t], results[t]);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // merge in task order
    std::vector<InequalityReport> reports(kNumChecks);
    for (std::size_t k = 0; k < kNumChecks; ++k) {
        auto& rep = reports[k];
        rep.check_id = check_name(k);
        rep.per_p.resize(campaign.p_values.size());
        for (std::size_t pi = 0; pi < campaign.p_values.size(); ++pi)
            rep.per_p[pi].p = campaign.p_values[pi];
        rep.shells.resize(campaign.shells.size());
        for (std::size_t si = 0; si < campaign.shells.size(); ++si)
            rep.shells[si].delta = campaign.shells[si].delta;
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (std::size_t k = 0; k < kNumChecks; ++k) {
            const Partial& part = results[t][k];
            InequalityReport& rep = reports[k];
            rep.samples += part.samples;
            rep.violations += part.violations;
            auto& pp = rep.per_p[tasks[t].p_index];
            pp.samples += part.samples;
            pp.violations += part.violations;
            pp.worst_rel_margin = std::min(pp.worst_rel_margin, part.worst_rel_margin);
            pp.empirical_constant = std::min(pp.empirical_constant, part.empirical);
            for (std::size_t si = 0; si < rep.shells.size(); ++si) {
                rep.shells[si].samples += part.shells[si].samples;
                rep.shells[si].violations += part.shells[si].violations;
                rep.shells[si].worst_rel_margin =
                    std::min(rep.shells[si].worst_rel_margin, part.shells[si].worst_rel_margin);
            }
            if (part.worst_rel_margin < rep.worst_rel_margin) {
                rep.worst_rel_margin = part.worst_rel_margin;
                rep.worst = part.worst;
            }
        }
    }
    return reports;
}

}  // namespace wdeg
