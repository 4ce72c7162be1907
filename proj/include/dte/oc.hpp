/*
 * Copyright 2026 The dtedesign Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dte/parallel.hpp"
#include "dte/trial.hpp"

// Monte Carlo operating characteristics. Each simulated trial owns an RNG
// stream keyed by (master seed, purpose, trial index); outcomes land in
// per-trial slots and are reduced in index order, so results are identical
// for any worker count.

namespace dte {

enum class Hypothesis { h0, h1 };

namespace purpose {
inline constexpr std::uint64_t oc = 0x0C;
inline constexpr std::uint64_t events = 0xE7;
inline constexpr std::uint64_t calib_h0 = 0xCA0;
inline constexpr std::uint64_t calib_h1 = 0xCA1;
inline constexpr std::uint64_t endpoint = 0xED;
inline constexpr std::uint64_t freq = 0xF0;
inline constexpr std::uint64_t trend = 0x7E;
}  // namespace purpose

/// Operating characteristics with Monte Carlo standard errors. prn is the
/// probability of rejecting the null (type I error under H0, power under
/// H1); pet the probability of stopping early; sizes are per arm.
struct OCResult {
    double prn = 0.0;
    double pet = 0.0;
    double avg_n = 0.0;
    double avg_duration = 0.0;
    double se_prn = 0.0;
    double se_pet = 0.0;
    double se_n = 0.0;
    double se_duration = 0.0;
    int nsim = 0;
};

/// Where the per-trial separation time comes from: a fixed true value
/// (operating-characteristic evaluation) or a draw from the design's
/// truncated-Gamma prior (calibration averages).
enum class SMode { fixed, prior };

struct OcSettings {
    Hypothesis hyp = Hypothesis::h0;
    SMode smode = SMode::fixed;
    double s_fixed = 0.0;
    std::uint64_t tag = purpose::oc;
};

/// Separation time for trial stream `rng`. Every trial consumes exactly one
/// reserved uniform for this, whether or not it is used, so fixed-S and
/// degenerate-prior runs see identical downstream draws.
inline double draw_separation(const OcSettings& s, const TruncGammaPrior& g,
                              RngStream& rng) {
    double u = rng.uniform();
    if (s.smode == SMode::prior) return g.quantile(u);
    return s.s_fixed;
}

/// Simulate one trial for the given design and scenario. The trial is
/// generated with the scenario's separation time as the change point and the
/// analyses condition on that same value; under the alternative the
/// post-separation treatment median is the one implied by the overall
/// medians at s_likely.
inline TrialOutcome simulate_one_trial(const DesignSpec& d,
                                       const Boundary& boundary,
                                       const OcSettings& s,
                                       std::uint64_t master_seed,
                                       std::uint64_t trial_index) {
    RngStream rng = RngStream::from_key(
        master_seed, {s.tag, static_cast<std::uint64_t>(s.hyp), trial_index});
    double sep = draw_separation(s, d.prior.s_prior, rng);
    double post1 = s.hyp == Hypothesis::h1 ? d.post_treatment_median()
                                           : d.control_median;
    PiecewiseTruth truth{d.control_median, post1, sep};
    TrialData data =
        generate_trial_data(truth, d.n_max(), d.accrual, rng);
    return run_trial(data, d.schedule, boundary, d.fup, d.prior, sep);
}

inline OCResult reduce_outcomes(const std::vector<TrialOutcome>& outcomes,
                                int n_looks) {
    OCResult r;
    r.nsim = static_cast<int>(outcomes.size());
    if (r.nsim == 0) return r;
    double sum_n = 0.0, sum_n2 = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    int rejects = 0, early = 0;
    for (const auto& o : outcomes) {
        rejects += o.reject ? 1 : 0;
        early += o.stopped_stage < n_looks ? 1 : 0;
        sum_n += o.n_used_per_arm;
        sum_n2 += o.n_used_per_arm * o.n_used_per_arm;
        sum_d += o.duration;
        sum_d2 += o.duration * o.duration;
    }
    double n = r.nsim;
    r.prn = rejects / n;
    r.pet = early / n;
    r.avg_n = sum_n / n;
    r.avg_duration = sum_d / n;
    r.se_prn = std::sqrt(std::max(0.0, r.prn * (1.0 - r.prn) / n));
    r.se_pet = std::sqrt(std::max(0.0, r.pet * (1.0 - r.pet) / n));
    double var_n = std::max(0.0, sum_n2 / n - r.avg_n * r.avg_n);
    double var_d = std::max(0.0, sum_d2 / n - r.avg_duration * r.avg_duration);
    r.se_n = std::sqrt(var_n / n);
    r.se_duration = std::sqrt(var_d / n);
    return r;
}

inline OCResult run_oc(const DesignSpec& d, const Boundary& boundary,
                       const OcSettings& s, int nsim,
                       std::uint64_t master_seed, int workers = 0) {
    d.validate();
    if (nsim < 1) throw std::invalid_argument("run_oc: nsim < 1");
    std::vector<TrialOutcome> outcomes(nsim);
    parallel_for(nsim, workers, [&](std::size_t i) {
        outcomes[i] = simulate_one_trial(d, boundary, s, master_seed, i);
    });
    return reduce_outcomes(outcomes, static_cast<int>(d.schedule.size()));
}

struct ScenarioTruth {
    Hypothesis hyp;
    double s_true;
};

/// Operating characteristics at a fixed true separation time.
inline OCResult estimate_oc(const DesignSpec& d, const ScenarioTruth& truth,
                            int nsim, std::uint64_t master_seed,
                            int workers = 0) {
    OcSettings s;
    s.hyp = truth.hyp;
    s.smode = SMode::fixed;
    s.s_fixed = truth.s_true;
    return run_oc(d, d.boundary, s, nsim, master_seed, workers);
}

/// Prior-averaged operating characteristics (separation time drawn from the
/// design prior per trial).
inline OCResult marginal_oc(const DesignSpec& d, const Boundary& boundary,
                            Hypothesis hyp, int nsim,
                            std::uint64_t master_seed, int workers = 0) {
    OcSettings s;
    s.hyp = hyp;
    s.smode = SMode::prior;
    return run_oc(d, boundary, s, nsim, master_seed, workers);
}

/// Mean total event counts at each scheduled analysis snapshot, for trials
/// generated from an explicitly specified piecewise truth (trials are never
/// stopped; every look is observed).
inline std::vector<double> expected_events(const DesignSpec& d,
                                           const PiecewiseTruth& truth,
                                           int nsim, std::uint64_t master_seed,
                                           int workers = 0) {
    d.validate();
    if (nsim < 1) throw std::invalid_argument("expected_events: nsim < 1");
    const std::size_t n_looks = d.schedule.size();
    std::vector<std::vector<double>> counts(nsim,
                                            std::vector<double>(n_looks));
    parallel_for(nsim, workers, [&](std::size_t i) {
        RngStream rng = RngStream::from_key(master_seed, {purpose::events, i});
        (void)rng.uniform();  // reserved draw, see draw_separation
        TrialData data =
            generate_trial_data(truth, d.n_max(), d.accrual, rng);
        auto times = analysis_times(data, d.schedule, d.fup);
        for (std::size_t r = 0; r < n_looks; ++r) {
            auto [ctrl, treat] = snapshot_at(data, times[r]);
            double ev = 0.0;
            for (auto e : ctrl.event) ev += e;
            for (auto e : treat.event) ev += e;
            counts[i][r] = ev;
        }
    });
    std::vector<double> mean(n_looks, 0.0);
    for (int i = 0; i < nsim; ++i) {
        for (std::size_t r = 0; r < n_looks; ++r) mean[r] += counts[i][r];
    }
    for (auto& m : mean) m /= nsim;
    return mean;
}

}  // namespace dte
