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

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dte/oc.hpp"

// Frequentist baselines: the log-rank test, its piecewise weighted variant
// restricted to post-separation event times, simulated power, and the
// simulation-search minimum sample size.

namespace dte {

/// One row of the pooled risk table: counts at a distinct event time.
/// Group 1 is the control arm.
struct RiskTableRow {
    double time;
    double d1, d2;  // events per group at this time (ties aggregated)
    double n1, n2;  // at risk just before this time
};

inline std::vector<RiskTableRow> risk_table(const ArmSnapshot& control,
                                            const ArmSnapshot& treatment) {
    std::vector<double> event_times;
    for (std::size_t i = 0; i < control.size(); ++i) {
        if (control.event[i]) event_times.push_back(control.time[i]);
    }
    for (std::size_t i = 0; i < treatment.size(); ++i) {
        if (treatment.event[i]) event_times.push_back(treatment.time[i]);
    }
    std::sort(event_times.begin(), event_times.end());
    event_times.erase(std::unique(event_times.begin(), event_times.end()),
                      event_times.end());

    std::vector<RiskTableRow> rows;
    rows.reserve(event_times.size());
    for (double t : event_times) {
        RiskTableRow row{t, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < control.size(); ++i) {
            if (control.time[i] >= t) row.n1 += 1.0;
            if (control.event[i] && control.time[i] == t) row.d1 += 1.0;
        }
        for (std::size_t i = 0; i < treatment.size(); ++i) {
            if (treatment.time[i] >= t) row.n2 += 1.0;
            if (treatment.event[i] && treatment.time[i] == t) row.d2 += 1.0;
        }
        rows.push_back(row);
    }
    return rows;
}

struct TestResult {
    double statistic;
    double p_two_sided;
    double p_one_sided;  // small when the treatment arm does better
};

inline TestResult logrank_from_rows(const std::vector<RiskTableRow>& rows) {
    double observed_minus_expected = 0.0;
    double variance = 0.0;
    double total_events = 0.0;
    for (const auto& r : rows) {
        double d = r.d1 + r.d2;
        double n = r.n1 + r.n2;
        total_events += d;
        double e1 = r.n1 * d / n;
        observed_minus_expected += r.d1 - e1;
        if (n > 1.0) {
            variance += r.n1 * r.n2 * d * (n - d) / (n * n * (n - 1.0));
        }
    }
    if (total_events == 0.0) {
        throw std::domain_error("logrank: no events");
    }
    if (!(variance > 0.0)) {
        throw std::domain_error("logrank: zero variance");
    }
    TestResult res;
    res.statistic = observed_minus_expected / std::sqrt(variance);
    res.p_two_sided = 2.0 * (1.0 - normal_cdf(std::abs(res.statistic)));
    // excess control-arm events (positive statistic) favor the treatment
    res.p_one_sided = 1.0 - normal_cdf(res.statistic);
    return res;
}

inline TestResult logrank(const ArmSnapshot& control,
                          const ArmSnapshot& treatment) {
    return logrank_from_rows(risk_table(control, treatment));
}

/// Log-rank restricted to event times strictly after the separation time s.
inline TestResult pw_logrank(const ArmSnapshot& control,
                             const ArmSnapshot& treatment, double s) {
    auto rows = risk_table(control, treatment);
    std::vector<RiskTableRow> post;
    for (const auto& r : rows) {
        if (r.time > s) post.push_back(r);
    }
    if (post.empty()) {
        throw std::domain_error("pw_logrank: no post-separation events");
    }
    return logrank_from_rows(post);
}

enum class FreqTest { logrank, pw_logrank, bayes_single };

/// Generator for the comparison studies: exponential control, delayed-effect
/// treatment with a fixed post-separation median and true change point.
struct ComparisonTruth {
    double control_median;
    double post_treatment_median;
    double s_true;
};

struct ComparisonSetup {
    double rate = 6.0;  // deterministic accrual per arm per month
    double fup = 6.0;
    double alpha = 0.10;
    bool two_sided = true;
    // posterior single-look decision (bayes_single only)
    double lambda = 0.95;
    std::optional<PriorSpec> prior;
};

/// Per-patient latent event times keyed by (seed, trial, arm, index) so the
/// first n patients of a trial are identical for every sample size; power is
/// then monotone in n up to estimation noise, which keeps the sample-size
/// search well behaved.
inline TrialData comparison_trial(const ComparisonTruth& truth,
                                  const ComparisonSetup& setup, int n_per_arm,
                                  std::uint64_t seed, std::uint64_t trial) {
    PiecewiseExpModel treat = piecewise_model_from_medians(
        truth.control_median, truth.post_treatment_median, truth.s_true);
    TrialData d;
    d.enroll0.resize(n_per_arm);
    d.enroll1.resize(n_per_arm);
    d.event0.resize(n_per_arm);
    d.event1.resize(n_per_arm);
    for (int k = 0; k < n_per_arm; ++k) {
        d.enroll0[k] = (k + 1) / setup.rate;
        d.enroll1[k] = (k + 1) / setup.rate;
        RngStream r0 = RngStream::from_key(
            seed, {purpose::freq, trial, 0, static_cast<std::uint64_t>(k)});
        RngStream r1 = RngStream::from_key(
            seed, {purpose::freq, trial, 1, static_cast<std::uint64_t>(k)});
        d.event0[k] =
            -(truth.control_median / ln2) * std::log(r0.uniform());
        d.event1[k] = treat.quantile(1.0 - r1.uniform());
    }
    return d;
}

inline bool comparison_rejects(const ComparisonTruth& truth,
                               const ComparisonSetup& setup, FreqTest test,
                               int n_per_arm, std::uint64_t seed,
                               std::uint64_t trial) {
    TrialData data = comparison_trial(truth, setup, n_per_arm, seed, trial);
    double t_final = n_per_arm / setup.rate + setup.fup;
    auto [ctrl, treat] = snapshot_at(data, t_final);
    switch (test) {
        case FreqTest::logrank: {
            TestResult r = logrank(ctrl, treat);
            return (setup.two_sided ? r.p_two_sided : r.p_one_sided) <=
                   setup.alpha;
        }
        case FreqTest::pw_logrank: {
            TestResult r;
            try {
                r = pw_logrank(ctrl, treat, truth.s_true);
            } catch (const std::domain_error&) {
                return false;  // no usable post-separation information
            }
            return (setup.two_sided ? r.p_two_sided : r.p_one_sided) <=
                   setup.alpha;
        }
        case FreqTest::bayes_single: {
            if (!setup.prior) {
                throw std::invalid_argument(
                    "comparison_rejects: bayes_single needs a prior");
            }
            double prob = prob_treatment_worse(
                sufficient_stats(ctrl, treat, truth.s_true), *setup.prior);
            return prob <= 1.0 - setup.lambda;
        }
    }
    throw std::logic_error("comparison_rejects: unknown test");
}

inline double power_by_sim(FreqTest test, int n_per_arm,
                           const ComparisonTruth& truth,
                           const ComparisonSetup& setup, int nsim,
                           std::uint64_t seed, int workers = 0) {
    if (nsim < 1) throw std::invalid_argument("power_by_sim: nsim < 1");
    std::vector<std::uint8_t> rejects(nsim);
    parallel_for(nsim, workers, [&](std::size_t i) {
        rejects[i] =
            comparison_rejects(truth, setup, test, n_per_arm, seed, i) ? 1
                                                                       : 0;
    });
    double total = 0.0;
    for (auto r : rejects) total += r;
    return total / nsim;
}

/// Smallest per-arm n with simulated power at least target_power: bracket by
/// doubling, bisect on a coarse simulation budget, then verify (and if
/// needed nudge upward) on the full budget.
inline int min_sample_size(FreqTest test, const ComparisonTruth& truth,
                           const ComparisonSetup& setup, double target_power,
                           std::uint64_t seed, int nsim_bracket = 4000,
                           int nsim_verify = 10000, int n_cap = 5000,
                           int workers = 0) {
    if (!(target_power > 0.0 && target_power < 1.0)) {
        throw std::invalid_argument("min_sample_size: target in (0,1)");
    }
    auto power_at = [&](int n, int nsim) {
        return power_by_sim(test, n, truth, setup, nsim, seed, workers);
    };

    int lo = 10, hi = 10;
    while (power_at(hi, nsim_bracket) < target_power) {
        lo = hi;
        hi *= 2;
        if (hi > n_cap) {
            throw std::runtime_error(
                "min_sample_size: target power unreachable below cap");
        }
    }
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (power_at(mid, nsim_bracket) >= target_power) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    int n = hi;
    while (n <= n_cap && power_at(n, nsim_verify) < target_power) ++n;
    return n;
}

}  // namespace dte
