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
#include <vector>

#include "dte/oc.hpp"

// Boundary calibration: grid search over (lambda, gamma) controlling the
// prior-averaged type I error and maximizing prior-averaged power, optionally
// with additional type-I control at the endpoints of the separation-time
// interval. All candidates are scored on the same simulated datasets (common
// random numbers), so grid comparisons are free of between-candidate noise.

namespace dte {

/// Simulated trials stored at patient level so any boundary (and, for the
/// sample-size search, any interim size) can be evaluated on the same data.
struct CalibTrial {
    double s;  // separation time used for generation and analysis
    TrialData data;
};

struct CalibData {
    std::vector<CalibTrial> trials;
};

inline CalibData make_calib_data(const DesignSpec& d, const OcSettings& s,
                                 int nsim, std::uint64_t master_seed,
                                 int workers = 0) {
    d.validate();
    CalibData cd;
    cd.trials.resize(nsim);
    parallel_for(nsim, workers, [&](std::size_t i) {
        RngStream rng = RngStream::from_key(
            master_seed,
            {s.tag, static_cast<std::uint64_t>(s.hyp), i});
        double sep = draw_separation(s, d.prior.s_prior, rng);
        double post1 = s.hyp == Hypothesis::h1 ? d.post_treatment_median()
                                               : d.control_median;
        PiecewiseTruth truth{d.control_median, post1, sep};
        cd.trials[i].s = sep;
        cd.trials[i].data =
            generate_trial_data(truth, d.n_max(), d.accrual, rng);
    });
    return cd;
}

/// Posterior futility probabilities of every trial at every scheduled look,
/// analyses conditioned on each trial's own separation time.
inline std::vector<std::vector<double>> look_probabilities(
    const CalibData& cd, const std::vector<int>& schedule, double fup,
    const PriorSpec& prior, int workers = 0) {
    std::vector<std::vector<double>> probs(cd.trials.size());
    parallel_for(cd.trials.size(), workers, [&](std::size_t i) {
        const auto& trial = cd.trials[i];
        auto times = analysis_times(trial.data, schedule, fup);
        std::vector<double> row(schedule.size());
        for (std::size_t r = 0; r < schedule.size(); ++r) {
            auto [ctrl, treat] = snapshot_at(trial.data, times[r]);
            row[r] = prob_treatment_worse(
                sufficient_stats(ctrl, treat, trial.s), prior);
        }
        probs[i] = std::move(row);
    });
    return probs;
}

/// Fraction of trials rejecting the null under a candidate boundary: a trial
/// rejects iff no look's probability exceeds its threshold.
inline double rejection_rate(const std::vector<std::vector<double>>& probs,
                             const std::vector<int>& schedule,
                             const Boundary& b) {
    const double n_max = schedule.back();
    std::vector<double> thresholds(schedule.size());
    for (std::size_t r = 0; r < schedule.size(); ++r) {
        thresholds[r] = b.threshold(schedule[r], n_max);
    }
    std::size_t rejects = 0;
    for (const auto& row : probs) {
        bool stopped = false;
        for (std::size_t r = 0; r < row.size() && !stopped; ++r) {
            stopped = row[r] > thresholds[r];
        }
        if (!stopped) ++rejects;
    }
    return static_cast<double>(rejects) / probs.size();
}

/// Fraction of trials stopping before the final look.
inline double early_stop_rate(const std::vector<std::vector<double>>& probs,
                              const std::vector<int>& schedule,
                              const Boundary& b) {
    const double n_max = schedule.back();
    std::size_t early = 0;
    for (const auto& row : probs) {
        for (std::size_t r = 0; r + 1 < row.size(); ++r) {
            if (row[r] > b.threshold(schedule[r], n_max)) {
                ++early;
                break;
            }
        }
    }
    return static_cast<double>(early) / probs.size();
}

struct AverageMetrics {
    double avg_type1;
    double avg_power;
    double se_type1;
    double se_power;
    double ps_h0;  // early-stop probability under the null
    double ps_h1;  // early-stop probability under the alternative
};

/// Prior-averaged type I error and power of a boundary for the design's
/// schedule (Monte Carlo over separation times drawn from the prior).
inline AverageMetrics average_metrics(const DesignSpec& d, const Boundary& b,
                                      int nsim, std::uint64_t master_seed,
                                      int workers = 0) {
    OCResult h0 = marginal_oc(d, b, Hypothesis::h0, nsim, master_seed,
                              workers);
    OCResult h1 = marginal_oc(d, b, Hypothesis::h1, nsim, master_seed,
                              workers);
    return {h0.prn, h1.prn, h0.se_prn, h1.se_prn, h0.pet, h1.pet};
}

struct GridCandidate {
    Boundary boundary;
    double avg_type1 = 0.0;
    double avg_power = 0.0;
    double type1_at_lower = 0.0;  // boundary-control mode only
    double type1_at_upper = 0.0;
    bool feasible = false;
};

enum class CalibrationMode { average_only, boundary_control };

struct CalibrationReport {
    bool feasible = false;
    Boundary chosen;
    double avg_type1 = 0.0;
    double avg_power = 0.0;
    double se_type1 = 0.0;
    double se_power = 0.0;
    std::optional<std::pair<double, double>> endpoint_type1;
    std::vector<GridCandidate> grid;
};

/// Default candidate grid. The gamma axis is capped at 1: average power is
/// monotone increasing in gamma (a looser interim can only avoid false
/// futility stops), so an uncapped axis degenerates toward designs that
/// never stop early and the early-stopping profile is lost. The lambda axis
/// is coarse because power is monotone decreasing in lambda, so a fine axis
/// just tracks the alpha constraint to within simulation noise and the
/// selection churns between statistically indistinguishable neighbors.
inline std::vector<Boundary> default_boundary_grid() {
    std::vector<Boundary> grid;
    const double lambdas[] = {0.80, 0.85, 0.90, 0.95, 0.99};
    const double gammas[] = {0.25, 0.5, 0.75, 1.0};
    for (double l : lambdas) {
        for (double g : gammas) grid.emplace_back(l, g);
    }
    return grid;
}

/// Grid search for the boundary: among candidates whose average type I error
/// is at most alpha (and, in boundary-control mode, whose type I error at
/// s = L and s = U is also at most alpha), pick the one with the highest
/// average power. Near-ties within one Monte Carlo s.e. of the best power
/// resolve to the smaller lambda, then the smaller gamma.
inline CalibrationReport calibrate(const DesignSpec& d, double alpha,
                                   const std::vector<Boundary>& grid,
                                   CalibrationMode mode, int nsim,
                                   std::uint64_t master_seed,
                                   int workers = 0) {
    if (grid.empty()) throw std::invalid_argument("calibrate: empty grid");
    d.validate();

    OcSettings h0{Hypothesis::h0, SMode::prior, 0.0, purpose::calib_h0};
    OcSettings h1{Hypothesis::h1, SMode::prior, 0.0, purpose::calib_h1};
    CalibData data_h0 = make_calib_data(d, h0, nsim, master_seed, workers);
    CalibData data_h1 = make_calib_data(d, h1, nsim, master_seed, workers);
    auto probs_h0 =
        look_probabilities(data_h0, d.schedule, d.fup, d.prior, workers);
    auto probs_h1 =
        look_probabilities(data_h1, d.schedule, d.fup, d.prior, workers);

    std::vector<std::vector<double>> probs_lo, probs_hi;
    if (mode == CalibrationMode::boundary_control) {
        OcSettings lo{Hypothesis::h0, SMode::fixed, d.prior.s_prior.lower,
                      purpose::endpoint};
        OcSettings hi{Hypothesis::h0, SMode::fixed, d.prior.s_prior.upper,
                      purpose::endpoint + 1};
        probs_lo = look_probabilities(
            make_calib_data(d, lo, nsim, master_seed, workers), d.schedule,
            d.fup, d.prior, workers);
        probs_hi = look_probabilities(
            make_calib_data(d, hi, nsim, master_seed, workers), d.schedule,
            d.fup, d.prior, workers);
    }

    CalibrationReport report;
    report.grid.reserve(grid.size());
    for (const Boundary& b : grid) {
        GridCandidate c;
        c.boundary = b;
        c.avg_type1 = rejection_rate(probs_h0, d.schedule, b);
        c.avg_power = rejection_rate(probs_h1, d.schedule, b);
        c.feasible = c.avg_type1 <= alpha;
        if (mode == CalibrationMode::boundary_control) {
            c.type1_at_lower = rejection_rate(probs_lo, d.schedule, b);
            c.type1_at_upper = rejection_rate(probs_hi, d.schedule, b);
            c.feasible = c.feasible && c.type1_at_lower <= alpha &&
                         c.type1_at_upper <= alpha;
        }
        report.grid.push_back(c);
    }

    double best_power = -1.0;
    for (const auto& c : report.grid) {
        if (c.feasible) best_power = std::max(best_power, c.avg_power);
    }
    if (best_power < 0.0) {
        report.feasible = false;
        // leave `chosen` defaulted; callers inspect `grid` for diagnostics
        return report;
    }

    double se = std::sqrt(
        std::max(0.0, best_power * (1.0 - best_power) / nsim));
    const GridCandidate* pick = nullptr;
    for (const auto& c : report.grid) {
        if (!c.feasible || c.avg_power + se < best_power) continue;
        if (pick == nullptr ||
            c.boundary.lambda < pick->boundary.lambda ||
            (c.boundary.lambda == pick->boundary.lambda &&
             c.boundary.gamma < pick->boundary.gamma)) {
            pick = &c;
        }
    }

    report.feasible = true;
    report.chosen = pick->boundary;
    report.avg_type1 = pick->avg_type1;
    report.avg_power = pick->avg_power;
    report.se_type1 = std::sqrt(std::max(
        0.0, report.avg_type1 * (1.0 - report.avg_type1) / nsim));
    report.se_power = std::sqrt(
        std::max(0.0, report.avg_power * (1.0 - report.avg_power) / nsim));
    if (mode == CalibrationMode::boundary_control) {
        report.endpoint_type1 = {pick->type1_at_lower, pick->type1_at_upper};
    }
    return report;
}

struct CurvePoint {
    double s;
    double type1;
    double power;
};

/// Fixed-S sweep of type I error and power for a given boundary.
inline std::vector<CurvePoint> error_power_curve(
    const DesignSpec& d, const Boundary& b, const std::vector<double>& s_grid,
    int nsim, std::uint64_t master_seed, int workers = 0) {
    DesignSpec dd = d;
    dd.boundary = b;
    std::vector<CurvePoint> out;
    out.reserve(s_grid.size());
    for (double s : s_grid) {
        OCResult t1 = estimate_oc(dd, {Hypothesis::h0, s}, nsim, master_seed,
                                  workers);
        OCResult pw = estimate_oc(dd, {Hypothesis::h1, s}, nsim, master_seed,
                                  workers);
        out.push_back({s, t1.prn, pw.prn});
    }
    return out;
}

}  // namespace dte
