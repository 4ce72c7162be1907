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
#include <stdexcept>
#include <vector>

#include "dte/medians.hpp"
#include "dte/posterior.hpp"
#include "dte/rng.hpp"

namespace dte {

enum class AccrualKind { deterministic, poisson };

/// Patient arrival process, per arm. Deterministic accrual places patient k
/// at k/rate; Poisson accrual uses independent per-arm processes with the
/// given intensity.
struct AccrualModel {
    AccrualKind kind = AccrualKind::deterministic;
    double rate = 1.0;  // patients per month per arm

    void validate() const {
        if (!(rate > 0.0)) {
            throw std::invalid_argument("AccrualModel: rate must be > 0");
        }
    }
};

/// All design-time inputs for a two-arm group-sequential futility design.
/// Medians are overall (marginal) clinical medians; the engine derives the
/// post-separation treatment median at s_likely when it needs the piecewise
/// generator under the alternative.
struct DesignSpec {
    double control_median;    // overall median under the null (both arms)
    double treatment_median;  // overall treatment median under the alternative
    double s_likely;          // best-guess separation time (months)
    PriorSpec prior;          // inverse-Gamma hyperparameters + S prior
    std::vector<int> schedule;  // per-arm analysis sizes, final entry = N
    Boundary boundary;
    AccrualModel accrual;
    double fup = 6.0;  // follow-up after the last enrollment (months)

    void validate() const {
        if (!(control_median > 0.0) ||
            !(treatment_median >= control_median)) {
            throw std::invalid_argument("DesignSpec: invalid medians");
        }
        if (!(s_likely >= 0.0)) {
            throw std::invalid_argument("DesignSpec: negative s_likely");
        }
        if (schedule.empty()) {
            throw std::invalid_argument("DesignSpec: empty schedule");
        }
        for (std::size_t r = 0; r < schedule.size(); ++r) {
            if (schedule[r] <= 0 ||
                (r > 0 && schedule[r] <= schedule[r - 1])) {
                throw std::invalid_argument(
                    "DesignSpec: schedule must be strictly increasing");
            }
        }
        if (!(fup > 0.0)) {
            throw std::invalid_argument("DesignSpec: fup must be > 0");
        }
        accrual.validate();
    }

    int n_max() const { return schedule.back(); }

    /// Post-separation treatment median implied by the overall medians at
    /// the design's best-guess separation time.
    double post_treatment_median() const {
        return overall_to_post(control_median, treatment_median, s_likely)
            .post_treatment;
    }
};

/// Generator-scale description of one simulated truth: control exponential
/// with median post_control_median, treatment piecewise with the same
/// pre-separation median, switching to post_treatment_median at s_change.
struct PiecewiseTruth {
    double post_control_median;
    double post_treatment_median;
    double s_change;
};

/// One virtual trial: per-arm enrollment calendar times and latent event
/// times (months since enrollment, before any administrative censoring).
struct TrialData {
    std::vector<double> enroll0, event0;  // control
    std::vector<double> enroll1, event1;  // treatment

    int n_per_arm() const { return static_cast<int>(enroll0.size()); }
};

inline std::vector<double> sample_enrollment(const AccrualModel& accrual,
                                             int n, RngStream& rng) {
    std::vector<double> times(n);
    if (accrual.kind == AccrualKind::deterministic) {
        for (int k = 0; k < n; ++k) times[k] = (k + 1) / accrual.rate;
    } else {
        double t = 0.0;
        for (int k = 0; k < n; ++k) {
            t += rng.exponential(1.0 / accrual.rate);
            times[k] = t;
        }
    }
    return times;
}

/// Draw a full trial under the given truth. Draw order is fixed (control
/// enrollment, control events, treatment enrollment, treatment events) so a
/// given stream always produces the same dataset.
inline TrialData generate_trial_data(const PiecewiseTruth& truth,
                                     int n_per_arm,
                                     const AccrualModel& accrual,
                                     RngStream& rng) {
    if (n_per_arm <= 0) {
        throw std::invalid_argument("generate_trial_data: n_per_arm <= 0");
    }
    PiecewiseExpModel treat = piecewise_model_from_medians(
        truth.post_control_median, truth.post_treatment_median,
        truth.s_change);
    const double control_mean = truth.post_control_median / ln2;

    TrialData d;
    d.enroll0 = sample_enrollment(accrual, n_per_arm, rng);
    d.event0.resize(n_per_arm);
    for (int i = 0; i < n_per_arm; ++i) {
        d.event0[i] = rng.exponential(control_mean);
    }
    d.enroll1 = sample_enrollment(accrual, n_per_arm, rng);
    d.event1.resize(n_per_arm);
    for (int i = 0; i < n_per_arm; ++i) {
        d.event1[i] = treat.sample(rng);
    }
    return d;
}

/// Administrative snapshot of one arm at a calendar time: subjects enrolled
/// by then, observed time min(event, t - enrollment), event flag accordingly.
inline ArmSnapshot snapshot_arm(const std::vector<double>& enroll,
                                const std::vector<double>& event,
                                double calendar_time) {
    ArmSnapshot snap;
    for (std::size_t i = 0; i < enroll.size(); ++i) {
        if (enroll[i] > calendar_time) continue;
        double follow = calendar_time - enroll[i];
        if (event[i] <= follow) {
            snap.add(event[i], true);
        } else {
            snap.add(follow, false);
        }
    }
    return snap;
}

inline std::pair<ArmSnapshot, ArmSnapshot> snapshot_at(const TrialData& d,
                                                       double calendar_time) {
    if (!(calendar_time >= 0.0)) {
        throw std::invalid_argument("snapshot_at: negative calendar time");
    }
    return {snapshot_arm(d.enroll0, d.event0, calendar_time),
            snapshot_arm(d.enroll1, d.event1, calendar_time)};
}

/// Calendar times of the scheduled analyses: interim r fires when patient
/// schedule[r] has enrolled in both arms, the final analysis fup months
/// after the last enrollment.
inline std::vector<double> analysis_times(const TrialData& d,
                                          const std::vector<int>& schedule,
                                          double fup) {
    if (schedule.empty() || schedule.back() > d.n_per_arm()) {
        throw std::invalid_argument(
            "analysis_times: schedule exceeds dataset size");
    }
    std::vector<double> times(schedule.size());
    for (std::size_t r = 0; r + 1 < schedule.size(); ++r) {
        int k = schedule[r] - 1;
        times[r] = std::max(d.enroll0[k], d.enroll1[k]);
    }
    times.back() = std::max(d.enroll0.back(), d.enroll1.back()) + fup;
    return times;
}

struct TrialOutcome {
    bool reject;            // true iff no look triggered futility
    int stopped_stage;      // 1-based look index of the terminal analysis
    double n_used_per_arm;  // enrolled per arm at the terminal analysis
    double duration;        // calendar time of the terminal analysis
};

/// Execute the group-sequential decision path on a simulated trial, with all
/// analyses conditioning on the separation time s_analysis.
inline TrialOutcome run_trial(const TrialData& data,
                              const std::vector<int>& schedule,
                              const Boundary& boundary, double fup,
                              const PriorSpec& prior, double s_analysis) {
    const auto times = analysis_times(data, schedule, fup);
    const int n_looks = static_cast<int>(schedule.size());
    const double n_max = schedule.back();

    for (int r = 0; r < n_looks; ++r) {
        auto [ctrl, treat] = snapshot_at(data, times[r]);
        double prob = prob_treatment_worse(
            sufficient_stats(ctrl, treat, s_analysis), prior);
        bool final_look = r + 1 == n_looks;
        if (futility_stop(prob, boundary, schedule[r], n_max)) {
            return {false, r + 1,
                    0.5 * (ctrl.size() + treat.size()), times[r]};
        }
        if (final_look) {
            return {true, r + 1, 0.5 * (ctrl.size() + treat.size()),
                    times[r]};
        }
    }
    throw std::logic_error("run_trial: unreachable");
}

}  // namespace dte
