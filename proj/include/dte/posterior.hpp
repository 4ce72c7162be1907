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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dte/distributions.hpp"
#include "dte/math.hpp"

// Conjugate posterior machinery for the two-arm piecewise-exponential model,
// conditional on a separation time s. Everything here is a pure function of
// value types and safe to call from any number of workers.

namespace dte {

/// One arm of a trial as seen at an analysis: observed time since enrollment
/// and the event indicator (0 = administratively censored).
struct ArmSnapshot {
    std::vector<double> time;
    std::vector<std::uint8_t> event;

    std::size_t size() const { return time.size(); }

    void add(double t, bool ev) {
        time.push_back(t);
        event.push_back(ev ? 1 : 0);
    }

    void validate() const {
        if (time.size() != event.size()) {
            throw std::invalid_argument("ArmSnapshot: length mismatch");
        }
        for (double t : time) {
            if (!(t >= 0.0)) {
                throw std::invalid_argument("ArmSnapshot: negative time");
            }
        }
    }
};

/// Total time on test accumulated inside (t1, t2]:
/// sum_i max(0, min(z_i, t2) - t1).
inline double ttot(const ArmSnapshot& arm, double t1, double t2) {
    if (!(t1 >= 0.0) || !(t2 >= t1)) {
        throw std::invalid_argument("ttot: need 0 <= t1 <= t2");
    }
    double acc = 0.0;
    for (double z : arm.time) {
        acc += std::max(0.0, std::min(z, t2) - t1);
    }
    return acc;
}

/// Sufficient statistics for the conditional likelihood. Event counts are
/// doubles because fractional counts are meaningful in trend analysis.
struct SufficientStats {
    double d0;       // control events
    double d01;      // treatment events in (0, s]
    double d11;      // treatment events in (s, tau]
    double sum_z0;   // total control follow-up
    double ttot_01;  // treatment TTOT over (0, s]
    double ttot_12;  // treatment TTOT over (s, tau]
    double tau;      // last observed treatment time (censored included)
};

inline SufficientStats sufficient_stats(const ArmSnapshot& control,
                                        const ArmSnapshot& treatment,
                                        double s) {
    if (control.size() == 0 || treatment.size() == 0) {
        throw std::invalid_argument("sufficient_stats: empty arm");
    }
    if (!(s >= 0.0)) {
        throw std::invalid_argument("sufficient_stats: negative separation");
    }

    SufficientStats st{};
    st.sum_z0 = 0.0;
    st.d0 = 0.0;
    for (std::size_t i = 0; i < control.size(); ++i) {
        st.sum_z0 += control.time[i];
        st.d0 += control.event[i];
    }

    st.tau = 0.0;
    for (double z : treatment.time) st.tau = std::max(st.tau, z);

    st.d01 = 0.0;
    st.d11 = 0.0;
    for (std::size_t i = 0; i < treatment.size(); ++i) {
        if (!treatment.event[i]) continue;
        if (treatment.time[i] <= s) {
            st.d01 += 1.0;
        } else {
            st.d11 += 1.0;
        }
    }
    st.ttot_01 = ttot(treatment, 0.0, std::min(s, st.tau));
    st.ttot_12 = s >= st.tau ? 0.0 : ttot(treatment, s, st.tau);
    return st;
}

/// Inverse-Gamma hyperparameters for the two mean-scale survival parameters,
/// plus the truncated-Gamma prior on the separation time. Shape-scale
/// convention throughout (prior mean b/(a-1)).
struct PriorSpec {
    double a0;
    double b0;
    double a1;
    double b1;
    TruncGammaPrior s_prior;

    PriorSpec(double a0_, double b0_, double a1_, double b1_,
              TruncGammaPrior s_prior_)
        : a0(a0_), b0(b0_), a1(a1_), b1(b1_), s_prior(s_prior_) {
        if (!(a0 > 0.0) || !(b0 > 0.0) || !(a1 > 0.0) || !(b1 > 0.0)) {
            throw std::invalid_argument(
                "PriorSpec: hyperparameters must be positive");
        }
    }

    /// Default weakly-informative hyperparameters: shapes 4, b0 centered at
    /// three times the null mean (3 * median / ln 2), b1 = 2 * b0.
    static PriorSpec defaults(double null_overall_median,
                              TruncGammaPrior s_prior_) {
        double b0 = 3.0 * null_overall_median / ln2;
        return PriorSpec(4.0, b0, 4.0, 2.0 * b0, s_prior_);
    }
};

struct InvGammaParams {
    double shape;
    double scale;
};

/// Conditional posteriors for the two arm parameters, on both the mean scale
/// and the median scale (median-scale posteriors multiply the scale by ln 2).
struct PosteriorParams {
    InvGammaParams mu0_mean;
    InvGammaParams mu1_mean;
    InvGammaParams mu0_median;
    InvGammaParams mu1_median;
};

inline PosteriorParams posterior_params(const SufficientStats& st,
                                        const PriorSpec& prior) {
    PosteriorParams p;
    p.mu0_mean = {prior.a0 + st.d0 + st.d01,
                  prior.b0 + st.ttot_01 + st.sum_z0};
    p.mu1_mean = {prior.a1 + st.d11, prior.b1 + st.ttot_12};
    p.mu0_median = {p.mu0_mean.shape, ln2 * p.mu0_mean.scale};
    p.mu1_median = {p.mu1_mean.shape, ln2 * p.mu1_mean.scale};
    return p;
}

/// Closed-form reduction of the double integral: the posterior probability
/// that the treatment median is worse than control equals a Beta CDF,
///   P(K < r) with K ~ Beta(a0 + d0 + d01, a1 + d11)
///   and r = (b0 + TTOT(0,s) + sum z0) / (b0 + b1 + sum z0 + TTOT(0, tau)).
inline double prob_treatment_worse(const SufficientStats& st,
                                   const PriorSpec& prior) {
    double num = prior.b0 + st.ttot_01 + st.sum_z0;
    double den = prior.b0 + prior.b1 + st.sum_z0 + st.ttot_01 + st.ttot_12;
    double threshold = num / den;
    return beta_cdf(threshold, prior.a0 + st.d0 + st.d01,
                    prior.a1 + st.d11);
}

/// Futility boundary C(n_r) = 1 - lambda * (n_r / N)^gamma, non-increasing
/// in n_r for positive parameters.
struct Boundary {
    double lambda;
    double gamma;

    Boundary(double lambda_ = 0.95, double gamma_ = 1.0)
        : lambda(lambda_), gamma(gamma_) {
        if (!(lambda >= 0.0 && lambda <= 1.0) || !(gamma > 0.0)) {
            throw std::invalid_argument(
                "Boundary: need lambda in [0,1] and gamma > 0");
        }
    }

    double threshold(double n_r, double n_max) const {
        if (!(n_r > 0.0 && n_r <= n_max)) {
            throw std::invalid_argument("Boundary: need 0 < n_r <= N");
        }
        return 1.0 - lambda * std::pow(n_r / n_max, gamma);
    }
};

/// Stop for futility iff the posterior probability strictly exceeds the
/// threshold; ties continue.
inline bool futility_stop(double prob, const Boundary& b, double n_r,
                          double n_max) {
    return prob > b.threshold(n_r, n_max);
}

}  // namespace dte
