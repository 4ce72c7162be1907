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
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dte/distributions.hpp"

// Weighted-least-squares fit of the truncated-Gamma separation-time prior to
// expert-elicited summary statistics. Experts may provide any subset of
// {mean, median, sd, 2.5% quantile, 97.5% quantile}; absent statistics
// contribute nothing to the objective.

namespace dte {

struct ExpertSummary {
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> sd;
    std::optional<double> q025;
    std::optional<double> q975;

    bool any() const {
        return mean || median || sd || q025 || q975;
    }
};

/// Weights for (mean, median, sd, q025, q975), in that order.
struct ElicitationWeights {
    std::array<double, 5> w{1.0, 1.0, 1.0, 1.0, 1.0};
};

struct ElicitationFit {
    TruncGammaPrior prior;
    TruncGammaSummaries summaries;
    double objective;
    bool weakly_identified;  // flat objective; smallest-shape candidate kept
};

/// Downhill simplex in a fixed dimension. Good enough for the 2-d smooth
/// objectives here; restarts come from the multi-start loop around it.
template <std::size_t Dim>
inline std::pair<std::array<double, Dim>, double> nelder_mead(
    const std::function<double(const std::array<double, Dim>&)>& f,
    std::array<double, Dim> start, double step, int max_iter, double tol) {
    constexpr std::size_t n = Dim;
    std::vector<std::array<double, Dim>> x(n + 1, start);
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i < n; ++i) x[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&] {
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = i + 1; j <= n; ++j) {
                if (fx[j] < fx[i]) {
                    std::swap(fx[i], fx[j]);
                    std::swap(x[i], x[j]);
                }
            }
        }
    };

    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::abs(fx[n] - fx[0]) <
            tol * (std::abs(fx[0]) + std::abs(fx[n]) + 1e-30)) {
            break;
        }
        std::array<double, Dim> centroid{};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < Dim; ++d) centroid[d] += x[i][d] / n;
        }
        auto blend = [&](double coef) {
            std::array<double, Dim> p;
            for (std::size_t d = 0; d < Dim; ++d) {
                p[d] = centroid[d] + coef * (x[n][d] - centroid[d]);
            }
            return p;
        };

        auto xr = blend(-1.0);
        double fr = f(xr);
        if (fr < fx[0]) {
            auto xe = blend(-2.0);
            double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            auto xc = blend(fr < fx[n] ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t d = 0; d < Dim; ++d) {
                        x[i][d] = x[0][d] + 0.5 * (x[i][d] - x[0][d]);
                    }
                    fx[i] = f(x[i]);
                }
            }
        }
    }
    order();
    return {x[0], fx[0]};
}

/// WLS objective for the candidate (shape, scale): weighted squared gaps
/// between theoretical truncated summaries and each expert's provided values.
inline double elicitation_objective(double shape, double scale, double lower,
                                    double upper,
                                    const std::vector<ExpertSummary>& experts,
                                    const ElicitationWeights& weights) {
    TruncGammaSummaries th;
    try {
        th = trunc_gamma_summaries(TruncGammaPrior(shape, scale, lower, upper));
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
    double obj = 0.0;
    auto add = [&](int k, const std::optional<double>& elicited, double value) {
        if (weights.w[k] == 0.0 || !elicited) return;
        double d = value - *elicited;
        obj += weights.w[k] * d * d;
    };
    for (const auto& e : experts) {
        add(0, e.mean, th.mean);
        add(1, e.median, th.median);
        add(2, e.sd, th.sd);
        add(3, e.q025, th.q025);
        add(4, e.q975, th.q975);
    }
    return obj;
}

/// Fit (shape, scale) by multi-start Nelder-Mead on the log scale. The WLS
/// surface can be nearly flat when the experts describe an almost uniform
/// prior; in that case the smallest-shape candidate among the near-ties is
/// returned and the fit is flagged weakly identified.
inline ElicitationFit fit_trunc_gamma(const std::vector<ExpertSummary>& experts,
                                      const ElicitationWeights& weights,
                                      double lower, double upper) {
    if (experts.empty()) {
        throw std::invalid_argument("fit_trunc_gamma: no experts");
    }
    if (!(lower >= 0.0 && lower < upper)) {
        throw std::invalid_argument("fit_trunc_gamma: need 0 <= L < U");
    }
    bool any_usable = false;
    for (const auto& e : experts) {
        if ((e.mean && weights.w[0] > 0) || (e.median && weights.w[1] > 0) ||
            (e.sd && weights.w[2] > 0) || (e.q025 && weights.w[3] > 0) ||
            (e.q975 && weights.w[4] > 0)) {
            any_usable = true;
        }
    }
    if (!any_usable) {
        throw std::invalid_argument(
            "fit_trunc_gamma: no elicited statistic carries positive weight");
    }

    auto f = [&](const std::array<double, 2>& p) {
        return elicitation_objective(std::exp(p[0]), std::exp(p[1]), lower,
                                     upper, experts, weights);
    };

    struct Candidate {
        double shape, scale, obj;
    };
    std::vector<Candidate> results;
    const std::array<double, 3> shape_starts{0.3, 3.0, 30.0};
    const std::array<double, 3> scale_starts{0.03, 0.3, 3.0};
    for (double s1 : shape_starts) {
        for (double s2 : scale_starts) {
            auto [p, obj] = nelder_mead<2>(
                f, {std::log(s1), std::log(s2)}, 0.7, 500, 1e-13);
            if (std::isfinite(obj)) {
                results.push_back({std::exp(p[0]), std::exp(p[1]), obj});
            }
        }
    }
    if (results.empty()) {
        throw std::runtime_error("fit_trunc_gamma: optimizer failed");
    }
    std::sort(results.begin(), results.end(),
              [](const Candidate& a, const Candidate& b) {
                  return a.obj < b.obj;
              });

    std::size_t top = std::min<std::size_t>(results.size(), 10);
    double span = results[top - 1].obj - results[0].obj;
    bool flat = span < 1e-8;

    Candidate chosen = results[0];
    if (flat) {
        for (std::size_t i = 0; i < top; ++i) {
            if (results[i].shape < chosen.shape) chosen = results[i];
        }
    }

    ElicitationFit fit{TruncGammaPrior(chosen.shape, chosen.scale, lower,
                                       upper),
                       {}, chosen.obj, flat};
    fit.summaries = trunc_gamma_summaries(fit.prior);
    return fit;
}

}  // namespace dte
