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
#include <numeric>
#include <vector>

#include "dte/math.hpp"
#include "dte/oc.hpp"

// Trend analysis of the posterior comparison probability as a function of
// the pre-separation event count d01, with administrative censoring and
// interim looks ignored: every subject is an event, d0 = n_r and
// d01 + d11 = n_r. The sufficient statistics are then Gamma-distributed and
// the posterior probability can be sampled directly.
//
// The threshold ratio is evaluated in units of the pre-separation mean, so
// it depends on the hyperparameters only through b0/mu0, (b0+b1)/mu0 and on
// the means only through mu1/mu0. Rescaling (mu0, mu1, b0, b1) by a common
// factor that preserves those ratios reproduces the exact same arithmetic,
// draw for draw.

namespace dte {

struct TrendConfig {
    int n_r = 50;                 // per-arm size, all events observed
    double quantile_level = 0.05; // B
    Hypothesis hyp = Hypothesis::h1;
    double a0 = 4.0, b0 = 12.12, a1 = 4.0, b1 = 24.24;
    double mu0 = 2.8 / ln2;  // mean scale
    double mu1 = 6.57 / ln2; // mean scale (used under the alternative)
    int grid_points = 100;
    int nsim = 10000;
};

struct TrendCurve {
    std::vector<double> d01;
    std::vector<double> quantile;
};

/// Quantile with linear interpolation between order statistics (R type 7).
inline double sorted_quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("sorted_quantile: empty sample");
    }
    std::sort(values.begin(), values.end());
    if (q <= 0.0) return values.front();
    if (q >= 1.0) return values.back();
    double h = (values.size() - 1) * q;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    double frac = h - lo;
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// B-quantile of the posterior probability that the treatment is better,
/// P(mu1_tilde > mu0_tilde | data), across simulated sufficient statistics,
/// at each point of the d01 grid.
inline TrendCurve quantile_trend(const TrendConfig& cfg, std::uint64_t seed,
                                 int workers = 0) {
    if (cfg.n_r <= 0 || cfg.grid_points < 2 || cfg.nsim < 1) {
        throw std::invalid_argument("quantile_trend: invalid config");
    }
    if (!(cfg.quantile_level > 0.0 && cfg.quantile_level < 1.0)) {
        throw std::invalid_argument("quantile_trend: B outside (0,1)");
    }
    const double b0_over_mu0 = cfg.b0 / cfg.mu0;
    const double b01_over_mu0 = (cfg.b0 + cfg.b1) / cfg.mu0;
    const double mean_ratio =
        cfg.hyp == Hypothesis::h1 ? cfg.mu1 / cfg.mu0 : 1.0;
    const double d0 = cfg.n_r;

    TrendCurve curve;
    curve.d01.resize(cfg.grid_points);
    curve.quantile.resize(cfg.grid_points);
    for (int g = 0; g < cfg.grid_points; ++g) {
        curve.d01[g] = cfg.n_r * static_cast<double>(g) /
                       (cfg.grid_points - 1);
    }

    parallel_for(cfg.grid_points, workers, [&](std::size_t g) {
        const double d01 = curve.d01[g];
        const double d11 = cfg.n_r - d01;
        RngStream rng = RngStream::from_key(seed, {purpose::trend, g});
        std::vector<double> probs(cfg.nsim);
        for (int i = 0; i < cfg.nsim; ++i) {
            // standard-gamma draws for TTOT(0,s)/mu0, sum z0/mu0, TTOT(s,tau)/mu1
            double x = rng.gamma(d01);
            double y = rng.gamma(d0);
            double z = rng.gamma(d11);
            double num = b0_over_mu0 + x + y;
            double den = b01_over_mu0 + x + y + mean_ratio * z;
            double threshold = num / den;
            probs[i] = beta_cdf_complement(threshold, cfg.a0 + d0 + d01,
                                           cfg.a1 + d11);
        }
        curve.quantile[g] = sorted_quantile(std::move(probs),
                                            cfg.quantile_level);
    });
    return curve;
}

enum class TrendWindow { q25_q75, q10_q90 };

struct TrendSummary {
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;
    double spearman = 0.0;
    bool constant = false;
};

/// Average ranks with ties shared.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double spearman_rho(const std::vector<double>& x,
                           const std::vector<double>& y) {
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Range and monotonicity of the quantile curve over the middle portion of
/// the d01 grid ([Q25,Q75] keeps the central half of grid indices, [Q10,Q90]
/// the central 80%).
inline TrendSummary trend_summary(const TrendCurve& curve, TrendWindow w) {
    if (curve.d01.empty() || curve.d01.size() != curve.quantile.size()) {
        throw std::invalid_argument("trend_summary: empty or ragged curve");
    }
    double q_lo = w == TrendWindow::q25_q75 ? 0.25 : 0.10;
    double q_hi = w == TrendWindow::q25_q75 ? 0.75 : 0.90;
    std::size_t n = curve.d01.size();
    std::size_t lo = static_cast<std::size_t>(std::lround(q_lo * (n - 1)));
    std::size_t hi = static_cast<std::size_t>(std::lround(q_hi * (n - 1)));

    std::vector<double> xs(curve.d01.begin() + lo, curve.d01.begin() + hi + 1);
    std::vector<double> ys(curve.quantile.begin() + lo,
                           curve.quantile.begin() + hi + 1);
    TrendSummary s;
    s.min = *std::min_element(ys.begin(), ys.end());
    s.max = *std::max_element(ys.begin(), ys.end());
    s.range = s.max - s.min;
    s.constant = s.range == 0.0;
    s.spearman = s.constant ? 0.0 : spearman_rho(xs, ys);
    return s;
}

}  // namespace dte
