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

// Test-only oracles, kept independent of the implementation paths they
// check: plain adaptive quadrature, empirical-CDF distances, and a direct
// Monte Carlo evaluation of the posterior comparison probability.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dte/posterior.hpp"
#include "dte/rng.hpp"

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b) {
    double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive_simpson_impl(const std::function<double(double)>& f,
                                    double a, double b, double whole,
                                    double tol, int depth) {
    double m = 0.5 * (a + b);
    double left = simpson(f, a, m);
    double right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_impl(f, a, m, left, tol / 2.0, depth - 1) +
           adaptive_simpson_impl(f, m, b, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10) {
    return adaptive_simpson_impl(f, a, b, simpson(f, a, b), tol, 60);
}

/// sup_x |ECDF(x) - F(x)| over the sample points.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        sup = std::max(sup, std::abs((i + 1) / n - f));
        sup = std::max(sup, std::abs(i / n - f));
    }
    return sup;
}

/// Direct Monte Carlo estimate of P(mu1 < mu0 | data): independent draws
/// from the two conditional inverse-Gamma posteriors.
inline double mc_prob_treatment_worse(const dte::SufficientStats& st,
                                      const dte::PriorSpec& prior, int ndraws,
                                      dte::RngStream& rng) {
    auto post = dte::posterior_params(st, prior);
    int hits = 0;
    for (int k = 0; k < ndraws; ++k) {
        double mu0 = post.mu0_mean.scale / rng.gamma(post.mu0_mean.shape);
        double mu1 = post.mu1_mean.scale / rng.gamma(post.mu1_mean.shape);
        if (mu1 < mu0) ++hits;
    }
    return static_cast<double>(hits) / ndraws;
}

}  // namespace oracles
