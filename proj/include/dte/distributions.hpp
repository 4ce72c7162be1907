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
#include <stdexcept>

#include "dte/math.hpp"
#include "dte/rng.hpp"

namespace dte {

inline constexpr double ln2 = 0.69314718055994530941723212145818;

/// Two-piece exponential event-time model on the mean scale: hazard 1/mu0 on
/// [0, s) and 1/mu1 on [s, inf). The survival function is continuous at s.
struct PiecewiseExpModel {
    double mu0;  // mean of the pre-separation segment (months)
    double mu1;  // mean of the post-separation segment (months)
    double s;    // separation time (months)

    PiecewiseExpModel(double mu0_, double mu1_, double s_)
        : mu0(mu0_), mu1(mu1_), s(s_) {
        if (!(mu0 > 0.0) || !(mu1 > 0.0)) {
            throw std::invalid_argument(
                "PiecewiseExpModel: means must be positive");
        }
        if (!(s >= 0.0)) {
            throw std::invalid_argument(
                "PiecewiseExpModel: separation time must be >= 0");
        }
    }

    double survival(double t) const {
        if (!(t >= 0.0)) {
            throw std::invalid_argument("survival: negative time");
        }
        if (t < s) return std::exp(-t / mu0);
        return std::exp(-s / mu0 - (t - s) / mu1);
    }

    double density(double t) const {
        if (!(t >= 0.0)) {
            throw std::invalid_argument("density: negative time");
        }
        if (t < s) return std::exp(-t / mu0) / mu0;
        return std::exp(-s / mu0 - (t - s) / mu1) / mu1;
    }

    /// Inverse-CDF draw: with E ~ Exp(1), the event time is mu0*E while that
    /// stays below s, otherwise s + mu1*(E - s/mu0).
    double sample(RngStream& rng) const {
        double e = -std::log(rng.uniform());
        double t = mu0 * e;
        if (t < s) return t;
        return s + mu1 * (e - s / mu0);
    }

    /// Time t with survival(t) == 1 - p.
    double quantile(double p) const {
        if (!(p >= 0.0 && p < 1.0)) {
            throw std::invalid_argument("quantile: p outside [0, 1)");
        }
        double e = -std::log1p(-p);
        double t = mu0 * e;
        if (t < s) return t;
        return s + mu1 * (e - s / mu0);
    }
};

inline double piecewise_exp_survival(const PiecewiseExpModel& model, double t) {
    return model.survival(t);
}

/// Summary statistics of a truncated Gamma distribution.
struct TruncGammaSummaries {
    double mean;
    double median;
    double sd;
    double q025;
    double q975;
};

/// Gamma(shape, scale) restricted to [lower, upper]. Shape/scale follow the
/// shape-scale convention (untruncated mean = shape * scale).
struct TruncGammaPrior {
    double shape;
    double scale;
    double lower;
    double upper;

    TruncGammaPrior(double shape_, double scale_, double lower_, double upper_)
        : shape(shape_), scale(scale_), lower(lower_), upper(upper_) {
        if (!(shape > 0.0) || !(scale > 0.0)) {
            throw std::invalid_argument(
                "TruncGammaPrior: shape and scale must be positive");
        }
        if (!(lower >= 0.0) || !(lower < upper)) {
            throw std::invalid_argument(
                "TruncGammaPrior: need 0 <= lower < upper");
        }
    }

    /// Probability mass the untruncated Gamma places on [lower, upper].
    /// A mass below 1e-12 makes the truncation numerically degenerate.
    double window_mass() const {
        double p_lo = gamma_cdf(lower, shape, scale);
        double p_hi = gamma_cdf(upper, shape, scale);
        double mass = p_hi - p_lo;
        if (!(mass > 1e-12)) {
            throw std::domain_error(
                "TruncGammaPrior: degenerate truncation window");
        }
        return mass;
    }

    double cdf(double x) const {
        if (x <= lower) return 0.0;
        if (x >= upper) return 1.0;
        double p_lo = gamma_cdf(lower, shape, scale);
        double mass = window_mass();
        return (gamma_cdf(x, shape, scale) - p_lo) / mass;
    }

    double pdf(double x) const {
        if (x < lower || x > upper) return 0.0;
        double mass = window_mass();
        double log_pdf = (shape - 1.0) * std::log(x) - x / scale -
                         log_gamma(shape) - shape * std::log(scale);
        return std::exp(log_pdf) / mass;
    }

    double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("quantile: q outside [0, 1]");
        }
        double p_lo = gamma_cdf(lower, shape, scale);
        double mass = window_mass();
        double p = p_lo + q * mass;
        if (p >= 1.0) return upper;
        double x = gamma_quantile(p, shape, scale);
        return std::min(std::max(x, lower), upper);
    }

    /// Inverse-CDF draw restricted to [F(lower), F(upper)].
    double sample(RngStream& rng) const { return quantile(rng.uniform()); }
};

/// Mean, median, sd and the 2.5%/97.5% quantiles of the truncated Gamma,
/// computed from regularized incomplete-gamma identities (absolute error is
/// dominated by the special function, far below 1e-8).
inline TruncGammaSummaries trunc_gamma_summaries(const TruncGammaPrior& g) {
    double mass = g.window_mass();
    double p1_lo = gamma_cdf(g.lower, g.shape + 1.0, g.scale);
    double p1_hi = gamma_cdf(g.upper, g.shape + 1.0, g.scale);
    double p2_lo = gamma_cdf(g.lower, g.shape + 2.0, g.scale);
    double p2_hi = gamma_cdf(g.upper, g.shape + 2.0, g.scale);

    double mean = g.shape * g.scale * (p1_hi - p1_lo) / mass;
    double m2 = g.shape * (g.shape + 1.0) * g.scale * g.scale *
                (p2_hi - p2_lo) / mass;
    double var = std::max(0.0, m2 - mean * mean);

    TruncGammaSummaries out;
    out.mean = mean;
    out.sd = std::sqrt(var);
    out.median = g.quantile(0.5);
    out.q025 = g.quantile(0.025);
    out.q975 = g.quantile(0.975);
    return out;
}

/// Gamma draw under the rate convention: mean shape/rate.
inline double sample_gamma_rate(double shape, double rate, RngStream& rng) {
    if (!(rate > 0.0)) throw std::invalid_argument("gamma: rate must be > 0");
    return rng.gamma(shape) / rate;
}

/// Gamma draw under the scale convention: mean shape*scale.
inline double sample_gamma_scale(double shape, double scale, RngStream& rng) {
    if (!(scale > 0.0)) throw std::invalid_argument("gamma: scale must be > 0");
    return rng.gamma(shape) * scale;
}

/// Inverse-Gamma(a, b) draw under the shape-scale convention with mean
/// b/(a-1) for a > 1. The reciprocal of a draw is Gamma(a, rate b).
inline double sample_inv_gamma(double shape, double scale, RngStream& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("inv_gamma: parameters must be positive");
    }
    return scale / rng.gamma(shape);
}

}  // namespace dte
