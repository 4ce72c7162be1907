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

#include <stdexcept>

#include "dte/distributions.hpp"

// Conversions between the overall (marginal) median survival a clinician
// quotes and the post-separation median the piecewise model is parameterized
// by. The control arm is a plain exponential, so its two medians coincide.
// Internally the engine works on the mean scale (mean = median / ln 2); all
// public interfaces speak medians.

namespace dte {

struct MedianPair {
    double overall_control;    // clinical overall median, control arm
    double overall_treatment;  // clinical overall median, treatment arm
    double post_control;       // model median of the pre-separation segment
    double post_treatment;     // model median of the post-separation segment
};

/// Forward map: overall treatment median implied by post-separation medians
/// and a separation time s.
inline double post_to_overall(double post_control, double post_treatment,
                              double s) {
    if (!(post_control > 0.0) || !(post_treatment > 0.0) || !(s >= 0.0)) {
        throw std::invalid_argument("post_to_overall: invalid inputs");
    }
    if (post_control < s) return post_control;
    return (1.0 - post_treatment / post_control) * s + post_treatment;
}

/// Inverse map: derive the post-separation treatment median from overall
/// medians. When the control median falls before the separation time the
/// overall treatment median carries no information about the post-separation
/// segment and the conversion returns the null value.
inline MedianPair overall_to_post(double overall_control,
                                  double overall_treatment, double s) {
    if (!(overall_control > 0.0)) {
        throw std::invalid_argument("overall_to_post: control median <= 0");
    }
    if (!(overall_treatment >= overall_control)) {
        throw std::invalid_argument(
            "overall_to_post: treatment median below control median");
    }
    if (!(s >= 0.0)) {
        throw std::invalid_argument("overall_to_post: negative separation");
    }

    MedianPair out;
    out.overall_control = overall_control;
    out.overall_treatment = overall_treatment;
    out.post_control = overall_control;

    if (overall_treatment == overall_control) {
        out.post_treatment = overall_control;
    } else if (overall_control < s) {
        out.post_treatment = out.post_control;
    } else if (s == overall_control) {
        throw std::domain_error(
            "overall_to_post: separation equals the control median; the "
            "requested overall treatment median is unattainable");
    } else {
        out.post_treatment =
            (overall_treatment - s) / (1.0 - s / out.post_control);
    }
    return out;
}

/// Piecewise model (mean scale) for a treatment arm described by
/// post-separation medians and a change point.
inline PiecewiseExpModel piecewise_model_from_medians(double post_control_med,
                                                      double post_treatment_med,
                                                      double s) {
    return PiecewiseExpModel(post_control_med / ln2, post_treatment_med / ln2,
                             s);
}

}  // namespace dte
