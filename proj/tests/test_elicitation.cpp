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
#include <catch2/catch_amalgamated.hpp>

#include "dte/elicitation.hpp"

using namespace dte;

namespace {

std::vector<ExpertSummary> three_experts() {
    std::vector<ExpertSummary> e(3);
    e[0].mean = 2.2;
    e[0].median = 2.27;
    e[1].mean = 2.1;
    e[1].median = 2.30;
    e[2].mean = 2.3;
    e[2].median = 2.31;
    return e;
}

ElicitationWeights main_weights() {
    ElicitationWeights w;
    w.w = {4.0, 4.0, 2.0, 1.0, 1.0};
    return w;
}

}  // namespace

TEST_CASE("three-expert fit reproduces the reference summaries") {
    ElicitationFit fit =
        fit_trunc_gamma(three_experts(), main_weights(), 2.0, 2.5);
    TruncGammaSummaries ref =
        trunc_gamma_summaries(TruncGammaPrior(12.86, 0.193, 2.0, 2.5));
    CHECK(std::abs(fit.summaries.mean - ref.mean) < 0.02);
    CHECK(std::abs(fit.summaries.median - ref.median) < 0.02);
    // the fit is at least as good as the reference parameters
    double ref_obj = elicitation_objective(12.86, 0.193, 2.0, 2.5,
                                           three_experts(), main_weights());
    CHECK(fit.objective <= ref_obj + 1e-9);
}

TEST_CASE("fit dominates a parameter grid") {
    ElicitationFit fit =
        fit_trunc_gamma(three_experts(), main_weights(), 2.0, 2.5);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            double s1 = 0.1 + (50.0 - 0.1) * i / 49.0;
            double s2 = 0.01 + (5.0 - 0.01) * j / 49.0;
            double obj = elicitation_objective(s1, s2, 2.0, 2.5,
                                               three_experts(),
                                               main_weights());
            CHECK(fit.objective <= obj + 1e-9);
        }
    }
}

TEST_CASE("single mean constraint is matched") {
    std::vector<ExpertSummary> one(1);
    one[0].mean = 2.25;
    ElicitationFit fit = fit_trunc_gamma(one, main_weights(), 2.0, 2.5);
    CHECK(fit.summaries.mean == Catch::Approx(2.25).margin(1e-3));
}

TEST_CASE("synthetic generator is beaten or matched by the fit") {
    TruncGammaPrior truth(3.0, 0.8, 1.0, 4.0);
    TruncGammaSummaries s = trunc_gamma_summaries(truth);
    std::vector<ExpertSummary> experts(1);
    experts[0].mean = s.mean;
    experts[0].median = s.median;
    experts[0].sd = s.sd;
    experts[0].q025 = s.q025;
    experts[0].q975 = s.q975;
    ElicitationWeights w;  // all ones
    ElicitationFit fit = fit_trunc_gamma(experts, w, 1.0, 4.0);
    double truth_obj =
        elicitation_objective(3.0, 0.8, 1.0, 4.0, experts, w);
    CHECK(fit.objective <= truth_obj + 1e-9);
    CHECK(fit.objective < 1e-6);
}

TEST_CASE("fit is invariant to expert ordering") {
    auto experts = three_experts();
    auto reversed = experts;
    std::reverse(reversed.begin(), reversed.end());
    ElicitationFit a = fit_trunc_gamma(experts, main_weights(), 2.0, 2.5);
    ElicitationFit b = fit_trunc_gamma(reversed, main_weights(), 2.0, 2.5);
    CHECK(a.prior.shape == b.prior.shape);
    CHECK(a.prior.scale == b.prior.scale);
}

TEST_CASE("zero-weight statistics have no influence") {
    auto experts = three_experts();
    experts[0].sd = 0.2;  // weight for sd set to zero below
    ElicitationWeights w;
    w.w = {4.0, 4.0, 0.0, 1.0, 1.0};
    ElicitationFit a = fit_trunc_gamma(experts, w, 2.0, 2.5);
    experts[0].sd = 99.0;  // perturb the ignored statistic
    ElicitationFit b = fit_trunc_gamma(experts, w, 2.0, 2.5);
    CHECK(a.prior.shape == b.prior.shape);  // bit-for-bit
    CHECK(a.prior.scale == b.prior.scale);
    CHECK(a.objective == b.objective);
}

TEST_CASE("error paths") {
    ElicitationWeights w;
    CHECK_THROWS_AS(fit_trunc_gamma({}, w, 2.0, 2.5), std::invalid_argument);

    std::vector<ExpertSummary> no_stats(2);
    CHECK_THROWS_AS(fit_trunc_gamma(no_stats, w, 2.0, 2.5),
                    std::invalid_argument);

    std::vector<ExpertSummary> experts(1);
    experts[0].mean = 2.2;
    ElicitationWeights zero;
    zero.w = {0.0, 1.0, 1.0, 1.0, 1.0};  // the provided stat has no weight
    CHECK_THROWS_AS(fit_trunc_gamma(experts, zero, 2.0, 2.5),
                    std::invalid_argument);

    CHECK_THROWS_AS(fit_trunc_gamma(experts, w, 2.5, 2.0),
                    std::invalid_argument);
}
