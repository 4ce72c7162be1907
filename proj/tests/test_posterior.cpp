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

#include "dte/posterior.hpp"
#include "oracles.hpp"

using namespace dte;

namespace {
PriorSpec main_prior() {
    return PriorSpec(4.0, 12.12, 4.0, 24.24,
                     TruncGammaPrior(12.86, 0.193, 2.0, 2.5));
}
}  // namespace

TEST_CASE("total time on test") {
    ArmSnapshot arm;
    arm.add(1.0, true);
    arm.add(3.0, true);
    arm.add(5.0, false);

    CHECK(ttot(arm, 2.0, 2.0) == 0.0);
    CHECK(ttot(arm, 2.0, 4.0) == Catch::Approx(3.0));  // 0 + 1 + 2
    CHECK_THROWS_AS(ttot(arm, 3.0, 2.0), std::invalid_argument);

    RngStream rng = RngStream::from_key(31, {0});
    for (int rep = 0; rep < 100; ++rep) {
        ArmSnapshot a;
        for (int i = 0; i < 20; ++i) a.add(rng.exponential(4.0), true);
        double s = rng.uniform(0.0, 8.0);
        double tau = rng.uniform(s, 20.0);
        CHECK(ttot(a, 0.0, s) + ttot(a, s, tau) ==
              Catch::Approx(ttot(a, 0.0, tau)).margin(1e-12));
    }
}

TEST_CASE("sufficient statistics hand cases") {
    ArmSnapshot ctrl;
    ctrl.add(2.0, true);
    ctrl.add(3.0, false);

    ArmSnapshot treat;
    treat.add(1.0, true);
    treat.add(2.5, true);
    treat.add(4.0, true);

    SufficientStats st = sufficient_stats(ctrl, treat, 2.0);
    CHECK(st.d01 == 1.0);
    CHECK(st.d11 == 2.0);
    CHECK(st.ttot_01 == Catch::Approx(5.0));  // 1 + 2 + 2
    CHECK(st.ttot_12 == Catch::Approx(2.5));  // 0 + 0.5 + 2
    CHECK(st.tau == 4.0);
    CHECK(st.d0 == 1.0);
    CHECK(st.sum_z0 == Catch::Approx(5.0));

    // censoring flips event counts but not the follow-up sums
    ArmSnapshot treat2;
    treat2.add(1.0, true);
    treat2.add(2.5, false);
    treat2.add(4.0, true);
    SufficientStats st2 = sufficient_stats(ctrl, treat2, 2.0);
    CHECK(st2.d01 == 1.0);
    CHECK(st2.d11 == 1.0);
    CHECK(st2.ttot_01 == Catch::Approx(st.ttot_01));
    CHECK(st2.ttot_12 == Catch::Approx(st.ttot_12));

    // all treatment events before the separation time
    SufficientStats st3 = sufficient_stats(ctrl, treat, 10.0);
    CHECK(st3.d11 == 0.0);
    CHECK(st3.ttot_12 == 0.0);

    ArmSnapshot empty;
    CHECK_THROWS_AS(sufficient_stats(empty, treat, 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sufficient_stats(ctrl, empty, 2.0),
                    std::invalid_argument);
}

TEST_CASE("posterior parameter updates") {
    PriorSpec prior = main_prior();

    // no data: the posterior is the prior
    ArmSnapshot c, t;
    c.add(0.0, false);
    t.add(0.0, false);
    auto p0 = posterior_params(sufficient_stats(c, t, 2.0), prior);
    CHECK(p0.mu0_mean.shape == Catch::Approx(4.0));
    CHECK(p0.mu0_mean.scale == Catch::Approx(12.12));
    CHECK(p0.mu1_mean.shape == Catch::Approx(4.0));
    CHECK(p0.mu1_mean.scale == Catch::Approx(24.24));

    SufficientStats st{5.0, 2.0, 3.0, 12.0, 4.0, 9.0, 0.0};
    auto p = posterior_params(st, prior);
    CHECK(p.mu0_mean.shape == Catch::Approx(11.0));
    CHECK(p.mu0_mean.scale == Catch::Approx(28.12));
    CHECK(p.mu1_mean.shape == Catch::Approx(7.0));
    CHECK(p.mu1_mean.scale == Catch::Approx(33.24));
    CHECK(p.mu0_median.scale == Catch::Approx(ln2 * 28.12));
    CHECK(p.mu1_median.scale == Catch::Approx(ln2 * 33.24));
}

TEST_CASE("comparison probability trivial case") {
    PriorSpec prior(1.0, 1.0, 1.0, 1.0, TruncGammaPrior(1, 1, 2, 2.5));
    SufficientStats st{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    CHECK(prob_treatment_worse(st, prior) ==
          Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("comparison probability matches the Monte Carlo double integral") {
    PriorSpec prior = main_prior();
    RngStream rng = RngStream::from_key(32, {0});
    double max_err = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
        int n = 3 + static_cast<int>(rng.next_u64() % 8);
        ArmSnapshot c, t;
        for (int i = 0; i < n; ++i) {
            c.add(rng.exponential(4.0), rng.uniform() < 0.8);
            t.add(rng.exponential(6.0), rng.uniform() < 0.8);
        }
        SufficientStats st = sufficient_stats(c, t, rng.uniform(0.5, 3.0));
        double closed = prob_treatment_worse(st, prior);
        double mc = oracles::mc_prob_treatment_worse(st, prior, 300000, rng);
        max_err = std::max(max_err, std::abs(closed - mc));
    }
    CHECK(max_err < 0.005);
}

TEST_CASE("comparison probability direction under strong benefit") {
    PriorSpec prior = main_prior();
    ArmSnapshot c, t;
    RngStream rng = RngStream::from_key(33, {0});
    for (int i = 0; i < 28; ++i) {
        c.add(rng.exponential(2.8 / ln2), true);
        t.add(2.28 + rng.exponential(30.0), rng.uniform() < 0.7);
    }
    SufficientStats st = sufficient_stats(c, t, 2.28);
    CHECK(st.ttot_12 > st.ttot_01);
    CHECK(prob_treatment_worse(st, prior) < 0.05);
}

TEST_CASE("posterior concentrates with growing data") {
    PriorSpec prior = main_prior();
    for (double ratio : {2.0, 0.5}) {
        ArmSnapshot c, t;
        RngStream rng = RngStream::from_key(34, {ratio > 1.0 ? 1u : 2u});
        for (int i = 0; i < 4000; ++i) {
            c.add(rng.exponential(4.0), true);
            t.add(rng.exponential(4.0 * ratio), true);
        }
        // separation at zero: the whole treatment arm informs mu1
        double p = prob_treatment_worse(sufficient_stats(c, t, 0.0), prior);
        if (ratio > 1.0) {
            CHECK(p < 1e-6);
        } else {
            CHECK(p > 1.0 - 1e-6);
        }
    }
}

TEST_CASE("conditional posteriors are independent") {
    PriorSpec prior = main_prior();
    ArmSnapshot c, t;
    RngStream rng = RngStream::from_key(35, {0});
    for (int i = 0; i < 10; ++i) {
        c.add(rng.exponential(4.0), true);
        t.add(rng.exponential(6.0), rng.uniform() < 0.8);
    }
    auto post = posterior_params(sufficient_stats(c, t, 2.0), prior);
    double c0 = post.mu0_mean.scale / (post.mu0_mean.shape - 1.0);
    double c1 = post.mu1_mean.scale / (post.mu1_mean.shape - 1.0);
    const int n = 400000;
    int both = 0, only0 = 0, only1 = 0;
    for (int k = 0; k < n; ++k) {
        double mu0 = post.mu0_mean.scale / rng.gamma(post.mu0_mean.shape);
        double mu1 = post.mu1_mean.scale / rng.gamma(post.mu1_mean.shape);
        bool a = mu0 < c0, b = mu1 < c1;
        both += a && b;
        only0 += a;
        only1 += b;
    }
    double pj = static_cast<double>(both) / n;
    double pa = static_cast<double>(only0) / n;
    double pb = static_cast<double>(only1) / n;
    CHECK(pj == Catch::Approx(pa * pb).margin(0.004));
}

TEST_CASE("threshold is invariant to a common power-of-two rescale") {
    // with b0 = 3 mu0 and b1 = 6 mu0, rescaling data and priors together
    // reproduces the comparison probability bit for bit
    double mu0 = 2.8 / ln2;
    PriorSpec prior(4.0, 3.0 * mu0, 4.0, 6.0 * mu0,
                    TruncGammaPrior(1, 1, 2, 2.5));
    PriorSpec scaled(4.0, 2.0 * (3.0 * mu0), 4.0, 2.0 * (6.0 * mu0),
                     TruncGammaPrior(1, 1, 2, 2.5));
    RngStream rng = RngStream::from_key(36, {0});
    for (int rep = 0; rep < 50; ++rep) {
        ArmSnapshot c, t, c2, t2;
        int n = 5 + static_cast<int>(rng.next_u64() % 10);
        for (int i = 0; i < n; ++i) {
            double zc = rng.exponential(4.0), zt = rng.exponential(6.0);
            bool ec = rng.uniform() < 0.8, et = rng.uniform() < 0.8;
            c.add(zc, ec);
            t.add(zt, et);
            c2.add(2.0 * zc, ec);
            t2.add(2.0 * zt, et);
        }
        double s = rng.uniform(0.5, 3.0);
        double p1 = prob_treatment_worse(sufficient_stats(c, t, s), prior);
        double p2 = prob_treatment_worse(sufficient_stats(c2, t2, 2.0 * s),
                                         scaled);
        CHECK(p1 == p2);  // bit-exact
    }
}

TEST_CASE("futility boundary") {
    Boundary b(0.95, 1.0);
    CHECK(b.threshold(40, 40) == Catch::Approx(0.05));
    CHECK(futility_stop(0.06, b, 40, 40));
    CHECK_FALSE(futility_stop(0.05, b, 40, 40));  // ties continue

    Boundary never(0.0, 1.0);
    CHECK(never.threshold(10, 40) == 1.0);
    CHECK_FALSE(futility_stop(0.9999, never, 10, 40));

    // threshold non-increasing across the schedule
    Boundary c(0.9, 1.7);
    double prev = 2.0;
    for (int n_r : {10, 20, 30, 40}) {
        double thr = c.threshold(n_r, 40);
        CHECK(thr <= prev);
        prev = thr;
    }
    CHECK_THROWS_AS(b.threshold(0, 40), std::invalid_argument);
    CHECK_THROWS_AS(Boundary(1.2, 1.0), std::invalid_argument);
}
