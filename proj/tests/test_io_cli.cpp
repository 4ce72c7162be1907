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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dte/cli/commands.hpp"

using namespace dte;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("dte_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* design_toml = R"(# two-stage reference design
[design]
control_median = 2.8
treatment_median = 3.5
s_likely = 2.28
lower = 2.0
upper = 2.5
prior_shape = 12.86
prior_scale = 0.193
schedule = [28, 40]
lambda = 0.95
gamma = 1.0
accrual = "deterministic"
rate = 6.0
fup = 6.0

[run]
nsim = 400
seed = 7
)";

}  // namespace

TEST_CASE("toml parsing handles sections, arrays and comments") {
    std::stringstream in(R"(
# top comment
title = "demo"   # inline comment
[a]
x = 1
y = 2.5
flag = true
values = [1, 2, 3]
names = ["u", "v"]
[a.sub]
z = -4
)");
    auto j = io::parse_toml(in);
    CHECK(j.at("title") == "demo");
    CHECK(j.at("a").at("x") == 1);
    CHECK(j.at("a").at("y") == 2.5);
    CHECK(j.at("a").at("flag") == true);
    CHECK(j.at("a").at("values").size() == 3);
    CHECK(j.at("a").at("names")[1] == "v");
    CHECK(j.at("a").at("sub").at("z") == -4);
}

TEST_CASE("toml errors carry line numbers") {
    std::stringstream dup("x = 1\nx = 2\n");
    CHECK_THROWS_AS(io::parse_toml(dup), io::ConfigError);
    std::stringstream bad("x = @nonsense\n");
    CHECK_THROWS_AS(io::parse_toml(bad), io::ConfigError);
    std::stringstream noval("x =\n");
    CHECK_THROWS_AS(io::parse_toml(noval), io::ConfigError);
}

TEST_CASE("toml and json configs are interchangeable") {
    fs::path dir = temp_dir("cfg");
    write_file(dir / "a.toml", "[design]\nx = 1.5\nnames = [\"b\"]\n");
    write_file(dir / "a.json", R"({"design": {"x": 1.5, "names": ["b"]}})");
    auto a = io::load_config((dir / "a.toml").string());
    auto b = io::load_config((dir / "a.json").string());
    CHECK(a == b);
}

TEST_CASE("patient csv round trip and validation") {
    fs::path dir = temp_dir("csv");
    write_file(dir / "ok.csv",
               "arm,enroll_time,time,event\n0,0.5,2.0,1\n1,0.7,3.5,0\n");
    auto rows = io::read_patient_csv((dir / "ok.csv").string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].arm == 1);
    CHECK(rows[1].time == 3.5);
    auto [ctrl, treat] = io::snapshots_from_records(rows);
    CHECK(ctrl.size() == 1);
    CHECK(treat.size() == 1);
    CHECK(treat.event[0] == 0);

    write_file(dir / "bad_header.csv", "arm,start,time,event\n");
    CHECK_THROWS_AS(io::read_patient_csv((dir / "bad_header.csv").string()),
                    io::ConfigError);
    write_file(dir / "bad_row.csv",
               "arm,enroll_time,time,event\n2,0,1,1\n");
    CHECK_THROWS_AS(io::read_patient_csv((dir / "bad_row.csv").string()),
                    io::ConfigError);
}

TEST_CASE("design config parsing and defaults") {
    fs::path dir = temp_dir("design");
    write_file(dir / "d.toml", design_toml);
    auto root = io::load_config((dir / "d.toml").string());
    DesignSpec d = cli::design_from_config(root);
    CHECK(d.n_max() == 40);
    // defaults: a0 = 4, b0 = 3 * 2.8 / ln2
    CHECK(d.prior.a0 == 4.0);
    CHECK(d.prior.b0 == Catch::Approx(3.0 * 2.8 / ln2));
    CHECK(d.prior.b1 == Catch::Approx(2.0 * d.prior.b0));

    write_file(dir / "broken.toml", "[design]\ncontrol_median = 2.8\n");
    auto broken = io::load_config((dir / "broken.toml").string());
    CHECK_THROWS_AS(cli::design_from_config(broken), io::ConfigError);
}

TEST_CASE("oc command writes byte-identical results on rerun") {
    fs::path dir = temp_dir("occmd");
    write_file(dir / "cfg.toml",
               std::string(design_toml) + "\n[oc]\ns_values = [2.2]\n");
    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out1").string();
    REQUIRE(cli::cmd_oc(args) == 0);
    args.out_dir = (dir / "out2").string();
    REQUIRE(cli::cmd_oc(args) == 0);
    CHECK(slurp(dir / "out1" / "oc_result.json") ==
          slurp(dir / "out2" / "oc_result.json"));
    auto j = nlohmann::json::parse(slurp(dir / "out1" / "oc_result.json"));
    CHECK(j.at("rows").size() == 2);  // h0 and h1
}

TEST_CASE("conduct command reports a decision") {
    fs::path dir = temp_dir("conduct");
    write_file(dir / "cfg.toml", design_toml);

    // strong observed benefit: control events early, treatment mostly
    // censored late
    std::string csv = "arm,enroll_time,time,event\n";
    for (int i = 0; i < 28; ++i) {
        csv += "0,0.0," + std::to_string(1.0 + 0.05 * i) + ",1\n";
        csv += "1,0.0," + std::to_string(8.0 + 0.05 * i) + ",0\n";
    }
    write_file(dir / "data.csv", csv);

    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out").string();
    args.data_path = (dir / "data.csv").string();
    args.stage = 1;
    REQUIRE(cli::cmd_conduct(args) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "out" / "conduct_result.json"));
    CHECK(j.at("decision") == "continue");
    CHECK(j.at("prob_treatment_worse").get<double>() < 0.05);

    // final stage on the same data: the probability is near zero, reject
    args.stage = 2;
    REQUIRE(cli::cmd_conduct(args) == 0);
    auto j2 =
        nlohmann::json::parse(slurp(dir / "out" / "conduct_result.json"));
    CHECK(j2.at("decision") == "reject-null");

    // an arm with no patients is a usage error
    write_file(dir / "onearm.csv",
               "arm,enroll_time,time,event\n0,0,1.0,1\n");
    args.data_path = (dir / "onearm.csv").string();
    CHECK_THROWS_AS(cli::cmd_conduct(args), io::ConfigError);

    args.data_path = (dir / "data.csv").string();
    args.stage = 5;
    CHECK_THROWS_AS(cli::cmd_conduct(args), io::ConfigError);
}

TEST_CASE("elicit command fits the reference experts") {
    fs::path dir = temp_dir("elicit");
    write_file(dir / "experts.json", R"([
      {"mean": 2.2, "median": 2.27},
      {"mean": 2.1, "median": 2.30},
      {"mean": 2.3, "median": 2.31}
    ])");
    write_file(dir / "cfg.toml",
               "[design]\ncontrol_median=2.8\ntreatment_median=3.5\n"
               "s_likely=2.28\nlower=2.0\nupper=2.5\nschedule=[28,40]\n"
               "rate=6.0\nfup=6.0\n"
               "[elicit]\nexperts = \"" +
                   (dir / "experts.json").string() +
                   "\"\nweights = [4,4,2,1,1]\n");
    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out").string();
    REQUIRE(cli::cmd_elicit(args) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "out" / "prior.json"));
    CHECK(j.at("summaries").at("mean").get<double>() ==
          Catch::Approx(2.2521).margin(0.02));
    CHECK(fs::exists(dir / "out" / "prior_density.csv"));

    write_file(dir / "empty.json", "[]");
    write_file(dir / "cfg2.toml",
               "[elicit]\nlower = 2.0\nupper = 2.5\nexperts = \"" +
                   (dir / "empty.json").string() + "\"\n");
    args.config_path = (dir / "cfg2.toml").string();
    CHECK_THROWS_AS(cli::cmd_elicit(args), io::ConfigError);
}

TEST_CASE("infeasible calibration surfaces as the dedicated error") {
    fs::path dir = temp_dir("calib");
    write_file(dir / "cfg.toml",
               std::string(design_toml) +
                   "\n[calibrate]\nalpha = 0.001\n"
                   "lambda_grid = [0.80]\ngamma_grid = [0.25]\n");
    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out").string();
    CHECK_THROWS_AS(cli::cmd_calibrate(args), cli::InfeasibleError);
    // the diagnostic result is still written
    auto j = nlohmann::json::parse(
        slurp(dir / "out" / "calibrate_result.json"));
    CHECK(j.at("feasible") == false);
    CHECK(j.contains("closest_candidates"));
}

TEST_CASE("config overrides") {
    nlohmann::json root =
        nlohmann::json::parse(R"({"design": {"rate": 6.0}})");
    cli::apply_overrides(root, {"design.rate=3.0", "samplesize.alpha=0.05",
                                "samplesize.strategy=optimal",
                                "design.schedule=[10, 20]",
                                "run.nsim=500"});
    CHECK(root.at("design").at("rate") == 3.0);
    CHECK(root.at("samplesize").at("alpha") == 0.05);
    CHECK(root.at("samplesize").at("strategy") == "optimal");
    CHECK(root.at("design").at("schedule")[1] == 20);
    CHECK(root.at("run").at("nsim") == 500);

    // later overrides win
    cli::apply_overrides(root, {"design.rate=9.0"});
    CHECK(root.at("design").at("rate") == 9.0);

    CHECK_THROWS_AS(cli::apply_overrides(root, {"no_equals_sign"}),
                    io::ConfigError);
    CHECK_THROWS_AS(cli::apply_overrides(root, {"=5"}), io::ConfigError);
}

TEST_CASE("command-level overrides reach the engine") {
    fs::path dir = temp_dir("ovr");
    write_file(dir / "cfg.toml", design_toml);
    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out").string();
    args.overrides = {"oc.s_values=[2.2]", "oc.hypotheses=[\"h0\"]",
                      "run.nsim=200"};
    REQUIRE(cli::cmd_oc(args) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "out" / "oc_result.json"));
    REQUIRE(j.at("rows").size() == 1);
    CHECK(j.at("rows")[0].at("nsim") == 200);
}

TEST_CASE("missing config keys produce field-level messages") {
    fs::path dir = temp_dir("badcfg");
    write_file(dir / "cfg.toml", "[design]\ncontrol_median = 2.8\n");
    cli::CommonArgs args;
    args.config_path = (dir / "cfg.toml").string();
    args.out_dir = (dir / "out").string();
    try {
        cli::cmd_oc(args);
        FAIL("expected ConfigError");
    } catch (const io::ConfigError& e) {
        CHECK(std::string(e.what()).find("treatment_median") !=
              std::string::npos);
    }
}
