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
#include <CLI11.hpp>

#include "dte/cli/commands.hpp"
#include "dte/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Simulation and calibration engine for two-arm survival trials "
        "with delayed treatment effects"};
    app.set_version_flag("--version", dte::version);
    app.require_subcommand(1);

    dte::cli::CommonArgs args;
    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("-c,--config", args.config_path,
                                    "config file (.toml or .json)");
        if (needs_config) opt->required();
        cmd->add_option("-o,--out", args.out_dir, "output directory");
        cmd->add_option("--seed", args.seed, "override master seed");
        cmd->add_option("--nsim", args.nsim, "override simulation count");
        cmd->add_option("--workers", args.workers,
                        "worker threads (0 = auto / DTEDESIGN_WORKERS)");
        cmd->add_option("--set", args.overrides,
                        "override a config key, section.key=value "
                        "(repeatable; later flags win)");
    };
    // dedicated flags routed through the same override mechanism
    auto mirror = [&](CLI::App* cmd, const char* flag, const char* key,
                      const char* help) {
        cmd->add_option_function<std::string>(
               flag,
               [&args, key](const std::string& v) {
                   args.overrides.push_back(std::string(key) + "=" + v);
               },
               help)
            ->type_name("VALUE");
    };

    auto* elicit = app.add_subcommand(
        "elicit", "fit the separation-time prior from expert summaries");
    add_common(elicit);
    auto* samplesize = app.add_subcommand(
        "samplesize", "two-stage sample-size determination");
    add_common(samplesize);
    mirror(samplesize, "--control-median", "design.control_median",
           "overall null median (months)");
    mirror(samplesize, "--treatment-median", "design.treatment_median",
           "overall alternative median (months)");
    mirror(samplesize, "--s-likely", "design.s_likely",
           "best-guess separation time");
    mirror(samplesize, "--lower", "design.lower", "separation lower bound");
    mirror(samplesize, "--upper", "design.upper", "separation upper bound");
    mirror(samplesize, "--prior-shape", "design.prior_shape",
           "separation-prior shape");
    mirror(samplesize, "--prior-scale", "design.prior_scale",
           "separation-prior scale");
    mirror(samplesize, "--rate", "design.rate", "accrual rate per arm");
    mirror(samplesize, "--fup", "design.fup", "follow-up months");
    mirror(samplesize, "--accrual", "design.accrual",
           "\"deterministic\" or \"poisson\"");
    mirror(samplesize, "--alpha", "samplesize.alpha", "type I error target");
    mirror(samplesize, "--beta", "samplesize.beta", "type II error target");
    mirror(samplesize, "--weight", "samplesize.weight",
           "expected-sample-size trade-off weight");
    mirror(samplesize, "--strategy", "samplesize.strategy",
           "\"optimal\" or \"pragmatic\"");
    mirror(samplesize, "--earlystop-prob", "samplesize.earlystop_prob",
           "lower bound on null early stopping");
    mirror(samplesize, "--refine-interim", "samplesize.refine_interim",
           "true/false: move the interim off the 70% provisional");
    mirror(samplesize, "--increment", "samplesize.increment",
           "escalation step for the total size");
    mirror(samplesize, "--ceiling", "samplesize.ceiling",
           "per-arm ceiling");
    auto* calibrate = app.add_subcommand(
        "calibrate", "grid-search the futility boundary");
    add_common(calibrate);
    mirror(calibrate, "--alpha", "calibrate.alpha", "type I error level");
    mirror(calibrate, "--mode", "calibrate.mode",
           "\"average\" or \"boundary-control\"");
    auto* oc = app.add_subcommand(
        "oc", "operating characteristics at fixed separation times");
    add_common(oc);
    auto* curve = app.add_subcommand(
        "curve", "type I error and power as functions of the separation time");
    add_common(curve);
    auto* trend = app.add_subcommand(
        "trend", "posterior-probability quantile trend analysis");
    add_common(trend);
    auto* compare = app.add_subcommand(
        "compare", "power and sample-size comparison against log-rank tests");
    add_common(compare);
    auto* conduct = app.add_subcommand(
        "conduct", "interim or final analysis of a patient dataset");
    add_common(conduct);
    conduct->add_option("--data", args.data_path, "patient CSV file")
        ->required();
    conduct->add_option("--stage", args.stage, "1-based analysis stage")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (elicit->parsed()) return dte::cli::cmd_elicit(args);
        if (samplesize->parsed()) return dte::cli::cmd_samplesize(args);
        if (calibrate->parsed()) return dte::cli::cmd_calibrate(args);
        if (oc->parsed()) return dte::cli::cmd_oc(args);
        if (curve->parsed()) return dte::cli::cmd_curve(args);
        if (trend->parsed()) return dte::cli::cmd_trend(args);
        if (compare->parsed()) return dte::cli::cmd_compare(args);
        if (conduct->parsed()) return dte::cli::cmd_conduct(args);
    } catch (const dte::io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const dte::cli::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
