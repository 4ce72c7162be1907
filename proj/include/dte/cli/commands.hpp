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

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dte/calibration.hpp"
#include "dte/elicitation.hpp"
#include "dte/freq.hpp"
#include "dte/io/csv.hpp"
#include "dte/io/table.hpp"
#include "dte/io/toml.hpp"
#include "dte/samplesize.hpp"
#include "dte/trend.hpp"
#include "dte/version.hpp"

// Subcommand implementations. Each reads a config (TOML or JSON), runs the
// corresponding workflow, and writes machine-readable JSON plus a human
// table, together with a run manifest for reproducibility. Exit codes:
// 0 success, 1 runtime failure, 2 usage/config error, 3 infeasibility.

namespace dte::cli {

using nlohmann::json;

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> nsim;
    int workers = 0;
    // "section.key=value" assignments applied over the loaded config, in
    // order, so later flags win
    std::vector<std::string> overrides;
    // conduct only
    std::string data_path;
    int stage = 1;
};

/// Apply `section.key=value` overrides onto a loaded config tree. Values
/// use the TOML value syntax (strings quoted, arrays bracketed).
inline void apply_overrides(json& root,
                            const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        std::size_t eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw io::ConfigError("override must be section.key=value: " +
                                  ov);
        }
        json value;
        try {
            value = io::detail::parse_toml_value(ov.substr(eq + 1), 0);
        } catch (const io::ConfigError&) {
            // unquoted word: take it as a string ("--strategy optimal")
            value = io::detail::trim(ov.substr(eq + 1));
        }
        json* cur = &root;
        std::stringstream ss(ov.substr(0, eq));
        std::string part, prev;
        bool first = true;
        while (std::getline(ss, part, '.')) {
            part = io::detail::trim(part);
            if (part.empty()) {
                throw io::ConfigError("override has an empty path part: " +
                                      ov);
            }
            if (!first) cur = &(*cur)[prev];
            prev = part;
            first = false;
        }
        (*cur)[prev] = value;
    }
}

inline json load_config_with_overrides(const CommonArgs& args) {
    json tree = io::load_config(args.config_path);
    apply_overrides(tree, args.overrides);
    return tree;
}

// ---------------------------------------------------------------- config

inline const json& section(const json& root, const std::string& name) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    if (!root.at(name).is_object()) {
        throw io::ConfigError("config section [" + name +
                              "] must be a table");
    }
    return root.at(name);
}

template <class T>
T require(const json& sec, const std::string& key, const std::string& where) {
    if (!sec.contains(key)) {
        throw io::ConfigError("missing config key '" + key + "' in [" +
                              where + "]");
    }
    try {
        return sec.at(key).get<T>();
    } catch (const json::exception&) {
        throw io::ConfigError("config key '" + key + "' in [" + where +
                              "] has the wrong type");
    }
}

template <class T>
T get_or(const json& sec, const std::string& key, T fallback) {
    if (!sec.contains(key)) return fallback;
    try {
        return sec.at(key).get<T>();
    } catch (const json::exception&) {
        throw io::ConfigError("config key '" + key + "' has the wrong type");
    }
}

inline DesignSpec design_from_config(const json& root) {
    const json& d = section(root, "design");
    if (d.empty()) throw io::ConfigError("config needs a [design] section");
    double control = require<double>(d, "control_median", "design");
    double treatment = require<double>(d, "treatment_median", "design");
    double lower = require<double>(d, "lower", "design");
    double upper = require<double>(d, "upper", "design");
    double s_likely = require<double>(d, "s_likely", "design");
    double shape = get_or(d, "prior_shape", 1.0);
    double scale = get_or(d, "prior_scale", 1.0);
    TruncGammaPrior s_prior(shape, scale, lower, upper);

    PriorSpec prior = PriorSpec::defaults(control, s_prior);
    if (d.contains("a0") || d.contains("b0") || d.contains("a1") ||
        d.contains("b1")) {
        prior = PriorSpec(require<double>(d, "a0", "design"),
                          require<double>(d, "b0", "design"),
                          require<double>(d, "a1", "design"),
                          require<double>(d, "b1", "design"), s_prior);
    }

    std::vector<int> schedule =
        require<std::vector<int>>(d, "schedule", "design");
    Boundary boundary(get_or(d, "lambda", 0.95), get_or(d, "gamma", 1.0));

    std::string accrual_kind = get_or<std::string>(d, "accrual",
                                                   "deterministic");
    AccrualModel accrual;
    if (accrual_kind == "deterministic") {
        accrual.kind = AccrualKind::deterministic;
    } else if (accrual_kind == "poisson") {
        accrual.kind = AccrualKind::poisson;
    } else {
        throw io::ConfigError(
            "design.accrual must be 'deterministic' or 'poisson'");
    }
    accrual.rate = require<double>(d, "rate", "design");

    DesignSpec spec{control,  treatment, s_likely, prior,
                    schedule, boundary,  accrual,  require<double>(d, "fup",
                                                                   "design")};
    spec.validate();
    return spec;
}

struct RunSettings {
    int nsim;
    std::uint64_t seed;
    int workers;
};

inline RunSettings run_settings(const json& root, const CommonArgs& args,
                                int default_nsim = 10000) {
    const json& r = section(root, "run");
    RunSettings s{};
    s.nsim = args.nsim.value_or(get_or(r, "nsim", default_nsim));
    s.seed = args.seed.value_or(
        static_cast<std::uint64_t>(get_or<long long>(r, "seed", 2026)));
    s.workers = args.workers > 0 ? args.workers
                                 : get_or(r, "workers", 0);
    if (s.nsim < 1) throw io::ConfigError("nsim must be >= 1");
    return s;
}

// ---------------------------------------------------------------- output

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

/// Manifest serialized alongside every output. The wall clock is for audit;
/// result files themselves are byte-identical across reruns of the same
/// manifest.
inline json make_manifest(const std::string& command, const json& config,
                          const RunSettings& s) {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return json{{"command", command},
                {"tool_version", version},
                {"master_seed", s.seed},
                {"nsim", s.nsim},
                {"workers", resolve_workers(s.workers)},
                {"wall_clock_utc", buf},
                {"config", config}};
}

inline std::filesystem::path out_path(const CommonArgs& args,
                                      const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    return std::filesystem::path(args.out_dir) / name;
}

// ---------------------------------------------------------------- json maps

inline json to_json(const OCResult& r) {
    return json{{"prn", r.prn},           {"pet", r.pet},
                {"avg_n", r.avg_n},       {"avg_duration", r.avg_duration},
                {"se_prn", r.se_prn},     {"se_pet", r.se_pet},
                {"se_n", r.se_n},         {"se_duration", r.se_duration},
                {"nsim", r.nsim}};
}

inline json to_json(const Boundary& b) {
    return json{{"lambda", b.lambda}, {"gamma", b.gamma}};
}

// ---------------------------------------------------------------- elicit

inline int cmd_elicit(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    const json& e = section(root, "elicit");
    if (e.empty()) throw io::ConfigError("config needs an [elicit] section");

    double lower, upper;
    if (root.contains("design")) {
        const json& d = section(root, "design");
        lower = require<double>(d, "lower", "design");
        upper = require<double>(d, "upper", "design");
    } else {
        lower = require<double>(e, "lower", "elicit");
        upper = require<double>(e, "upper", "elicit");
    }

    std::filesystem::path experts_path =
        require<std::string>(e, "experts", "elicit");
    if (experts_path.is_relative()) {
        // relative to the config file, so configs are self-contained
        experts_path = std::filesystem::path(args.config_path).parent_path() /
                       experts_path;
    }
    std::ifstream in(experts_path);
    if (!in) {
        throw io::ConfigError("cannot open experts file: " +
                              experts_path.string());
    }
    json experts_json;
    try {
        experts_json = json::parse(in);
    } catch (const json::parse_error& err) {
        throw io::ConfigError(std::string("experts file: ") + err.what());
    }
    if (!experts_json.is_array() || experts_json.empty()) {
        throw io::ConfigError(
            "experts file must be a non-empty JSON array of objects");
    }

    std::vector<ExpertSummary> experts;
    int idx = 0;
    for (const auto& row : experts_json) {
        ++idx;
        if (!row.is_object()) {
            throw io::ConfigError("expert " + std::to_string(idx) +
                                  " is not an object");
        }
        ExpertSummary s;
        auto grab = [&](const char* key) -> std::optional<double> {
            if (!row.contains(key) || row.at(key).is_null()) {
                return std::nullopt;
            }
            if (!row.at(key).is_number()) {
                throw io::ConfigError("expert " + std::to_string(idx) +
                                      " field '" + key + "' is not numeric");
            }
            return row.at(key).get<double>();
        };
        s.mean = grab("mean");
        s.median = grab("median");
        s.sd = grab("sd");
        s.q025 = grab("q025");
        s.q975 = grab("q975");
        if (!s.any()) {
            throw io::ConfigError("expert " + std::to_string(idx) +
                                  " provides no statistic");
        }
        experts.push_back(s);
    }

    ElicitationWeights weights;
    auto wvec = get_or(e, "weights", std::vector<double>{1, 1, 1, 1, 1});
    if (wvec.size() != 5) {
        throw io::ConfigError("elicit.weights must have 5 entries");
    }
    for (int i = 0; i < 5; ++i) weights.w[i] = wvec[i];

    ElicitationFit fit = fit_trunc_gamma(experts, weights, lower, upper);

    json result{{"shape", fit.prior.shape},
                {"scale", fit.prior.scale},
                {"lower", lower},
                {"upper", upper},
                {"objective", fit.objective},
                {"weakly_identified", fit.weakly_identified},
                {"summaries",
                 {{"mean", fit.summaries.mean},
                  {"median", fit.summaries.median},
                  {"sd", fit.summaries.sd},
                  {"q025", fit.summaries.q025},
                  {"q975", fit.summaries.q975}}}};
    write_json_file(out_path(args, "prior.json"), result);

    int points = get_or(e, "density_points", 200);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i <= points; ++i) {
        double s = lower + (upper - lower) * i / points;
        rows.push_back({io::fmt(s, 6), io::fmt(fit.prior.pdf(s), 8)});
    }
    io::write_csv(out_path(args, "prior_density.csv"), {"s", "density"},
                  rows);

    RunSettings rs{0, 0, args.workers};
    write_json_file(out_path(args, "elicit_manifest.json"),
                    make_manifest("elicit", root, rs));
    std::cout << "fitted truncated-Gamma prior: shape " << fit.prior.shape
              << ", scale " << fit.prior.scale
              << (fit.weakly_identified ? " (weakly identified)" : "")
              << "\n";
    return 0;
}

// ---------------------------------------------------------------- oc

inline int cmd_oc(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    DesignSpec design = design_from_config(root);
    RunSettings rs = run_settings(root, args);
    const json& o = section(root, "oc");
    if (o.empty()) throw io::ConfigError("config needs an [oc] section");

    auto s_values = require<std::vector<double>>(o, "s_values", "oc");
    auto hyp_names = get_or(o, "hypotheses",
                            std::vector<std::string>{"h0", "h1"});

    json result = json::array();
    std::vector<std::vector<std::string>> table;
    for (const auto& hname : hyp_names) {
        Hypothesis hyp;
        if (hname == "h0") {
            hyp = Hypothesis::h0;
        } else if (hname == "h1") {
            hyp = Hypothesis::h1;
        } else {
            throw io::ConfigError("oc.hypotheses entries must be h0 or h1");
        }
        for (double s : s_values) {
            OCResult r = estimate_oc(design, {hyp, s}, rs.nsim, rs.seed,
                                     rs.workers);
            json row = to_json(r);
            row["hypothesis"] = hname;
            row["s_true"] = s;
            result.push_back(row);
            table.push_back({hname, io::fmt(s, 2), io::fmt(r.prn),
                             io::fmt(r.pet), io::fmt(r.avg_n, 2),
                             io::fmt(r.avg_duration, 2)});
        }
    }

    json out{{"design_schedule", design.schedule},
             {"boundary", to_json(design.boundary)},
             {"rows", result}};

    if (root.contains("events")) {
        const json& ev = section(root, "events");
        PiecewiseTruth truth{
            require<double>(ev, "post_control_median", "events"),
            require<double>(ev, "post_treatment_median", "events"),
            require<double>(ev, "s_change", "events")};
        int ev_nsim = get_or(ev, "nsim", 1000);
        auto counts = expected_events(design, truth, ev_nsim, rs.seed,
                                      rs.workers);
        out["expected_events"] = counts;
    }

    write_json_file(out_path(args, "oc_result.json"), out);
    write_text_file(out_path(args, "oc_table.txt"),
                    io::format_table({"hypothesis", "s_true", "prn", "pet",
                                      "avg_n", "avg_duration"},
                                     table));
    write_json_file(out_path(args, "oc_manifest.json"),
                    make_manifest("oc", root, rs));
    std::cout << io::format_table({"hypothesis", "s_true", "prn", "pet",
                                   "avg_n", "avg_duration"},
                                  table);
    return 0;
}

// ---------------------------------------------------------------- calibrate

inline std::vector<Boundary> grid_from_config(const json& c) {
    auto lambdas = get_or(c, "lambda_grid", std::vector<double>{});
    auto gammas = get_or(c, "gamma_grid", std::vector<double>{});
    if (lambdas.empty() != gammas.empty()) {
        throw io::ConfigError(
            "calibrate: provide both lambda_grid and gamma_grid or neither");
    }
    if (lambdas.empty()) return default_boundary_grid();
    std::vector<Boundary> grid;
    for (double l : lambdas) {
        for (double g : gammas) grid.emplace_back(l, g);
    }
    return grid;
}

inline json grid_to_json(const std::vector<GridCandidate>& grid,
                         bool boundary_control) {
    json rows = json::array();
    for (const auto& c : grid) {
        json row{{"lambda", c.boundary.lambda},
                 {"gamma", c.boundary.gamma},
                 {"avg_type1", c.avg_type1},
                 {"avg_power", c.avg_power},
                 {"feasible", c.feasible}};
        if (boundary_control) {
            row["type1_at_lower"] = c.type1_at_lower;
            row["type1_at_upper"] = c.type1_at_upper;
        }
        rows.push_back(row);
    }
    return rows;
}

inline int cmd_calibrate(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    DesignSpec design = design_from_config(root);
    RunSettings rs = run_settings(root, args);
    const json& c = section(root, "calibrate");
    double alpha = require<double>(c, "alpha", "calibrate");
    std::string mode_name = get_or<std::string>(c, "mode", "average");
    CalibrationMode mode;
    if (mode_name == "average") {
        mode = CalibrationMode::average_only;
    } else if (mode_name == "boundary-control") {
        mode = CalibrationMode::boundary_control;
    } else {
        throw io::ConfigError(
            "calibrate.mode must be 'average' or 'boundary-control'");
    }

    auto grid = grid_from_config(c);
    CalibrationReport rep = calibrate(design, alpha, grid, mode, rs.nsim,
                                      rs.seed, rs.workers);

    bool bc = mode == CalibrationMode::boundary_control;
    json out{{"feasible", rep.feasible}, {"alpha", alpha},
             {"mode", mode_name},        {"grid", grid_to_json(rep.grid, bc)}};

    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& cand : rep.grid) {
        csv_rows.push_back({io::fmt(cand.boundary.lambda, 2),
                            io::fmt(cand.boundary.gamma, 2),
                            io::fmt(cand.avg_type1), io::fmt(cand.avg_power),
                            cand.feasible ? "1" : "0"});
    }
    io::write_csv(out_path(args, "calibrate_grid.csv"),
                  {"lambda", "gamma", "avg_type1", "avg_power", "feasible"},
                  csv_rows);

    if (!rep.feasible) {
        // closest candidates by type-I excess, for the diagnostic
        auto sorted = rep.grid;
        std::sort(sorted.begin(), sorted.end(),
                  [&](const GridCandidate& a, const GridCandidate& b) {
                      return a.avg_type1 < b.avg_type1;
                  });
        json closest = json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(5, sorted.size());
             ++i) {
            closest.push_back(grid_to_json({sorted[i]}, bc)[0]);
        }
        out["closest_candidates"] = closest;
        write_json_file(out_path(args, "calibrate_result.json"), out);
        write_json_file(out_path(args, "calibrate_manifest.json"),
                        make_manifest("calibrate", root, rs));
        throw InfeasibleError(
            "no boundary on the grid controls the average type I error at " +
            std::to_string(alpha));
    }

    out["chosen"] = to_json(rep.chosen);
    out["avg_type1"] = rep.avg_type1;
    out["avg_power"] = rep.avg_power;
    out["se_type1"] = rep.se_type1;
    out["se_power"] = rep.se_power;
    if (rep.endpoint_type1) {
        out["type1_at_lower"] = rep.endpoint_type1->first;
        out["type1_at_upper"] = rep.endpoint_type1->second;
    }
    write_json_file(out_path(args, "calibrate_result.json"), out);
    write_json_file(out_path(args, "calibrate_manifest.json"),
                    make_manifest("calibrate", root, rs));
    std::cout << "chosen boundary: lambda " << rep.chosen.lambda << ", gamma "
              << rep.chosen.gamma << " (avg type1 " << rep.avg_type1
              << ", avg power " << rep.avg_power << ")\n";
    return 0;
}

// ---------------------------------------------------------------- curve

inline int cmd_curve(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    DesignSpec design = design_from_config(root);
    RunSettings rs = run_settings(root, args);
    const json& c = section(root, "curve");
    auto s_values = require<std::vector<double>>(c, "s_values", "curve");

    auto curve = error_power_curve(design, design.boundary, s_values, rs.nsim,
                                   rs.seed, rs.workers);
    std::vector<std::vector<std::string>> rows;
    json jrows = json::array();
    for (const auto& p : curve) {
        rows.push_back({io::fmt(p.s, 4), io::fmt(p.type1), io::fmt(p.power)});
        jrows.push_back(json{{"s", p.s}, {"type1", p.type1},
                             {"power", p.power}});
    }
    io::write_csv(out_path(args, "curve.csv"), {"s", "type1", "power"}, rows);
    write_json_file(out_path(args, "curve_result.json"),
                    json{{"rows", jrows}});
    write_json_file(out_path(args, "curve_manifest.json"),
                    make_manifest("curve", root, rs));
    return 0;
}

// ---------------------------------------------------------------- samplesize

inline int cmd_samplesize(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    const json& d = section(root, "design");
    const json& ss = section(root, "samplesize");
    RunSettings rs = run_settings(root, args);

    SampleSizeRequest req;
    req.control_median = require<double>(d, "control_median", "design");
    req.treatment_median = require<double>(d, "treatment_median", "design");
    req.lower = require<double>(d, "lower", "design");
    req.upper = require<double>(d, "upper", "design");
    req.s_likely = require<double>(d, "s_likely", "design");
    req.trunc_shape = get_or(d, "prior_shape", 1.0);
    req.trunc_scale = get_or(d, "prior_scale", 1.0);
    req.fup = require<double>(d, "fup", "design");
    req.rate = require<double>(d, "rate", "design");
    req.accrual = get_or<std::string>(d, "accrual", "deterministic") ==
                          "poisson"
                      ? AccrualKind::poisson
                      : AccrualKind::deterministic;
    req.alpha = require<double>(ss, "alpha", "samplesize");
    req.beta = require<double>(ss, "beta", "samplesize");
    req.weight = get_or(ss, "weight", 0.5);
    if (ss.contains("earlystop_prob") && !ss.at("earlystop_prob").is_null()) {
        req.earlystop_prob = ss.at("earlystop_prob").get<double>();
    }
    std::string strategy = get_or<std::string>(ss, "strategy", "pragmatic");
    if (strategy == "optimal") {
        req.strategy = SizingStrategy::optimal;
    } else if (strategy == "pragmatic") {
        req.strategy = SizingStrategy::pragmatic;
    } else {
        throw io::ConfigError(
            "samplesize.strategy must be 'optimal' or 'pragmatic'");
    }
    req.refine_interim = get_or(ss, "refine_interim", false);
    req.increment = get_or(ss, "increment", 5);
    req.nmax_ceiling = get_or(ss, "ceiling", 500);
    req.nsim = rs.nsim;
    req.seed = rs.seed;
    if (d.contains("a0")) {
        req.prior = PriorSpec(
            require<double>(d, "a0", "design"),
            require<double>(d, "b0", "design"),
            require<double>(d, "a1", "design"),
            require<double>(d, "b1", "design"),
            TruncGammaPrior(req.trunc_shape, req.trunc_scale, req.lower,
                            req.upper));
    }

    SampleSizeResult res = two_stage_sample_size(req, rs.workers);

    json trace = json::array();
    for (const auto& it : res.trace) {
        trace.push_back(json{{"n1", it.n1},
                             {"n", it.n},
                             {"boundary", to_json(it.boundary)},
                             {"avg_power", it.avg_power},
                             {"power_at_upper", it.power_at_upper},
                             {"ps_h0", it.ps_h0}});
    }
    json out{{"converged", res.converged},
             {"n1", res.n1},
             {"n", res.n},
             {"boundary", to_json(res.boundary)},
             {"avg_type1", res.avg_type1},
             {"avg_power", res.avg_power},
             {"power_at_upper", res.power_at_upper},
             {"ps_h0", res.ps_h0},
             {"ps_h1", res.ps_h1},
             {"en", res.en},
             {"initial_events", res.initial_events},
             {"event_probability", res.event_probability},
             {"trace", trace}};
    if (!res.message.empty()) out["message"] = res.message;
    write_json_file(out_path(args, "samplesize_result.json"), out);
    write_json_file(out_path(args, "samplesize_manifest.json"),
                    make_manifest("samplesize", root, rs));

    if (!res.converged) {
        throw InfeasibleError("sample-size search did not converge: " +
                              res.message);
    }
    std::cout << "per-arm sample sizes (interim, final): " << res.n1 << " "
              << res.n << "\nboundary: lambda " << res.boundary.lambda
              << ", gamma " << res.boundary.gamma << "\navg type I "
              << res.avg_type1 << ", avg power " << res.avg_power
              << ", power at s=U " << res.power_at_upper << "\n";
    return 0;
}

// ---------------------------------------------------------------- trend

inline int cmd_trend(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    RunSettings rs = run_settings(root, args);
    const json& t = section(root, "trend");
    if (t.empty()) throw io::ConfigError("config needs a [trend] section");

    TrendConfig cfg;
    cfg.n_r = require<int>(t, "n_r", "trend");
    cfg.quantile_level = require<double>(t, "b", "trend");
    std::string hyp = get_or<std::string>(t, "hypothesis", "h1");
    if (hyp == "h0") {
        cfg.hyp = Hypothesis::h0;
    } else if (hyp == "h1") {
        cfg.hyp = Hypothesis::h1;
    } else {
        throw io::ConfigError("trend.hypothesis must be h0 or h1");
    }
    cfg.a0 = get_or(t, "a0", 4.0);
    cfg.b0 = get_or(t, "b0", 12.12);
    cfg.a1 = get_or(t, "a1", 4.0);
    cfg.b1 = get_or(t, "b1", 24.24);
    cfg.mu0 = get_or(t, "control_median", 2.8) / ln2;
    cfg.mu1 = get_or(t, "post_treatment_median", 6.57) / ln2;
    cfg.grid_points = get_or(t, "grid_points", 100);
    cfg.nsim = get_or(t, "nsim", rs.nsim);

    TrendCurve curve = quantile_trend(cfg, rs.seed, rs.workers);
    TrendSummary mid = trend_summary(curve, TrendWindow::q25_q75);
    TrendSummary wide = trend_summary(curve, TrendWindow::q10_q90);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < curve.d01.size(); ++i) {
        rows.push_back({io::fmt(curve.d01[i], 4),
                        io::fmt(curve.quantile[i], 6)});
    }
    io::write_csv(out_path(args, "trend_curve.csv"), {"d01", "quantile"},
                  rows);

    auto summary_json = [](const TrendSummary& s) {
        return json{{"min", s.min},
                    {"max", s.max},
                    {"range", s.range},
                    {"spearman", s.spearman},
                    {"constant", s.constant}};
    };
    json out{{"hypothesis", hyp},
             {"n_r", cfg.n_r},
             {"b", cfg.quantile_level},
             {"window_q25_q75", summary_json(mid)},
             {"window_q10_q90", summary_json(wide)}};
    write_json_file(out_path(args, "trend_summary.json"), out);
    write_json_file(out_path(args, "trend_manifest.json"),
                    make_manifest("trend", root, rs));
    std::cout << "[Q25,Q75] min " << mid.min << " max " << mid.max
              << " spearman " << mid.spearman << "\n";
    return 0;
}

// ---------------------------------------------------------------- compare

inline int cmd_compare(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    DesignSpec design = design_from_config(root);
    RunSettings rs = run_settings(root, args);
    const json& c = section(root, "compare");
    if (c.empty()) throw io::ConfigError("config needs a [compare] section");

    auto s_values = require<std::vector<double>>(c, "s_values", "compare");
    double alpha = get_or(c, "alpha", 0.10);
    bool two_sided = get_or(c, "two_sided", true);
    double target_power = get_or(c, "target_power", 0.85);
    bool with_sizes = get_or(c, "sizes", true);

    ComparisonSetup setup;
    setup.rate = design.accrual.rate;
    setup.fup = design.fup;
    setup.alpha = alpha;
    setup.two_sided = two_sided;
    setup.lambda = design.boundary.lambda;
    setup.prior = design.prior;
    double post1 = design.post_treatment_median();

    // single-look posterior design for parity with the one-shot tests
    DesignSpec single = design;
    single.schedule = {design.n_max()};

    std::vector<std::string> header{"method"};
    for (double s : s_values) header.push_back("S=" + io::fmt(s, 1));
    std::vector<std::vector<std::string>> rows(3);
    rows[0] = {"bayes-gs"};
    rows[1] = {"pw-logrank"};
    rows[2] = {"logrank"};
    json jpower = json::array();
    for (double s : s_values) {
        ComparisonTruth truth{design.control_median, post1, s};
        double p_bayes =
            estimate_oc(single, {Hypothesis::h1, s}, rs.nsim, rs.seed,
                        rs.workers)
                .prn;
        double p_pw = power_by_sim(FreqTest::pw_logrank, design.n_max(),
                                   truth, setup, rs.nsim, rs.seed,
                                   rs.workers);
        double p_lr = power_by_sim(FreqTest::logrank, design.n_max(), truth,
                                   setup, rs.nsim, rs.seed, rs.workers);
        rows[0].push_back(io::fmt(p_bayes, 3));
        rows[1].push_back(io::fmt(p_pw, 3));
        rows[2].push_back(io::fmt(p_lr, 3));
        jpower.push_back(json{{"s", s},
                              {"bayes_gs", p_bayes},
                              {"pw_logrank", p_pw},
                              {"logrank", p_lr}});
    }

    json out{{"alpha", alpha},
             {"two_sided", two_sided},
             {"n_per_arm", design.n_max()},
             {"power", jpower}};
    std::string md = "## Empirical power (n = " +
                     std::to_string(design.n_max()) + " per arm)\n\n" +
                     io::format_markdown(header, rows);

    std::vector<std::vector<std::string>> power_csv;
    for (const auto& row : jpower) {
        power_csv.push_back({io::fmt(row.at("s").get<double>(), 2),
                             io::fmt(row.at("bayes_gs").get<double>()),
                             io::fmt(row.at("pw_logrank").get<double>()),
                             io::fmt(row.at("logrank").get<double>())});
    }
    io::write_csv(out_path(args, "compare_power.csv"),
                  {"s", "bayes_gs", "pw_logrank", "logrank"}, power_csv);

    if (with_sizes) {
        auto size_s = get_or(c, "size_s_values", s_values);
        json jsizes = json::array();
        std::vector<std::string> sh{"method"};
        for (double s : size_s) sh.push_back("S=" + io::fmt(s, 1));
        std::vector<std::vector<std::string>> srows(1);
        srows[0] = {"logrank (total)"};
        for (double s : size_s) {
            ComparisonTruth truth{design.control_median, post1, s};
            int per_arm = min_sample_size(
                FreqTest::logrank, truth, setup, target_power, rs.seed,
                rs.nsim, 2 * rs.nsim, 5000, rs.workers);
            jsizes.push_back(json{{"s", s},
                                  {"logrank_per_arm", per_arm},
                                  {"logrank_total", 2 * per_arm}});
            srows[0].push_back(std::to_string(2 * per_arm));
        }
        out["sizes"] = jsizes;
        md += "\n## Minimum sample size for power " +
              io::fmt(target_power, 2) + "\n\n" + io::format_markdown(sh,
                                                                      srows);
        std::vector<std::vector<std::string>> size_csv;
        for (const auto& row : jsizes) {
            size_csv.push_back(
                {io::fmt(row.at("s").get<double>(), 2),
                 std::to_string(row.at("logrank_per_arm").get<int>()),
                 std::to_string(row.at("logrank_total").get<int>())});
        }
        io::write_csv(out_path(args, "compare_sizes.csv"),
                      {"s", "logrank_per_arm", "logrank_total"}, size_csv);
    }

    write_json_file(out_path(args, "compare_result.json"), out);
    write_text_file(out_path(args, "compare_tables.md"), md);
    write_json_file(out_path(args, "compare_manifest.json"),
                    make_manifest("compare", root, rs));
    std::cout << md;
    return 0;
}

// ---------------------------------------------------------------- conduct

inline int cmd_conduct(const CommonArgs& args) {
    json root = load_config_with_overrides(args);
    DesignSpec design = design_from_config(root);
    if (args.data_path.empty()) {
        throw io::ConfigError("conduct requires --data <patients.csv>");
    }
    int n_looks = static_cast<int>(design.schedule.size());
    if (args.stage < 1 || args.stage > n_looks) {
        throw io::ConfigError("conduct: stage must be in [1, " +
                              std::to_string(n_looks) + "]");
    }
    const json& cc = section(root, "conduct");
    double s_analysis = get_or(cc, "s_analysis", design.s_likely);

    auto records = io::read_patient_csv(args.data_path);
    auto [control, treatment] = io::snapshots_from_records(records);
    if (control.size() == 0 || treatment.size() == 0) {
        throw io::ConfigError("conduct: an arm has no patients");
    }

    int planned = design.schedule[args.stage - 1];
    double actual = 0.5 * (control.size() + treatment.size());
    std::string warning;
    if (static_cast<int>(std::lround(actual)) != planned) {
        warning = "observed per-arm size " + io::fmt(actual, 1) +
                  " differs from planned " + std::to_string(planned) +
                  "; proceeding on observed data";
        std::cerr << "warning: " << warning << "\n";
    }

    SufficientStats st = sufficient_stats(control, treatment, s_analysis);
    PosteriorParams post = posterior_params(st, design.prior);
    double prob = prob_treatment_worse(st, design.prior);
    double threshold =
        design.boundary.threshold(planned, design.n_max());
    bool stop = prob > threshold;
    bool final_look = args.stage == n_looks;

    std::string decision = final_look ? (stop ? "accept-null" : "reject-null")
                                      : (stop ? "stop-for-futility"
                                              : "continue");

    json out{
        {"stage", args.stage},
        {"final_look", final_look},
        {"s_analysis", s_analysis},
        {"planned_per_arm", planned},
        {"observed", {{"control", control.size()},
                      {"treatment", treatment.size()}}},
        {"sufficient_stats",
         {{"d0", st.d0},
          {"d01", st.d01},
          {"d11", st.d11},
          {"sum_z0", st.sum_z0},
          {"ttot_01", st.ttot_01},
          {"ttot_12", st.ttot_12},
          {"tau", st.tau}}},
        {"posterior",
         {{"mu0_median", {{"shape", post.mu0_median.shape},
                          {"scale", post.mu0_median.scale}}},
          {"mu1_median", {{"shape", post.mu1_median.shape},
                          {"scale", post.mu1_median.scale}}}}},
        {"prob_treatment_worse", prob},
        {"threshold", threshold},
        {"decision", decision}};
    if (!warning.empty()) out["warning"] = warning;

    write_json_file(out_path(args, "conduct_result.json"), out);
    RunSettings rs{0, 0, args.workers};
    json manifest = make_manifest("conduct", root, rs);
    manifest["data_file"] = args.data_path;
    manifest["stage"] = args.stage;
    write_json_file(out_path(args, "conduct_manifest.json"), manifest);

    std::cout << "stage " << args.stage << (final_look ? " (final)" : "")
              << ": P(treatment worse) = " << prob << ", threshold = "
              << threshold << " -> " << decision << "\n";
    return 0;
}

}  // namespace dte::cli
