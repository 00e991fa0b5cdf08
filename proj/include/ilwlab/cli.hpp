#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/evolution.hpp"
#include "ilwlab/experiments.hpp"
#include "ilwlab/gauge.hpp"
#include "ilwlab/normalform.hpp"
#include "ilwlab/report_io.hpp"
#include "ilwlab/rng.hpp"
#include "ilwlab/version.hpp"

namespace ilwlab {

// Exit statuses: 0 success/pass, 1 verdict failed, 2 configuration error,
// 3 numerical divergence.
inline constexpr int kExitPass = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDivergence = 3;

// ---------------------------------------------------------------------------
// Flat key-value configuration. Values come from (1) per-command defaults,
// (2) an optional config file of `key=value` lines, (3) command-line
// overrides, in that order of precedence (command line wins). Unknown keys
// are rejected.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> kv;

    const std::string& get(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
        return it->second;
    }
    double get_double(const std::string& key) const {
        return parse_double_token(get(key));
    }
    int get_int(const std::string& key) const {
        const double v = get_double(key);
        const int i = static_cast<int>(v);
        if (i != v) throw ConfigError("key '" + key + "' must be an integer");
        return i;
    }
    bool get_bool(const std::string& key) const {
        const std::string& v = get(key);
        if (v == "1" || v == "true") return true;
        if (v == "0" || v == "false") return false;
        throw ConfigError("key '" + key + "' must be a boolean (0/1/true/false)");
    }
    std::uint64_t get_seed() const {
        return static_cast<std::uint64_t>(std::stoull(get("seed")));
    }
    std::vector<double> get_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(get(key));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(parse_double_token(tok));
        }
        if (out.empty()) throw ConfigError("key '" + key + "' must be a nonempty list");
        return out;
    }
    std::string echo() const {
        std::ostringstream os;
        os << "command=" << command;
        for (const auto& [k, v] : kv) os << " " << k << "=" << v;
        return os.str();
    }
};

namespace cli_detail {

inline std::map<std::string, std::string> command_defaults(const std::string& command) {
    const std::string out_dir = [] {
        const char* env = std::getenv("ILWLAB_OUT_DIR");
        return std::string(env ? env : "ilwlab_out");
    }();
    std::map<std::string, std::string> d = {{"seed", "0"}, {"out_dir", out_dir}};
    auto grid = [&](const char* n) {
        d["grid.n"] = n;
        d["grid.period"] = "6.283185307179586";
    };
    if (command == "simulate") {
        grid("256");
        d["equation"] = "ilw";
        d["delta"] = "1";
        d["dt"] = "5e-4";
        d["t_final"] = "1";
        d["stride"] = "1";
        d["dealias"] = "1";
        d["dealias_mode"] = "truncate";
        d["u0"] = "cos";
        d["amplitude"] = "0.5";
    } else if (command == "deepwater") {
        grid("256");
        d["s"] = "0.25";
        d["deltas"] = "1,2,4,8,16,32,inf";
        d["dt"] = "5e-4";
        d["t_final"] = "1";
        d["stride"] = "1";
        d["linear"] = "0";
        d["u0"] = "cos_sin2";
        d["amplitude"] = "1";
    } else if (command == "shallowwater") {
        grid("256");
        d["s"] = "0.25";
        d["deltas"] = "1,0.5,0.25,0.125";
        d["dt"] = "5e-4";
        d["t_final"] = "1";
        d["stride"] = "1";
        d["linear"] = "0";
        d["u0"] = "cos";
        d["amplitude"] = "0.3";
    } else if (command == "qscan") {
        grid("256");
        d["s_list"] = "0,0.25";
        d["deltas"] = "0.25,0.5,1,2,4,8,16,32,64";
    } else if (command == "gauge-audit") {
        grid("256");
        d["delta"] = "1";
        d["dt"] = "5e-4";
        d["t_final"] = "0.5";
        d["stride"] = "1";
        d["u0"] = "cos";
        d["amplitude"] = "0.3";
        d["s"] = "0.2";
        d["eps"] = "0.05";
    } else if (command == "nf-audit") {
        grid("64");
        d["M_grid"] = "4,8,16,32,64,128,256";
        d["N_grid"] = "8,16,32";
        d["s"] = "0.2";
        d["theta"] = "0.25";
        d["theta2"] = "0.1";
        d["samples"] = "1000";
        d["operators"] = "identity,N1_leqM,N1_0,N2_leqM,N2_0_dyadic";
        d["ibp1"] = "1";
        d["M"] = "10";
        d["dt"] = "1e-3";
        d["t_final"] = "0.25";
        d["amplitude"] = "0.3";
    } else if (command == "ineq-audit") {
        grid("512");
        d["s"] = "0.3";
        d["N_grid"] = "8,16,32,64,128";
        d["samples"] = "1000";
    } else if (command == "exponents") {
        d = {{"s", "0.25"}, {"p", "4"}};
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return d;
}

inline void apply_pair(RunConfig& cfg, const std::string& token,
                       const std::map<std::string, std::string>& defaults) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected key=value, got '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (defaults.find(key) == defaults.end())
        throw ConfigError("unknown key '" + key + "' for command '" + cfg.command + "'");
    cfg.kv[key] = value;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace cli_detail

inline RunConfig parse_run_config(const std::vector<std::string>& args) {
    if (args.empty()) throw ConfigError("usage: ilwlab <command> [key=value ...]");
    RunConfig cfg;
    cfg.command = args[0];
    auto defaults = cli_detail::command_defaults(cfg.command);
    cfg.kv = defaults;

    // A config file contributes first; command-line pairs win.
    std::vector<std::string> cli_pairs;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i].rfind("config=", 0) == 0) {
            const std::string path = args[i].substr(7);
            std::ifstream is(path);
            if (!is) throw ConfigError("cannot open config file '" + path + "'");
            std::string line;
            while (std::getline(is, line)) {
                const auto hash = line.find('#');
                if (hash != std::string::npos) line = line.substr(0, hash);
                while (!line.empty() && std::isspace(line.back())) line.pop_back();
                size_t start = 0;
                while (start < line.size() && std::isspace(line[start])) ++start;
                line = line.substr(start);
                if (line.empty()) continue;
                cli_detail::apply_pair(cfg, line, defaults);
            }
        } else {
            cli_pairs.push_back(args[i]);
        }
    }
    for (const auto& tok : cli_pairs) cli_detail::apply_pair(cfg, tok, defaults);
    return cfg;
}

/// Named initial data presets used by the experiment commands.
inline SpectralField make_initial_data(const std::string& name, double amplitude,
                                       const Grid& grid, std::uint64_t seed) {
    SpectralField f(grid, true);
    if (name == "cos") {
        f.set_coeff(1, cplx{0.5 * amplitude, 0.0});
        f.set_coeff(-1, cplx{0.5 * amplitude, 0.0});
    } else if (name == "cos_sin2") {
        // amplitude * (cos x + 0.5 sin 2x)
        f.set_coeff(1, cplx{0.5 * amplitude, 0.0});
        f.set_coeff(-1, cplx{0.5 * amplitude, 0.0});
        f.set_coeff(2, cplx{0.0, -0.25 * amplitude});
        f.set_coeff(-2, cplx{0.0, 0.25 * amplitude});
    } else if (name == "random") {
        auto rng = make_rng(derive_seed(seed, 0xda7a));
        std::normal_distribution<double> gauss;
        for (int n = 1; n <= 8; ++n) {
            const cplx c{gauss(rng), gauss(rng)};
            f.set_coeff(n, c);
            f.set_coeff(-n, std::conj(c));
        }
        const double h = hs_norm(f, 0.5);
        if (h > 0.0) f *= amplitude / h;
    } else {
        throw ConfigError("unknown u0 preset '" + name + "'");
    }
    return f;
}

struct RunManifest {
    std::string command;
    std::string config_echo;
    std::string started_utc;
    std::string finished_utc;
    std::string status = "ok"; // ok | divergence
    std::string notes;
    std::vector<std::string> outputs;
    std::vector<std::string> verdict_lines;
    std::string summary = "pass";

    std::string text() const {
        std::ostringstream os;
        os << "# ilwlab run manifest\n";
        os << "schema: 1\n";
        os << "version: " << kVersionTag << "\n";
        os << "command: " << command << "\n";
        os << "started_utc: " << started_utc << "\n";
        os << "finished_utc: " << finished_utc << "\n";
        os << "status: " << status << "\n";
        if (!notes.empty()) os << "notes: " << notes << "\n";
        os << "config: " << config_echo << "\n";
        os << "outputs:\n";
        for (const auto& o : outputs) os << "  - " << o << "\n";
        if (!verdict_lines.empty()) {
            os << "verdicts:\n";
            for (const auto& v : verdict_lines) os << "  " << v << "\n";
        }
        os << "summary: " << summary << "\n";
        return os.str();
    }
};

namespace cli_detail {

inline Grid config_grid(const RunConfig& cfg) {
    return make_grid(cfg.get_int("grid.n"), cfg.get_double("grid.period"));
}

inline Equation parse_equation(const std::string& name) {
    for (Equation eq :
         {Equation::ilw, Equation::bo, Equation::kdv, Equation::kdv_third, Equation::silw,
          Equation::bo_perturbed, Equation::ilw_linear, Equation::bo_linear,
          Equation::kdv_linear, Equation::kdv_third_linear, Equation::silw_linear,
          Equation::bo_perturbed_linear}) {
        if (equation_name(eq) == name) return eq;
    }
    throw ConfigError("unknown equation '" + name + "'");
}

inline DealiasMode parse_dealias_mode(const std::string& name) {
    if (name == "truncate") return DealiasMode::truncate_23;
    if (name == "pad") return DealiasMode::pad_2x;
    throw ConfigError("unknown dealias_mode '" + name + "' (truncate|pad)");
}

inline SolverParams solver_params(const RunConfig& cfg) {
    SolverParams p;
    p.dt = cfg.get_double("dt");
    p.t_final = cfg.get_double("t_final");
    p.snapshot_stride = cfg.kv.count("stride") ? cfg.get_int("stride") : 1;
    return p;
}

inline void emit_report_files(const std::filesystem::path& dir, const std::string& stem,
                              const ExperimentReport& rep, RunManifest& manifest) {
    atomic_write(dir / (stem + ".csv"), report_csv(rep));
    manifest.outputs.push_back(stem + ".csv");
    write_report(dir / (stem + "_report.json"), rep);
    manifest.outputs.push_back(stem + "_report.json");
    atomic_write(dir / "verdict", verdict_line(rep));
    manifest.outputs.push_back("verdict");
    for (const auto& c : rep.checks)
        manifest.verdict_lines.push_back(c.name + ": " + (c.pass ? "pass" : "fail") + " (value=" +
                                         fmt_double(c.value) + " " + c.cmp + " " +
                                         fmt_double(c.threshold) + ")");
    manifest.summary = rep.passed ? "pass" : "fail";
}

} // namespace cli_detail

/// Execute one parsed run. Returns the process exit status; writes outputs
/// and the manifest under out_dir.
inline int run_command(const RunConfig& cfg) {
    using cli_detail::config_grid;
    using cli_detail::emit_report_files;
    using cli_detail::solver_params;

    if (cfg.command == "exponents") {
        const double s = cfg.get_double("s");
        const double p = cfg.get_double("p");
        std::cout << "alpha=" << fmt_double(strichartz_alpha(s, p))
                  << " beta=" << fmt_double(strichartz_beta(s, p))
                  << " s0=" << fmt_double(s0_constant()) << "\n";
        return kExitPass;
    }

    const std::filesystem::path dir = cfg.get("out_dir");
    std::filesystem::create_directories(dir);

    RunManifest manifest;
    manifest.command = cfg.command;
    manifest.config_echo = cfg.echo();
    manifest.started_utc = cli_detail::utc_now();

    auto finalize = [&](int status) {
        manifest.finished_utc = cli_detail::utc_now();
        atomic_write(dir / "manifest.txt", manifest.text());
        return status;
    };

    try {
        if (cfg.command == "simulate") {
            EvolutionConfig ec;
            ec.equation = cli_detail::parse_equation(cfg.get("equation"));
            ec.delta = cfg.get_double("delta");
            ec.dt = cfg.get_double("dt");
            ec.t_final = cfg.get_double("t_final");
            ec.grid = config_grid(cfg);
            ec.dealias = cfg.get_bool("dealias");
            ec.dealias_mode = cli_detail::parse_dealias_mode(cfg.get("dealias_mode"));
            ec.snapshot_stride = cfg.get_int("stride");
            SpectralField u0 = make_initial_data(cfg.get("u0"), cfg.get_double("amplitude"),
                                                 ec.grid, cfg.get_seed());
            Trajectory traj = evolve(u0, ec);
            atomic_write(dir / "trajectory.csv", trajectory_csv(traj));
            manifest.outputs.push_back("trajectory.csv");

            InvariantReport inv = invariant_report(traj);
            std::vector<DiagnosticRow> rows;
            for (size_t k = 0; k < inv.times.size(); ++k) {
                rows.push_back({inv.times[k], "mean", inv.mean[k]});
                rows.push_back({inv.times[k], "l2_norm", inv.l2[k]});
            }
            atomic_write(dir / "invariants.csv", diagnostics_csv(rows));
            manifest.outputs.push_back("invariants.csv");
            manifest.verdict_lines.push_back("max_mean_drift: " + fmt_double(inv.max_mean_drift));
            manifest.verdict_lines.push_back("max_l2_rel_drift: " +
                                             fmt_double(inv.max_l2_rel_drift));
            return finalize(kExitPass);
        }

        if (cfg.command == "deepwater" || cfg.command == "shallowwater") {
            const Grid grid = config_grid(cfg);
            SpectralField u0 = make_initial_data(cfg.get("u0"), cfg.get_double("amplitude"),
                                                 grid, cfg.get_seed());
            const bool linear = cfg.get_bool("linear");
            ExperimentReport rep =
                cfg.command == "deepwater"
                    ? deep_water(u0, cfg.get_double("s"), cfg.get_list("deltas"),
                                 solver_params(cfg), linear)
                    : shallow_water(u0, cfg.get_double("s"), cfg.get_list("deltas"),
                                    solver_params(cfg), linear);
            rep.seed = cfg.get_seed();
            rep.config_echo = cfg.echo();
            emit_report_files(dir, cfg.command, rep, manifest);
            return finalize(rep.passed ? kExitPass : kExitVerdictFail);
        }

        if (cfg.command == "qscan") {
            ExperimentReport rep =
                qdelta_scan(cfg.get_list("s_list"), cfg.get_list("deltas"), config_grid(cfg));
            rep.config_echo = cfg.echo();
            emit_report_files(dir, "qscan", rep, manifest);
            return finalize(rep.passed ? kExitPass : kExitVerdictFail);
        }

        if (cfg.command == "gauge-audit") {
            const Grid grid = config_grid(cfg);
            SpectralField u0 = make_initial_data(cfg.get("u0"), cfg.get_double("amplitude"),
                                                 grid, cfg.get_seed());
            MeanNormalization norm = mean_normalize(u0);
            EvolutionConfig ec;
            ec.equation = Equation::bo_perturbed;
            ec.delta = cfg.get_double("delta");
            ec.dt = cfg.get_double("dt");
            ec.t_final = cfg.get_double("t_final");
            ec.grid = grid;
            ec.snapshot_stride = cfg.get_int("stride");
            Trajectory traj = evolve(norm.v0, ec);

            GaugeResidualSeries res = gauged_residual(traj);
            SmoothingDeficit def =
                smoothing_deficit(traj, cfg.get_double("s"), cfg.get_double("eps"));
            const double gamma_T = gamma_integral(traj, ec.t_final);
            const double msq0 = mean_square(norm.v0);

            std::vector<DiagnosticRow> rows;
            for (size_t k = 0; k < res.times.size(); ++k) {
                rows.push_back({res.times[k], "residual_qeff", res.residual_qeff[k]});
                rows.push_back({res.times[k], "residual_qdelta", res.residual_qdelta[k]});
            }
            for (size_t k = 0; k < def.times.size(); ++k)
                rows.push_back({def.times[k], "smoothing_deficit", def.deficit[k]});
            atomic_write(dir / "gauge_diagnostics.csv", diagnostics_csv(rows));
            manifest.outputs.push_back("gauge_diagnostics.csv");

            ExperimentReport rep;
            rep.name = "gauge_audit";
            rep.columns = {"t", "error"};
            for (size_t k = 0; k < res.times.size(); ++k)
                rep.rows.push_back({res.times[k], res.residual_qeff[k]});
            rep.add_check("max_residual_qeff", res.max_qeff, "<=", 1e-4);
            rep.add_check("gamma_slope_vs_msq", std::abs(gamma_T / ec.t_final - msq0), "<=",
                          1e-8);
            rep.config_echo = cfg.echo();
            rep.seed = cfg.get_seed();
            manifest.notes = std::string("canonical_q_reading: ") +
                             (res.max_qeff <= res.max_qdelta ? "q_effective" : "q_delta") +
                             " (max_qeff=" + fmt_double(res.max_qeff) +
                             ", max_qdelta=" + fmt_double(res.max_qdelta) + ")";
            emit_report_files(dir, "gauge_audit", rep, manifest);
            return finalize(rep.passed ? kExitPass : kExitVerdictFail);
        }

        if (cfg.command == "nf-audit") {
            const Grid grid = config_grid(cfg);
            NormalFormSpec spec;
            spec.grid = grid;
            spec.s = cfg.get_double("s");

            ExperimentReport rep;
            rep.name = "nf_audit";
            rep.columns = {"param", "error"};
            rep.seed = cfg.get_seed();
            rep.config_echo = cfg.echo();

            const int samples = cfg.get_int("samples");
            std::stringstream ops(cfg.get("operators"));
            std::string op_name;
            while (std::getline(ops, op_name, ',')) {
                AuditOperator op;
                NormalFormSpec s2 = spec;
                std::vector<double> param_grid = cfg.get_list("M_grid");
                double slope_threshold = 0.0;
                if (op_name == "identity") {
                    op = AuditOperator::identity;
                    s2.theta = 0.0;
                    slope_threshold = 1e-9;
                } else if (op_name == "N1_leqM") {
                    op = AuditOperator::N1_leqM;
                    s2.theta = cfg.get_double("theta");
                    slope_threshold = 1.1;
                } else if (op_name == "N1_0") {
                    op = AuditOperator::N1_0;
                    s2.theta = 0.0;
                    slope_threshold = -0.025;
                } else if (op_name == "N2_leqM") {
                    op = AuditOperator::N2_leqM;
                    s2.theta = cfg.get_double("theta2");
                    slope_threshold = 1.6;
                } else if (op_name == "N2_0_dyadic") {
                    op = AuditOperator::N2_0_dyadic;
                    s2.theta = cfg.get_double("theta2");
                    s2.M = cfg.get_double("M");
                    param_grid = cfg.get_list("N_grid");
                    slope_threshold = -0.5;
                } else {
                    throw ConfigError("unknown audit operator '" + op_name + "'");
                }
                RatioReport rr = ratio_estimate(op, s2, samples, param_grid, cfg.get_seed());
                ExperimentReport sub;
                sub.name = "nf_" + op_name;
                sub.columns = {"param", "error"};
                for (size_t i = 0; i < rr.params.size(); ++i)
                    sub.rows.push_back({rr.params[i], rr.max_ratios[i]});
                sub.slope = rr.slope;
                atomic_write(dir / ("nf_ratios_" + op_name + ".csv"), report_csv(sub));
                manifest.outputs.push_back("nf_ratios_" + op_name + ".csv");
                rep.add_check(op_name + "_slope", rr.slope, "<=", slope_threshold);
                rep.rows.push_back({rr.params.back(), rr.max_ratios.back()});
            }

            if (cfg.get_bool("ibp1")) {
                EvolutionConfig ec;
                ec.equation = Equation::bo;
                ec.dt = cfg.get_double("dt");
                ec.t_final = cfg.get_double("t_final");
                ec.grid = grid;
                SpectralField u0 =
                    make_initial_data("cos", cfg.get_double("amplitude"), grid, cfg.get_seed());
                Trajectory traj = evolve(u0, ec);
                NormalFormSpec ispec;
                ispec.grid = grid;
                ispec.M = cfg.get_double("M");
                const double residual =
                    nf_identity_residual(traj, gauge_snapshots(traj), ispec);
                rep.add_check("ibp1_residual", residual, "<=", 1e-6);
            }
            emit_report_files(dir, "nf_audit", rep, manifest);
            return finalize(rep.passed ? kExitPass : kExitVerdictFail);
        }

        if (cfg.command == "ineq-audit") {
            const Grid grid = config_grid(cfg);
            std::vector<int> n_grid;
            for (double v : cfg.get_list("N_grid")) n_grid.push_back(static_cast<int>(v));
            ExperimentReport rep = product_bound_audit(cfg.get_double("s"), n_grid,
                                                       cfg.get_int("samples"), grid,
                                                       cfg.get_seed());
            rep.config_echo = cfg.echo();
            emit_report_files(dir, "product_bound", rep, manifest);
            return finalize(rep.passed ? kExitPass : kExitVerdictFail);
        }

        throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const DivergenceError& e) {
        manifest.status = "divergence";
        manifest.notes = std::string("partial outputs; ") + e.what();
        manifest.summary = "fail";
        finalize(kExitDivergence);
        std::cerr << "ilwlab: " << e.what() << "\n";
        return kExitDivergence;
    }
}

inline int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        RunConfig cfg = parse_run_config(args);
        return run_command(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "ilwlab: configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ShapeError& e) {
        std::cerr << "ilwlab: configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const PreconditionError& e) {
        std::cerr << "ilwlab: configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const FormatError& e) {
        std::cerr << "ilwlab: format error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

} // namespace ilwlab
