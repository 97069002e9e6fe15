/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef ADPTRACK_CLI_HPP
#define ADPTRACK_CLI_HPP

// Subcommands of the adptrack command-line tool.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical
// divergence, 3 gain-condition failure.

#include "adptrack/config.hpp"
#include "adptrack/gains.hpp"
#include "adptrack/io.hpp"
#include "adptrack/oracle.hpp"
#include "adptrack/sim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace adptrack::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kDiverged = 2, kGainFailure = 3 };

struct RunResult {
    sim::Trace trace;
    sim::Metrics metrics;
    double seconds = 0.0;
};

inline RunResult run_scenario(const config::RunConfig& rc)
{
    RunResult out;
    const auto t0 = std::chrono::steady_clock::now();
    sim::Simulation s(rc.scenario);
    out.trace = s.run();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.metrics = sim::metrics(out.trace, rc.W_ideal);
    return out;
}

/// Writes effective_config.json, trace.csv, stack.csv and metrics.json.
inline void write_outputs(const std::filesystem::path& dir, const config::RunConfig& rc,
                          const RunResult& res)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "effective_config.json");
        f << rc.effective.dump(2) << '\n';
    }
    {
        std::ofstream f(dir / "trace.csv");
        io::write_trace_csv(f, res.trace, rc.output_stride);
    }
    {
        std::ofstream f(dir / "stack.csv");
        io::write_stack_csv(f, res.trace.final_stack);
    }
    {
        std::ofstream f(dir / "metrics.json");
        f << io::metrics_json(res.metrics, res.trace).dump(2) << '\n';
    }
}

inline void print_summary(std::ostream& os, const std::string& label, const config::RunConfig& rc,
                          const RunResult& res)
{
    const auto& mt = res.metrics;
    const auto show = [](const std::optional<double>& v) {
        return v ? io::fmt(*v) : std::string("n/a");
    };
    os << "[" << label << "] scenario " << rc.scenario.name << ", " << mt.rows << " rows, "
       << res.seconds << " s\n";
    os << "  tail_rms_e: " << io::fmt(mt.tail_rms_e) << "\n";
    os << "  terminal_theta_tilde: " << show(mt.terminal_theta_tilde) << "\n";
    os << "  terminal_Wc_error: " << show(mt.terminal_Wc_error) << "\n";
    os << "  terminal_Wa_error: " << show(mt.terminal_Wa_error) << "\n";
    os << "  max_gamma_norm: " << io::fmt(mt.max_gamma_norm) << "\n";
    os << "  min_cbar: " << io::fmt(mt.min_cbar) << "\n";
    os << "  min_cbar_after_excitation: " << show(mt.min_cbar_after_excitation) << "\n";
    os << "  excitation_time: " << show(mt.excitation_time) << "\n";
    os << "  final_excitation_level: " << io::fmt(mt.final_excitation_level) << "\n";
    if (mt.min_cbar < rc.cbar_floor) {
        os << "  warning: cbar running minimum " << io::fmt(mt.min_cbar) << " is below the floor "
           << io::fmt(rc.cbar_floor) << "\n";
    }
    if (!mt.excitation_time) {
        os << "  warning: excitation level never reached "
           << io::fmt(rc.scenario.identifier.excitation_threshold) << "\n";
    }
    if (res.trace.diverged) {
        os << "  diverged: " << res.trace.error << "\n";
    }
}

/// Runs every config; with more than one, runs concurrently and writes each
/// into its own subdirectory named after the config file stem.
inline int cmd_simulate(const std::vector<std::string>& configs, const std::string& out_dir,
                        bool sweep, std::ostream& os, std::ostream& err)
{
    std::vector<config::RunConfig> rcs;
    for (const auto& path : configs) {
        rcs.push_back(config::parse_config(path));
    }
    const bool nested = sweep || configs.size() > 1;
    std::vector<std::filesystem::path> dirs;
    for (std::size_t i = 0; i < rcs.size(); ++i) {
        const std::filesystem::path base = out_dir.empty() ? rcs[i].output_dir : out_dir;
        dirs.push_back(nested ? base / std::filesystem::path(configs[i]).stem() : base);
    }

    std::vector<RunResult> results(rcs.size());
    std::vector<std::string> failures(rcs.size());
    const auto work = [&](std::size_t i) {
        try {
            results[i] = run_scenario(rcs[i]);
            write_outputs(dirs[i], rcs[i], results[i]);
        } catch (const std::exception& ex) {
            failures[i] = ex.what();
        }
    };
    if (rcs.size() == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < rcs.size(); ++i) {
            pool.emplace_back(work, i);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    int code = kOk;
    for (std::size_t i = 0; i < rcs.size(); ++i) {
        if (!failures[i].empty()) {
            err << "error: " << configs[i] << ": " << failures[i] << "\n";
            code = std::max(code, static_cast<int>(kConfig));
            continue;
        }
        print_summary(os, configs[i], rcs[i], results[i]);
        os << "  output: " << dirs[i].string() << "\n";
        if (results[i].trace.diverged) {
            code = std::max(code, static_cast<int>(kDiverged));
        }
    }
    return code;
}

struct GainCheck {
    gains::SupNormEstimates est;
    gains::ConditionReport report;
    std::string W_source;
    std::string measured_source;
    bool diverged = false;
};

/**
 * Evaluates the sufficient gain conditions. Quantities that are not given
 * in the check section (Gamma lower bound, cbar, stack excitation) are
 * measured from a closed-loop run: the minimum eigenvalue of Gamma over the
 * run, the running minimum of cbar after the excitation threshold was first
 * reached, and the final stack excitation level.
 */
inline GainCheck run_gain_check(const config::RunConfig& rc)
{
    const auto& sc = rc.scenario;
    const auto& ck = rc.check;
    GainCheck out;

    std::optional<RunResult> run;
    const bool need_run = !ck.cbar || !ck.gamma_lb || !ck.sigma_theta_lb
                          || (!rc.W_ideal && !ck.W_bar);
    if (need_run) {
        run = run_scenario(rc);
        out.diverged = run->trace.diverged;
    }

    Vector W;
    if (rc.W_ideal) {
        W = *rc.W_ideal;
        out.W_source = "oracle";
    } else {
        W = run->trace.rows.back().W_c;
        out.W_source = "final critic weights";
    }
    out.est = gains::estimate_sup_norms(sc.problem, sc.controller(), W, ck.chi, ck.n_samples,
                                        ck.eps);
    if (ck.W_bar) {
        out.est.W_bar = *ck.W_bar;
        out.W_source = "config";
    }
    out.measured_source = need_run ? "run" : "config";
    if (run) {
        const auto& mt = run->metrics;
        out.est.Gamma_lb = mt.min_gamma_eig;
        out.est.cbar = mt.min_cbar_after_excitation.value_or(mt.min_cbar);
        out.est.sigma_theta_lb = mt.final_excitation_level;
        out.est.d_theta = gains::d_theta_bound(run->trace.final_stack, sc.identifier.d_bar,
                                               ck.eps.eps_theta_bar);
    }
    if (ck.gamma_lb) {
        out.est.Gamma_lb = *ck.gamma_lb;
    }
    if (ck.cbar) {
        out.est.cbar = *ck.cbar;
    }
    if (ck.sigma_theta_lb) {
        out.est.sigma_theta_lb = *ck.sigma_theta_lb;
    }

    gains::SetSizeInputs in;
    in.q_lb = linalg::min_eigenvalue(*sc.problem.cost.Q_matrix);
    in.k = sc.identifier.k;
    in.k_theta = sc.identifier.k_theta;
    in.gamma_theta_min = sc.identifier.gamma_theta.minCoeff();
    in.gamma_theta_max = sc.identifier.gamma_theta.maxCoeff();
    out.report = gains::check_sufficient_conditions(sc.adp.gains, out.est, in, ck.eps.eps_theta_bar);
    return out;
}

inline void print_gain_report(std::ostream& os, const config::RunConfig& rc, const GainCheck& gc)
{
    const auto& e = gc.est;
    os << "scenario: " << rc.scenario.name << "\n";
    os << "samples: " << e.samples << "\n";
    os << "sup_norms:\n";
    os << "  G_sigma: " << io::fmt(e.G_sigma) << "\n";
    os << "  sigma_prime: " << io::fmt(e.sigma_prime) << "\n";
    os << "  W_sigma_G_gdpinv: " << io::fmt(e.W_sigma_G_gdpinv) << "\n";
    os << "  eps_G_gdpinv: " << io::fmt(e.eps_G_gdpinv) << "\n";
    os << "  WG_sigma_plus: " << io::fmt(e.WG_sigma_plus) << "\n";
    os << "  Delta: " << io::fmt(e.Delta) << "\n";
    os << "  G_eps: " << io::fmt(e.G_eps) << "\n";
    os << "  half_W_sigma_Gr_eps: " << io::fmt(e.half_W_sigma_Gr_eps) << "\n";
    os << "  W_sigma_G_gdpinv_eps: " << io::fmt(e.W_sigma_G_gdpinv_eps) << "\n";
    os << "  eps_G_gdpinv_eps: " << io::fmt(e.eps_G_gdpinv_eps) << "\n";
    os << "  sigma_g: " << io::fmt(e.sigma_g) << "\n";
    os << "  d_theta: " << io::fmt(e.d_theta) << "\n";
    os << "  rho_ball: " << io::fmt(e.rho_ball) << "\n";
    os << "measured (" << gc.measured_source << "):\n";
    os << "  W_bar: " << io::fmt(e.W_bar) << " (" << gc.W_source << ")\n";
    os << "  Gamma_lb: " << io::fmt(e.Gamma_lb) << "\n";
    os << "  cbar: " << io::fmt(e.cbar) << "\n";
    os << "  sigma_theta_lb: " << io::fmt(e.sigma_theta_lb) << "\n";
    if (gc.diverged) {
        os << "  warning: the measuring run diverged\n";
    }
    os << "conditions:\n";
    for (const auto& c : gc.report.conditions) {
        os << "  " << c.name << ": lhs=" << io::fmt(c.lhs) << " rhs=" << io::fmt(c.rhs)
           << " pass=" << (c.pass ? "true" : "false") << (c.heuristic ? " heuristic=true" : "")
           << "\n";
    }
    os << "iota: " << io::fmt(gc.report.iota) << "\n";
    os << "result: " << (gc.report.hard_pass() ? "PASS" : "FAIL") << "\n";
}

inline int cmd_check_gains(const std::string& path, std::ostream& os)
{
    const config::RunConfig rc = config::parse_config(path);
    const GainCheck gc = run_gain_check(rc);
    print_gain_report(os, rc, gc);
    return gc.report.hard_pass() ? kOk : kGainFailure;
}

inline void print_matrix(std::ostream& os, const std::string& name, const Matrix& M)
{
    os << name << ":\n";
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        os << "  - [";
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            os << (c ? ", " : "") << io::fmt(M(r, c));
        }
        os << "]\n";
    }
}

inline int cmd_oracle(const std::string& path, std::ostream& os)
{
    const config::RunConfig rc = config::parse_config(path);
    if (!rc.scenario.lq) {
        throw ConfigError("scenario: " + rc.scenario.name + " has no linear-quadratic oracle");
    }
    const oracle::RiccatiSolution sol = oracle::solve_are(*rc.scenario.lq);
    os << "scenario: " << rc.scenario.name << "\n";
    print_matrix(os, "P", sol.P);
    print_matrix(os, "K", sol.K);
    os << "W: [";
    const Vector W = oracle::ideal_quadratic_weights(sol.P, rc.scenario.basis);
    for (Eigen::Index i = 0; i < W.size(); ++i) {
        os << (i ? ", " : "") << io::fmt(W(i));
    }
    os << "]\n";
    os << "iterations: " << sol.iterations << "\n";
    os << "residual: " << io::fmt(oracle::care_residual(*rc.scenario.lq, sol.P)) << "\n";
    return kOk;
}

/// Quick built-in sanity checks against closed-form values.
inline int cmd_selftest(std::ostream& os)
{
    int failed = 0;
    const auto check = [&](const std::string& name, bool ok) {
        os << (ok ? "PASS " : "FAIL ") << name << "\n";
        failed += ok ? 0 : 1;
    };
    const double p_star = std::sqrt(2.0) - 1.0;
    oracle::LqSpec lq{Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                      Matrix::Ones(1, 1)};
    const auto sol = oracle::solve_are(lq);
    check("scalar riccati P = sqrt(2) - 1", std::abs(sol.P(0, 0) - p_star) < 1e-12);

    const Vector y1 = rk4_step([](double, const Vector& y) { return Vector(-y); }, 0.0,
                               Vector::Ones(1), 0.1);
    check("rk4 one-step factor", std::abs(y1(0) - 0.90483750000000) < 1e-12);

    Matrix g(2, 1);
    g << 1.0, 1.0;
    const Matrix gp = pseudoinverse(g);
    check("pseudoinverse of [1; 1]", std::abs(gp(0, 0) - 0.5) < 1e-15 && std::abs(gp(0, 1) - 0.5) < 1e-15);

    const auto rc = config::build(config::default_config("scalar_lq"));
    const auto ctrl = rc.scenario.controller();
    const Vector W = *rc.W_ideal;
    const adp::CriticState critic{W, Matrix::Identity(1, 1)};
    const adp::ActorState actor{W};
    double worst = 0.0;
    for (double e = -2.0; e <= 2.0; e += 0.25) {
        const ConcatState z(Vector::Constant(1, e), Vector::Constant(1, 2.0));
        const auto be = adp::bellman_error(ctrl, z, *rc.scenario.problem.plant.true_theta, critic,
                                           actor);
        worst = std::max(worst, std::abs(be.delta));
    }
    check("bellman error vanishes at the ideal weights", worst < 1e-12);
    return failed == 0 ? kOk : kConfig;
}

/// Parses argv and runs one subcommand; returns the process exit code.
inline int dispatch(int argc, const char* const* argv, std::ostream& os = std::cout,
                    std::ostream& err = std::cerr)
{
    CLI::App app{"Model-based actor-critic tracking control simulator"};
    app.require_subcommand(1);

    std::vector<std::string> sim_configs;
    std::string sim_out;
    bool sweep = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Run closed-loop simulations");
    sim_cmd->add_option("--config", sim_configs, "Scenario config (repeatable)")->required();
    sim_cmd->add_option("--out", sim_out, "Output directory (default: output.dir)");
    sim_cmd->add_flag("--sweep", sweep, "Write each run to <out>/<config stem>/");

    std::string gain_config;
    auto* gain_cmd = app.add_subcommand("check-gains", "Evaluate the sufficient gain conditions");
    gain_cmd->add_option("--config", gain_config, "Scenario config")->required();

    std::string oracle_config;
    auto* oracle_cmd = app.add_subcommand("oracle", "Print the Riccati solution and ideal weights");
    oracle_cmd->add_option("--config", oracle_config, "Linear-quadratic scenario config")->required();

    auto* self_cmd = app.add_subcommand("selftest", "Run built-in sanity checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        os << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        os << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& ex) {
        err << "error: " << ex.what() << "\n";
        return kConfig;
    }

    try {
        if (*sim_cmd) {
            return cmd_simulate(sim_configs, sim_out, sweep, os, err);
        }
        if (*gain_cmd) {
            return cmd_check_gains(gain_config, os);
        }
        if (*oracle_cmd) {
            return cmd_oracle(oracle_config, os);
        }
        if (*self_cmd) {
            return cmd_selftest(os);
        }
    } catch (const NumericalDivergence& ex) {
        err << "error: " << ex.what() << "\n";
        return kDiverged;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kConfig;
    }
    return kConfig;
}

} // namespace adptrack::cli

#endif // ADPTRACK_CLI_HPP
