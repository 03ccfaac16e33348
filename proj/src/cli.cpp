// cli.cpp: Subcommands, output assembly and argument handling.

#include "qhe/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qhe/analysis.hpp"

namespace qhe {

using nlohmann::json;

namespace {

Report base_report(const std::string& command, const RunConfig& c) {
    Report r;
    r.command = command;
    r.config = config_to_json(c);
    r.metadata.emplace_back("sign_convention",
                            "W, Q_c, Q_h are energy into the working medium; an engine has W < 0");
    RegimeParams params;
    if (!c.schedule.tau_cyc) {
        params.drive_periods_per_sixth = c.schedule.m;
    }
    for (const auto& w : validate_regime(c.model, params)) {
        r.metadata.emplace_back("warning." + w.check,
                                fmt::format("{} (ratio {})", w.message, format_double(w.ratio)));
    }
    return r;
}

void describe_schedules(Report& r, const RunConfig& c, double tau) {
    r.metadata.emplace_back("cycle_start", "start of the symmetric cycle, t = -tau/2");
    for (auto t : c.schedule.engine_types) {
        Schedule s = make_schedule(t, tau);
        if (c.experiment.dephasing != Dephasing::Mode::none) {
            s = with_dephasing(s);
        }
        r.metadata.emplace_back("schedule." + to_string(t), describe(s));
    }
}

Cell opt(const std::optional<double>& v) {
    return cell(v);
}

Vec initial_state(const RunConfig& c, const EngineSetup& e) {
    const auto n = static_cast<Eigen::Index>(c.model.dim());
    const std::string& which = c.experiment.initial_state;
    if (which == "excited") {
        // the level highest in energy
        const auto it = std::max_element(c.model.levels.begin(), c.model.levels.end());
        return basis_state<double>(it - c.model.levels.begin(), n);
    }
    if (which == "ground") {
        const auto it = std::min_element(c.model.levels.begin(), c.model.levels.end());
        return basis_state<double>(it - c.model.levels.begin(), n);
    }
    if (which == "mixed") {
        return maximally_mixed<double>(n);
    }
    return steady_state(e.schedule, e.generators).rho;
}

json density_json(const Vec& rho) {
    const Op m = unvec(rho);
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array();
        json ri = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ri.push_back(m(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"real", re}, {"imag", im}};
}

const std::vector<std::string> kLedgerColumns{
    "W", "Q_c", "Q_h", "P_w", "J_c", "J_h", "efficiency", "first_law_residual"};

}  // namespace

Report cmd_steady(const RunConfig& c) {
    Report r = base_report("steady", c);
    const double tau = c.tau();
    describe_schedules(r, c, tau);
    r.table.columns = {"engine", "tau_cyc", "s"};
    r.table.columns.insert(r.table.columns.end(), kLedgerColumns.begin(), kLedgerColumns.end());
    r.table.columns.insert(r.table.columns.end(), {"unique", "spectral_gap", "state_residual"});
    json states = json::object();
    for (auto t : c.schedule.engine_types) {
        const auto e = make_engine(c.model, t, tau, c.dephasing());
        const auto run = run_steady(e.schedule, e.generators);
        const auto& l = run.ledger;
        r.table.add({to_string(t), tau, l.action, l.work, l.heat_cold, l.heat_hot, l.power(),
                     l.current_cold(), l.current_hot(), opt(l.efficiency),
                     l.first_law_residual(), run.state.unique, run.state.spectral_gap,
                     run.state.residual});
        states[to_string(t)] = density_json(run.state.rho);
    }
    r.extra = {{"cycle_start", "-tau/2"}, {"states", states}};
    return r;
}

Report cmd_transient(const RunConfig& c) {
    Report r = base_report("transient", c);
    const double tau = c.tau();
    describe_schedules(r, c, tau);
    r.metadata.emplace_back("initial_state", c.experiment.initial_state);
    r.table.columns = {"engine", "cycle", "segment", "cycle_boundary", "time", "W", "Q_c", "Q_h"};
    std::vector<std::vector<TransientPoint>> runs;
    for (auto t : c.schedule.engine_types) {
        const auto e = make_engine(c.model, t, tau, c.dephasing());
        runs.push_back(
            evolve_transient(e.schedule, e.generators, initial_state(c, e), c.schedule.n_cycles));
    }
    for (std::size_t k = 0; k < runs.size(); ++k) {
        for (const auto& p : runs[k]) {
            r.table.add({to_string(c.schedule.engine_types[k]), static_cast<long long>(p.cycle),
                         static_cast<long long>(p.segment), p.cycle_boundary, p.time,
                         p.cumulative.work, p.cumulative.heat_cold, p.cumulative.heat_hot});
        }
    }
    const auto cmp = compare_transients(runs);
    // gaps are measured against the action of the continuous engine at this tau
    const auto ref = make_engine(c.model, EngineType::continuous, tau, c.dephasing());
    const double s = action(ref.schedule, ref.generators);
    r.metadata.emplace_back("action", format_double(s));
    r.metadata.emplace_back("max_gap_per_cycle", format_double(cmp.max_gap_per_cycle));
    r.metadata.emplace_back("max_gap_per_cycle_over_s3", format_double(cmp.max_gap_per_cycle / (s * s * s)));
    return r;
}

Report cmd_sweep(const RunConfig& c) {
    Report r = base_report("sweep", c);
    const bool by_gamma = c.experiment.axis == "gamma";
    SweepResult res;
    if (by_gamma) {
        const double tau = c.tau();
        describe_schedules(r, c, tau);
        res = overthermalization_sweep(c.model, c.schedule.engine_types, c.experiment.gammas, tau,
                                       c.output.jobs);
    } else {
        res = equivalence_sweep(c.model, c.schedule.engine_types, c.experiment.actions,
                                c.output.jobs);
    }
    r.metadata.emplace_back("axis", res.axis);
    r.table.columns = {res.axis, "engine", "tau_cyc", "s"};
    r.table.columns.insert(r.table.columns.end(), kLedgerColumns.begin(), kLedgerColumns.end());
    r.table.columns.insert(r.table.columns.end(), {"deviation_vs_continuous", "ok", "error"});
    for (const auto& row : res.rows) {
        const bool has_reference =
            std::find(res.types.begin(), res.types.end(), EngineType::continuous) != res.types.end();
        const Cell dev = has_reference ? Cell(max_relative_deviation(row)) : Cell{};
        for (const auto& e : row.engines) {
            r.table.add({row.value, to_string(e.type), e.tau, e.action, e.work, e.heat_cold,
                         e.heat_hot, e.power, e.current_cold, e.current_hot, opt(e.efficiency),
                         e.first_law_residual, dev, e.ok, e.error});
        }
    }
    if (by_gamma) {
        for (std::size_t t = 0; t < res.types.size(); ++t) {
            std::vector<double> power;
            for (const auto& row : res.rows) {
                power.push_back(-row.engines[t].power);
            }
            const auto k = interior_argmax(power);
            r.metadata.emplace_back("interior_max." + to_string(res.types[t]),
                                    k ? format_double(res.rows[*k].value) : std::string("none"));
        }
    }
    return r;
}

Report cmd_signature(const RunConfig& c) {
    Report r = base_report("signature", c);
    const double rate = c.dephasing_rate();
    r.metadata.emplace_back("dephasing_rate", format_double(rate));
    r.metadata.emplace_back("power", "output power -W / tau_cyc");
    r.table.columns = {"m",     "tau_cyc", "engine",       "s",
                       "z",     "delta_w", "duty",         "bound",
                       "power_coherent",   "power_dephased_rate", "power_dephased_complete",
                       "verdict_coherent", "verdict_dephased_rate", "verdict_dephased_complete"};
    struct Row {
        double m, tau, s;
        EngineType type;
        SignatureReport coh, deph, comp;
    };
    const auto& types = c.schedule.engine_types;
    const auto& ms = c.experiment.m_values;
    auto rows = parallel_map(ms.size() * types.size(), c.output.jobs, [&](std::size_t k) {
        const double m = ms[k / types.size()];
        const EngineType t = types[k % types.size()];
        const double tau = cycle_time(c.model, m);
        const auto e = make_engine(c.model, t, tau);
        return Row{m,
                   tau,
                   action(e.schedule, e.generators),
                   t,
                   signature_test(c.model, t, tau, {}),
                   signature_test(c.model, t, tau, {Dephasing::Mode::rate, rate}),
                   signature_test(c.model, t, tau, {Dephasing::Mode::complete, 0.0})};
    });
    for (const auto& x : rows) {
        const bool bounded = x.coh.bound_value.has_value();
        r.table.add({x.m, x.tau, to_string(x.type), x.s, bounded ? Cell(x.coh.z_factor) : Cell{},
                     x.coh.delta_w, x.coh.duty, opt(x.coh.bound_value), x.coh.measured_power,
                     x.deph.measured_power, x.comp.measured_power, x.coh.verdict(),
                     x.deph.verdict(), x.comp.verdict()});
    }
    return r;
}

Report cmd_verify(const RunConfig& c, bool& passed) {
    Report r = base_report("verify", c);
    r.table.columns = {"check", "passed", "value", "limit", "detail"};
    passed = true;
    auto record = [&](const std::string& name, bool ok, double value, double limit,
                      const std::string& detail) {
        passed = passed && ok;
        r.table.add({name, ok, value, limit, detail});
    };
    auto guarded = [&](const std::string& name, double limit, const auto& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record(name, false, std::nan(""), limit, e.what());
        }
    };

    const double tau = c.tau();
    GeneratorSet g = build_generators(c.model);
    if (c.experiment.inject_fault == "trace_violation") {
        // population leak out of the lowest level
        const auto n = static_cast<Eigen::Index>(c.model.dim());
        Superop leak = Superop::Zero(n * n, n * n);
        leak(0, 0) = cd(0, -std::max(c.model.gamma_hot, 1e-3));
        g.set(Channel::hot, g[Channel::hot] + leak);
        r.metadata.emplace_back("injected_fault", "trace_violation on the hot bath");
    }

    guarded("strang", 1.0, [&] {
        const Superop a = g[Channel::cold] + g[Channel::hot];
        const Superop& b = g[Channel::drive];
        const double rate = spectral_norm(a) + spectral_norm(b);
        double worst = 0;
        for (double s : {0.05, 0.1, 0.25, 0.5}) {
            const auto d = strang_defect(a, b, s / rate);
            worst = std::max(worst, d.defect / d.bound);
        }
        record("strang", worst <= 1.0, worst, 1.0, "max defect / s^3 over s in {0.05,0.1,0.25,0.5}");
    });

    const double structural_tol = 1e-12;
    guarded("structural", structural_tol, [&] {
        const auto s = structural_identities(c.model, g, tau);
        const double scale = std::max(1.0, build_h0(c.model).norm());
        record("hamiltonian_annihilation", s.annihilation <= structural_tol * scale * scale,
               s.annihilation, structural_tol * scale * scale, "H^H |H> = <H| H^H = 0");
        record("population_block", s.population_block <= structural_tol, s.population_block,
               structural_tol, "drive entries (ii,kk) vanish");
        record("trace_preservation", s.trace_preservation <= structural_tol,
               s.trace_preservation, structural_tol, "<I| G = 0 for every channel");
        record("cptp", s.cptp <= structural_tol, s.cptp, structural_tol,
               "cycle propagators of all engine types");
    });

    const double carnot = 1 - c.model.t_cold / c.model.t_hot;
    guarded("first_law", 1e-10, [&] {
        double worst = 0;
        double eff = 0;
        for (auto t : all_engine_types()) {
            const auto run = run_steady(make_schedule(t, tau), g);
            worst = std::max(worst, run.ledger.first_law_residual());
            eff = std::max(eff, run.ledger.efficiency.value_or(0.0));
        }
        record("first_law", worst <= 1e-10, worst, 1e-10, "|W + Q_c + Q_h| relative, steady state");
        record("carnot", eff <= carnot + 1e-9, eff, carnot, "efficiency against 1 - T_c/T_h");
    });

    guarded("srt", regression::kSrtC, [&] {
        const double s_target = 0.05;
        const double tau_s = taus_for_actions(c.model, {s_target})[0];
        const Schedule sched = refine(four_stroke_schedule(tau_s), 3);
        const auto n = static_cast<Eigen::Index>(c.model.dim());
        const auto rep = srt_verify(sched, g, c.experiment.permutations,
                                    basis_state<double>(n - 1, n), c.experiment.seed);
        const double ratio = rep.max_deviation() / std::pow(rep.s, 3);
        record("srt", ratio <= regression::kSrtC, ratio, regression::kSrtC,
               fmt::format("max energy change / s^3 over {} rearrangements", rep.permutations));
    });

    guarded("passivity", 0.0, [&] {
        const auto n = c.model.dim();
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        const Op h0 = build_h0(c.model);
        const auto gibbs = passivity_check(gibbs_state(c.model.levels, c.model.t_cold, all), h0);
        record("passivity_gibbs", gibbs.passive, gibbs.passive ? 1.0 : 0.0, 1.0,
               "Gibbs state is passive");
        const auto run = run_steady(make_schedule(EngineType::four_stroke, tau), g);
        const bool engine = run.ledger.work < 0;
        const auto st = passivity_check(run.state.rho, h0);
        record("passivity_engine", !engine || !st.passive, st.passive ? 1.0 : 0.0, 0.0,
               "a working engine's steady state is not passive");
    });

    r.metadata.emplace_back("result", passed ? "pass" : "fail");
    r.extra = {{"passed", passed}};
    return r;
}

namespace {

std::string output_format(const RunConfig& c, const std::string& command) {
    if (c.output.format) {
        return *c.output.format;
    }
    return command == "verify" ? "json" : "csv";
}

std::string render(const Report& r, const std::string& format) {
    if (format == "json") {
        return to_json(r).dump(2) + "\n";
    }
    return to_csv(r);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) {
        throw std::runtime_error("cannot write " + p.string());
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multilevel quantum heat engine simulator", "qhe"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::string> format;
    app.add_option("--config", config_path, "JSON configuration file (merge patch over defaults)");
    app.add_option("--preset", preset, "preset: fig6a, fig6b, fig7, fig9, fig10");
    app.add_option("--out", out_dir, "write results into this directory instead of stdout");
    app.add_option("--jobs", jobs, "worker threads for grid sweeps")->check(CLI::Range(1, 1024));
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    for (const char* name : {"steady", "transient", "sweep", "signature", "verify"}) {
        app.add_subcommand(name);
    }
    app.get_subcommand("steady")->description("steady-state ledger per engine type");
    app.get_subcommand("transient")->description("cumulative work and heat from an initial state");
    app.get_subcommand("sweep")->description("steady state over the action or gamma grid");
    app.get_subcommand("signature")->description("power against the stochastic bound");
    app.get_subcommand("verify")->description("invariant suite with pass/fail output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::config);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(preset, config_path);
        if (out_dir) {
            cfg.output.directory = *out_dir;
        }
        if (jobs) {
            cfg.output.jobs = *jobs;
        }
        if (format) {
            cfg.output.format = *format;
        }
        cfg.output.format = output_format(cfg, command);
    } catch (const ConfigError& e) {
        err << "qhe: " << e.what() << "\n";
        return static_cast<int>(ExitCode::config);
    }

    Report report;
    bool passed = true;
    try {
        if (command == "steady") {
            report = cmd_steady(cfg);
        } else if (command == "transient") {
            report = cmd_transient(cfg);
        } else if (command == "sweep") {
            report = cmd_sweep(cfg);
        } else if (command == "signature") {
            report = cmd_signature(cfg);
        } else {
            report = cmd_verify(cfg, passed);
        }
    } catch (const NumericalError& e) {
        err << "qhe: numerical failure: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numerical);
    } catch (const std::invalid_argument& e) {
        err << "qhe: invalid configuration: " << e.what() << "\n";
        return static_cast<int>(ExitCode::config);
    } catch (const std::exception& e) {
        err << "qhe: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numerical);
    }

    const std::string& fmt_name = *cfg.output.format;
    const std::string text = render(report, fmt_name);
    try {
        if (cfg.output.directory) {
            const std::filesystem::path dir(*cfg.output.directory);
            std::filesystem::create_directories(dir);
            write_file(dir / (command + "." + fmt_name), text);
            if (command == "steady") {
                json states = report.extra;
                states["config"] = report.config;
                write_file(dir / "steady_state.json", states.dump(2) + "\n");
            }
        } else {
            out << text;
        }
    } catch (const std::exception& e) {
        err << "qhe: " << e.what() << "\n";
        return static_cast<int>(ExitCode::config);
    }
    if (!passed) {
        err << "qhe: verification failed\n";
        return static_cast<int>(ExitCode::numerical);
    }
    return static_cast<int>(ExitCode::ok);
}

}  // namespace qhe
