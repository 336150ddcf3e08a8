#include "ebm/cli.hpp"

#include <chrono>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebm/asymptotics.hpp"
#include "ebm/basins.hpp"
#include "ebm/config.hpp"
#include "ebm/equilibria.hpp"
#include "ebm/io.hpp"
#include "ebm/sensitivity.hpp"

#ifndef EBM_VERSION
#define EBM_VERSION "0.0.0"
#endif

namespace ebm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    int seed = 0; // reserved
    int threads = 1;
};

json eq_json(const Equilibrium& e) {
    json j;
    j["T_a"] = e.state.t_a;
    j["T_s"] = e.state.t_s;
    j["class"] = to_string(e.cls);
    j["residual"] = e.residual;
    j["tangency"] = e.tangency;
    json st;
    st["verdict"] = to_string(e.stability.verdict);
    if (e.stability.valid) {
        st["trace"] = e.stability.trace;
        st["det"] = e.stability.det;
        st["eigenvalues"] = json::array();
        for (const auto& ev : e.stability.eigenvalues)
            st["eigenvalues"].push_back({ev.real(), ev.imag()});
    }
    j["stability"] = st;
    return j;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t_seconds,T_a,T_s\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        out += io::g17(traj.t[i]);
        out += ',';
        out += io::g17(traj.y[i].t_a);
        out += ',';
        out += io::g17(traj.y[i].t_s);
        out += '\n';
    }
    return out;
}

json certificate_json(const BlowupCertificate& c) {
    json j;
    j["entry_time_seconds"] = c.entry_time;
    j["entry_state"] = {{"T_a", c.entry_state.t_a}, {"T_s", c.entry_state.t_s}};
    j["mu"] = c.mu;
    j["mu_star"] = c.mu_star_value;
    j["analytic_bound_seconds"] = c.analytic_bound;
    j["observed_escape_seconds"] = c.observed_escape;
    j["observed_within_bound"] = c.observed_within_bound;
    j["min_tail_gap"] = c.min_tail_gap;
    j["ratio_min"] = c.ratio_min;
    j["ratio_max"] = c.ratio_max;
    return j;
}

// One handler per subcommand; returns the exit code and appends the data
// files it wrote (manifest is appended by the caller).
using Handler = std::function<int(const ScenarioConfig&, const Common&, const fs::path&,
                                  std::vector<std::string>&)>;

int cmd_simulate(const ScenarioConfig& cfg, const Common&, const fs::path& out,
                 std::vector<std::string>& files) {
    const Trajectory traj = integrate(cfg.params, cfg.initial, cfg.integrator);

    io::atomic_write_text(out / "trajectory.csv", trajectory_csv(traj));
    files.push_back("trajectory.csv");

    json v;
    v["termination"] = to_string(traj.termination);
    v["t_end_seconds"] = traj.last_time();
    v["t_end_years"] = traj.last_time() / kSecondsPerYear;
    v["T_a"] = traj.last_state().t_a;
    v["T_s"] = traj.last_state().t_s;
    v["nan_detected"] = traj.nan_detected;
    v["accepted_steps"] = traj.accepted_steps;
    if (traj.termination == Termination::BlowUp && cfg.params.epsilon_a > 2.0) {
        try {
            v["certificate"] =
                certificate_json(blow_up_certificate(cfg.params, cfg.initial, cfg.integrator));
        } catch (const Error& e) {
            v["certificate_error"] = e.what();
        }
    }
    io::atomic_write_text(out / "verdict.json", v.dump(2) + "\n");
    files.push_back("verdict.json");
    return traj.termination == Termination::BlowUp ? 3 : 0;
}

int cmd_equilibria(const ScenarioConfig& cfg, const Common&, const fs::path& out,
                   std::vector<std::string>& files) {
    const std::vector<Equilibrium> eqs = find_equilibria(cfg.params);
    json j;
    j["count"] = eqs.size();
    j["equilibria"] = json::array();
    for (const Equilibrium& e : eqs) j["equilibria"].push_back(eq_json(e));
    const EquilibriumBounds b = equilibrium_bounds(cfg.params);
    j["bounds"] = {{"T_a", {b.ta_lo, b.ta_hi}}, {"T_s", {b.ts_lo, b.ts_hi}}};
    io::atomic_write_text(out / "equilibria.json", j.dump(2) + "\n");
    files.push_back("equilibria.json");

    std::string csv = "T_s,phi,q_beta_s\n";
    const int n = 512;
    const double hi = 1.5 * b.ts_hi;
    for (int i = 0; i <= n; ++i) {
        const double ts = hi * i / n;
        csv += io::g17(ts);
        csv += ',';
        csv += io::g17(phi(cfg.params, ts));
        csv += ',';
        csv += io::g17(cfg.params.q * cfg.params.coalbedo_s.value(ts));
        csv += '\n';
    }
    io::atomic_write_text(out / "phi_curve.csv", csv);
    files.push_back("phi_curve.csv");
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const Common&, const fs::path& out,
              std::vector<std::string>& files) {
    const SweepResult res =
        sweep(cfg.params, cfg.sweep_param, cfg.sweep_from, cfg.sweep_to, cfg.sweep_steps);

    std::string csv = "param,branch,T_a,T_s,class,stable,dTa_dparam,dTs_dparam,flags\n";
    for (const SweepRecord& r : res.records) {
        csv += io::g17(r.value);
        csv += ',' + std::to_string(r.branch);
        csv += ',' + io::g17(r.state.t_a);
        csv += ',' + io::g17(r.state.t_s);
        csv += ',';
        csv += to_string(r.cls);
        csv += ',';
        csv += r.verdict == StabilityVerdict::AsymptoticallyStable ? "true" : "false";
        csv += ',';
        if (r.has_derivative) csv += io::g17(r.deriv.d_ta);
        csv += ',';
        if (r.has_derivative) csv += io::g17(r.deriv.d_ts);
        csv += ',';
        std::string flags;
        if (r.has_derivative && r.deriv.unproven_sign) flags = "unproven_sign";
        if (r.verdict == StabilityVerdict::Degenerate)
            flags += (flags.empty() ? "" : ";") + std::string("degenerate");
        csv += flags;
        csv += '\n';
    }
    io::atomic_write_text(out / "sweep.csv", csv);
    files.push_back("sweep.csv");

    json ev = json::array();
    for (const SweepEvent& e : res.events) {
        ev.push_back({{"kind", e.kind == SweepEvent::Kind::Birth ? "birth" : "death"},
                      {"branch", e.branch},
                      {"param_before", e.param_before},
                      {"param_after", e.param_after}});
    }
    json j;
    j["param"] = to_string(res.param);
    j["events"] = ev;
    io::atomic_write_text(out / "sweep_events.json", j.dump(2) + "\n");
    files.push_back("sweep_events.json");
    return 0;
}

int cmd_jump(const ScenarioConfig& cfg, const Common&, const fs::path& out,
             std::vector<std::string>& files) {
    const JumpResult r =
        greenhouse_jump(cfg.params, cfg.jump_eps_star, cfg.jump_eps_plus, cfg.integrator);
    json j;
    j["eps_star"] = cfg.jump_eps_star;
    j["eps_plus"] = cfg.jump_eps_plus;
    j["old_warm"] = eq_json(r.old_warm);
    j["new_warm"] = eq_json(r.new_warm);
    j["ta_rate0"] = r.ta_rate0;
    j["ts_rate0"] = r.ts_rate0;
    j["ta_rate0_identity"] = r.ta_rate0_identity;
    j["ts_rate0_identity"] = r.ts_rate0_identity;
    j["delta_Ts"] = r.new_warm.state.t_s - r.old_warm.state.t_s;
    io::atomic_write_text(out / "jump.json", j.dump(2) + "\n");
    files.push_back("jump.json");
    io::atomic_write_text(out / "jump_trajectory.csv", trajectory_csv(r.trajectory));
    files.push_back("jump_trajectory.csv");
    return 0;
}

int cmd_hysteresis(const ScenarioConfig& cfg, const Common&, const fs::path& out,
                   std::vector<std::string>& files) {
    if (cfg.hysteresis_path.empty())
        raise(ErrorCode::ConfigError, "[hysteresis] path is required");
    const HysteresisResult r =
        hysteresis_loop(cfg.params, cfg.hysteresis_path, cfg.integrator);

    std::string csv = "epsilon_a,T_a,T_s,captured,termination\n";
    for (const HysteresisRecord& rec : r.records) {
        csv += io::g17(rec.epsilon_a);
        csv += ',' + io::g17(rec.terminal.t_a);
        csv += ',' + io::g17(rec.terminal.t_s);
        csv += ',';
        csv += to_string(rec.captured);
        csv += ',';
        csv += to_string(rec.termination);
        csv += '\n';
    }
    io::atomic_write_text(out / "hysteresis.csv", csv);
    files.push_back("hysteresis.csv");

    json j;
    j["jump_count"] = r.jumps.size();
    j["jumps"] = json::array();
    for (const HysteresisJump& jp : r.jumps) {
        j["jumps"].push_back({{"eps_before", jp.eps_before},
                              {"eps_after", jp.eps_after},
                              {"from", to_string(jp.from)},
                              {"to", to_string(jp.to)}});
    }
    io::atomic_write_text(out / "hysteresis_events.json", j.dump(2) + "\n");
    files.push_back("hysteresis_events.json");
    return 0;
}

int cmd_basins(const ScenarioConfig& cfg, const Common& common, const fs::path& out,
               std::vector<std::string>& files) {
    BasinGridSpec spec;
    spec.nx = cfg.basins_nx;
    spec.ny = cfg.basins_ny;
    spec.threads = common.threads;
    const BasinMap map = basin_map(cfg.params, spec, cfg.integrator);

    std::string csv;
    for (int iy = 0; iy < map.spec.ny; ++iy) {
        for (int ix = 0; ix < map.spec.nx; ++ix) {
            if (ix) csv += ',';
            csv += std::to_string(map.id_at(ix, iy));
        }
        csv += '\n';
    }
    io::atomic_write_text(out / "basin_map.csv", csv);
    files.push_back("basin_map.csv");

    json legend;
    legend["grid"] = {{"nx", map.spec.nx},
                      {"ny", map.spec.ny},
                      {"T_a_range", {map.spec.ta_min, map.spec.ta_max}},
                      {"T_s_range", {map.spec.ts_min, map.spec.ts_max}}};
    legend["attractors"] = json::array();
    for (const Equilibrium& e : map.attractors) legend["attractors"].push_back(eq_json(e));
    legend["distinct_attractors"] = map.distinct_attractors();
    legend["boundary_connected"] = map.boundary_connected();

    try {
        const Separatrix sep =
            trace_separatrix(cfg.params, cfg.separatrix_points, cfg.threshold_tol,
                             cfg.integrator);
        std::string sepcsv = "T_a,T_s\n";
        for (const State& s : sep.points) {
            sepcsv += io::g17(s.t_a);
            sepcsv += ',' + io::g17(s.t_s);
            sepcsv += '\n';
        }
        io::atomic_write_text(out / "separatrix.csv", sepcsv);
        files.push_back("separatrix.csv");
        legend["thresholds"] = {{"T_a", sep.ta_threshold}, {"T_s", sep.ts_threshold}};
        legend["separatrix_converged"] = sep.converged;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NotBistable) throw;
        legend["separatrix_skipped"] = "scenario is not bistable";
    }

    io::atomic_write_text(out / "basin_legend.json", legend.dump(2) + "\n");
    files.push_back("basin_legend.json");
    return 0;
}

int cmd_blowup(const ScenarioConfig& cfg, const Common&, const fs::path& out,
               std::vector<std::string>& files) {
    const BlowupCertificate cert =
        blow_up_certificate(cfg.params, cfg.blowup_initial, cfg.integrator);
    io::atomic_write_text(out / "blowup_certificate.json",
                          certificate_json(cert).dump(2) + "\n");
    files.push_back("blowup_certificate.json");
    io::atomic_write_text(out / "blowup_trajectory.csv", trajectory_csv(cert.trajectory));
    files.push_back("blowup_trajectory.csv");
    return 0;
}

int cmd_convexity(const ScenarioConfig& cfg, const Common&, const fs::path& out,
                  std::vector<std::string>& files) {
    const ConvexityReport rep = convexity_report(cfg.params, cfg.convexity_tol);
    json j;
    j["epsilon_a"] = cfg.params.epsilon_a;
    j["n_root"] = rep.n_root;
    j["n_star_min"] = rep.n_star_min;
    j["rho_at_min"] = rep.rho_at_min;
    j["phi_second_sign_changes"] = rep.phi_second_sign_changes;
    j["phi_second_all_positive"] = rep.phi_second_all_positive;
    j["phi_second_min"] = rep.phi_second_min;
    j["eps_a0_bracket"] = {rep.eps_a0.lo, rep.eps_a0.hi};
    io::atomic_write_text(out / "convexity.json", j.dump(2) + "\n");
    files.push_back("convexity.json");

    std::string csv = "rho,N,N_star\n";
    for (std::size_t i = 0; i < rep.rho_grid.size(); ++i) {
        csv += io::g17(rep.rho_grid[i]);
        csv += ',' + io::g17(rep.n_values[i]);
        csv += ',' + io::g17(rep.n_star_values[i]);
        csv += '\n';
    }
    io::atomic_write_text(out / "n_curves.csv", csv);
    files.push_back("n_curves.csv");
    return 0;
}

int run_command(const std::string& name, const Handler& handler, const Common& common) {
    const auto t0 = std::chrono::steady_clock::now();

    std::string config_text;
    ScenarioConfig cfg;
    try {
        config_text = io::read_text(common.config_path);
        cfg = parse_config_text(config_text);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::IoError) {
            std::cerr << "io error: " << e.what() << "\n";
            return 4;
        }
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const fs::path out(common.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec && !fs::is_directory(out)) {
        std::cerr << "io error: cannot create " << out << "\n";
        return 4;
    }

    std::vector<std::string> files;
    int code = 0;
    try {
        code = handler(cfg, common, out, files);
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::ConfigError:
            case ErrorCode::InvalidParams:
            case ErrorCode::InvalidOptions:
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            case ErrorCode::IoError:
                std::cerr << "io error: " << e.what() << "\n";
                return 4;
            case ErrorCode::CrossCheck:
                std::cerr << "internal check failed: " << e.what() << "\n";
                return 1;
            default:
                std::cerr << "precondition not met: " << e.what() << "\n";
                return 5;
        }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json m;
    m["config_hash"] = io::hex64(io::fnv1a64(config_text));
    m["version"] = EBM_VERSION;
    m["subcommand"] = name;
    m["wall_time_seconds"] = wall;
    m["outputs"] = files;
    try {
        io::atomic_write_text(out / "manifest.json", m.dump(2) + "\n");
    } catch (const Error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
    return code;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"two-layer energy balance model toolkit"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* desc;
        Handler handler;
    };
    const std::vector<Sub> subs = {
        {"simulate", "integrate a trajectory and report the termination verdict", cmd_simulate},
        {"equilibria", "enumerate and classify all equilibria", cmd_equilibria},
        {"sweep", "parameter continuation with sensitivity derivatives", cmd_sweep},
        {"jump", "greenhouse-jump experiment between absorptivities", cmd_jump},
        {"hysteresis", "quasi-static absorptivity loop with jump detection", cmd_hysteresis},
        {"basins", "basin-of-attraction map, axis thresholds and separatrix", cmd_basins},
        {"blowup", "certified finite-time blow-up bracket (epsilon_a > 2)", cmd_blowup},
        {"convexity", "N/N* diagnostics and the epsilon_a0 bracket", cmd_convexity},
    };

    Common common;
    std::string chosen;
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.desc);
        sc->add_option("--config", common.config_path, "scenario config file")->required();
        sc->add_option("--out", common.out_dir, "output directory");
        sc->add_option("--seed", common.seed, "reserved");
        sc->add_option("--threads", common.threads, "worker threads for grid jobs");
        sc->callback([&chosen, name = std::string(s.name)] { chosen = name; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    for (const Sub& s : subs)
        if (chosen == s.name) return run_command(s.name, s.handler, common);
    return 2;
}

} // namespace ebm::cli
