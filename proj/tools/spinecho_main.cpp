// spinecho: batch CLI for the spin-echo rephasing simulator. Every
// subcommand reads one run-configuration file (all keys optional, strict
// parsing), writes CSV/JSON artifacts stamped with the config hash, seed and
// tool version, and is byte-deterministic for a fixed (config, seed) at any
// worker count.
//
// Exit codes: 0 ok, 2 config error, 3 infeasible physics, 4 non-convergence.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "report.hpp"
#include "spinecho/constants.hpp"
#include "spinecho/echo_schedule.hpp"
#include "spinecho/ensemble.hpp"
#include "spinecho/errors.hpp"
#include "spinecho/fitting.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/noise.hpp"
#include "spinecho/parallel.hpp"
#include "spinecho/photon_stats.hpp"
#include "spinecho/rng.hpp"
#include "spinecho/run_config.hpp"
#include "spinecho/spinwave.hpp"
#include "spinecho/version.hpp"

namespace {

using namespace spinecho;
using spinecho::cli::CsvWriter;
using spinecho::cli::fmt;
using spinecho::cli::ordered_json;
using spinecho::cli::RunMeta;

constexpr double rad2deg = 180.0 / std::numbers::pi;
constexpr double deg2rad = std::numbers::pi / 180.0;

struct Session {
    RunConfig cfg;
    BeamGeometry geom;
    EnsembleSpec spec;
    DlczParams dlcz;
    RunMeta meta;
    std::string out_dir;
    unsigned workers = 1;
    std::uint64_t seed = 0;
    EffMode mode = EffMode::closed_form;
    TransitLoss transit = TransitLoss::off;
    double epsilon = 0.0;

    std::string path_for(const std::string& file) const {
        return (std::filesystem::path(out_dir) / file).string();
    }
    double tau_s() const {
        return 1.0 / (spinwave_wavevector(geom).magnitude() * thermal_sigma_v(spec));
    }
    ordered_json meta_json() const { return spinecho::cli::meta_json(meta); }
    std::vector<std::string> setup_meta() const {
        return {"theta_s_deg: " + fmt(geom.theta_s * rad2deg),
                "theta_pi_deg: " + fmt(geom.theta_pi * rad2deg),
                "temperature_uK: " + fmt(spec.temperature * 1e6),
                "n_atoms: " + std::to_string(spec.n_atoms)};
    }
};

Session make_session(const std::string& config_path, const std::string& subcommand,
                     const std::optional<std::uint64_t>& seed_flag,
                     const std::optional<std::string>& out_flag,
                     const std::optional<std::string>& mode_flag,
                     const std::optional<unsigned>& workers_flag) {
    Session s;
    s.cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    const SpeciesData species = species_data(s.cfg.ensemble.species);
    s.geom = make_geometry(s.cfg.geometry, species.hyperfine_hz);
    s.spec = make_ensemble(s.cfg.ensemble);
    s.dlcz = make_dlcz(s.cfg.dlcz);
    s.seed = seed_flag.value_or(s.cfg.ensemble.seed);
    s.out_dir = out_flag.value_or(s.cfg.run.out_dir);
    s.workers = workers_flag.value_or(s.cfg.run.workers);
    if (s.workers < 1) throw ConfigError("--workers must be >= 1");
    s.mode = s.cfg.run.mode;
    if (mode_flag) {
        if (*mode_flag == "mc") s.mode = EffMode::monte_carlo;
        else if (*mode_flag == "cf") s.mode = EffMode::closed_form;
        else throw ConfigError("--mode must be mc or cf");
    }
    s.transit = transit_of(s.cfg.pulses);
    s.epsilon = s.cfg.pulses.epsilon;
    s.meta.subcommand = subcommand;
    s.meta.config_hash = s.cfg.config_hash;
    s.meta.seed = s.seed;
    s.meta.mode = s.mode == EffMode::monte_carlo ? "mc" : "cf";
    std::filesystem::create_directories(s.out_dir);
    return s;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

ordered_json fit_json(const FitResult& fit) {
    ordered_json j;
    j["model"] = fit.model;
    j["converged"] = fit.converged;
    if (!fit.flag.empty()) j["flag"] = fit.flag;
    j["n_iter"] = fit.n_iter;
    j["residual_rms"] = fit.residual_rms;
    ordered_json params, errs;
    for (const auto& [k, v] : fit.parameters) params[k] = v;
    for (const auto& [k, v] : fit.stderrs) errs[k] = v;
    j["parameters"] = params;
    j["stderrs"] = errs;
    return j;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_schedule(const Session& s, double t_us) {
    const double T = t_us * 1e-6;
    const EchoSchedule sched = schedule_for(s.geom, T, s.epsilon);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["T_us"] = t_us;
    j["t1_us"] = sched.t1 * 1e6;
    j["t2_us"] = sched.t2 * 1e6;
    j["dt_us"] = sched.delta_t() * 1e6;
    j["ratio"] = rephasing_ratio(s.geom);
    j["theta_s_deg"] = s.geom.theta_s * rad2deg;
    j["theta_pi_deg"] = s.geom.theta_pi * rad2deg;
    j["epsilon"] = s.epsilon;
    j["sigma_v_rms_mps"] = thermal_sigma_v(s.spec);
    j["mean_thermal_speed_mps"] = mean_thermal_speed(s.spec);
    j["tau_s_us"] = s.tau_s() * 1e6;
    spinecho::cli::write_json_file(s.path_for("schedule.json"), j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_rabi(const Session& s) {
    const auto& p = s.cfg.pulses;
    const double freq = p.rabi_frequency_khz * 1e3;
    const double gamma = p.rabi_decay_khz * 1e3;
    const std::size_t n = std::max<std::size_t>(p.rabi_points, 8);
    const auto taus = linspace(0.0, p.rabi_tau_max_us * 1e-6, n);

    // Ground-state transfer signal (1 - cos)/2 with the fitted-model shape.
    const double amplitude = -0.5, offset = 0.5;
    std::vector<double> y(n);
    Rng noise_rng(s.seed, 0x72616269ull); // dedicated substream for rabi noise
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = amplitude * std::cos(2.0 * std::numbers::pi * freq * taus[i]) *
                   std::exp(-gamma * taus[i]) +
               offset;
        if (p.rabi_noise > 0.0)
            y[i] += p.rabi_noise * std::abs(amplitude) * noise_rng.normal_pair().first;
    }

    CsvWriter csv(s.path_for("rabi.csv"), s.meta, {}, "tau_us,intensity");
    for (std::size_t i = 0; i < n; ++i) csv.row({fmt(taus[i] * 1e6), fmt(y[i])});

    const FitResult fit = fit_damped_cosine(taus, y);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["generator"] = {{"frequency_khz", p.rabi_frequency_khz},
                      {"decay_rate_khz", p.rabi_decay_khz},
                      {"noise", p.rabi_noise}};
    j["fit"] = fit_json(fit);
    if (fit.converged) {
        j["fit_frequency_khz"] = fit.param("frequency") * 1e-3;
        j["fit_decay_rate_khz"] = fit.param("decay_rate") * 1e-3;
        j["pi_time_us"] = 1e6 / (2.0 * fit.param("frequency"));
        j["pi_pulse_fidelity"] = pi_pulse_fidelity(fit);
    }
    spinecho::cli::write_json_file(s.path_for("rabi.json"), j);
    std::cout << "wrote " << s.path_for("rabi.csv") << ", " << s.path_for("rabi.json") << "\n";
    return fit.converged ? 0 : 4;
}

int cmd_dephase(const Session& s, double t_max_us, std::size_t points) {
    const double t_max = t_max_us > 0.0 ? t_max_us * 1e-6 : 3.0 * s.tau_s();
    const auto ts = linspace(0.0, t_max, points);
    std::vector<double> eta(points), err(points, 0.0);

    if (s.mode == EffMode::monte_carlo) {
        const AtomSample atoms = sample_atoms(s.spec, s.seed, s.workers);
        parallel_for(points, s.workers, [&](std::size_t i) {
            const auto est = free_decay_efficiency_mc(atoms, s.geom, ts[i], s.transit);
            eta[i] = est.value;
            err[i] = est.stderr;
        });
    } else {
        for (std::size_t i = 0; i < points; ++i)
            eta[i] = retrieval_efficiency_closed_form(s.geom, s.spec, nullptr, ts[i], s.transit);
    }

    CsvWriter csv(s.path_for("dephase.csv"), s.meta, s.setup_meta(), "T_us,eta,stderr");
    for (std::size_t i = 0; i < points; ++i)
        csv.row({fmt(ts[i] * 1e6), fmt(eta[i]), fmt(err[i])});

    const FitResult fit = fit_lifetime_1e(ts, eta, DecayForm::automatic);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["tau_s_theory_us"] = s.tau_s() * 1e6;
    j["sigma_v_rms_mps"] = thermal_sigma_v(s.spec);
    j["mean_thermal_speed_mps"] = mean_thermal_speed(s.spec);
    j["fit"] = fit_json(fit);
    if (fit.converged) j["fitted_lifetime_us"] = fit.param("tau") * 1e6;
    spinecho::cli::write_json_file(s.path_for("dephase.json"), j);
    std::cout << "wrote " << s.path_for("dephase.csv") << ", " << s.path_for("dephase.json")
              << "\n";
    return 0;
}

int cmd_echo_scan(const Session& s, double t_us, double dt_min_us, double dt_max_us,
                  std::size_t points) {
    const double T = t_us * 1e-6;
    const double dt_star = rephasing_ratio(s.geom) * T;
    const double width = scan_half_width_1e(s.geom, s.spec);
    double dt_min = dt_min_us > 0.0 ? dt_min_us * 1e-6 : std::max(dt_star - 3.0 * width, T * 1e-4);
    double dt_max =
        dt_max_us > 0.0 ? dt_max_us * 1e-6 : std::min(dt_star + 3.0 * width, T * (1.0 - 1e-4));
    const auto curve =
        scan_delta_t(s.geom, s.spec, T, dt_min, dt_max, points, s.mode, s.seed, s.epsilon,
                     s.workers);

    std::vector<std::string> extra = s.setup_meta();
    extra.push_back("T_us: " + fmt(t_us));
    CsvWriter csv(s.path_for("echo_scan.csv"), s.meta, extra, "dt_us,eta,stderr");
    std::vector<double> xs(points), ys(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = curve[i].delta_t;
        ys[i] = curve[i].eta;
        csv.row({fmt(curve[i].delta_t * 1e6), fmt(curve[i].eta), fmt(curve[i].stderr)});
    }

    const PeakEstimate grid_peak = locate_peak(xs, ys);
    const FitResult fit = fit_gaussian_peak(xs, ys);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["T_us"] = t_us;
    j["dt_theory_us"] = dt_star * 1e6;
    j["width_theory_us"] = width * 1e6; // 1/(2 k_pi sigma_v)
    j["grid_peak_dt_us"] = grid_peak.center * 1e6;
    j["fit"] = fit_json(fit);
    if (fit.converged) {
        j["fit_center_us"] = fit.param("center") * 1e6;
        j["fit_half_width_1e_us"] = fit.param("half_width_1e") * 1e6;
        j["fit_ratio"] = fit.param("center") / T;
    }
    spinecho::cli::write_json_file(s.path_for("echo_scan.json"), j);
    std::cout << "wrote " << s.path_for("echo_scan.csv") << ", " << s.path_for("echo_scan.json")
              << "\n";
    return fit.converged ? 0 : 4;
}

int cmd_ratio_scan(const Session& s, const std::vector<double>& angles_deg, double t_us,
                   std::size_t points) {
    std::vector<double> angles(angles_deg.size());
    for (std::size_t i = 0; i < angles_deg.size(); ++i) angles[i] = angles_deg[i] * deg2rad;
    const double T = t_us * 1e-6;
    const auto curve = ratio_vs_angle(s.geom, s.spec, angles, T, s.mode, s.seed, points,
                                      s.workers);

    std::vector<std::string> extra = s.setup_meta();
    extra.push_back("T_us: " + fmt(t_us));
    CsvWriter csv(s.path_for("ratio_scan.csv"), s.meta, extra, "theta_pi_deg,ratio,ratio_theory");
    ordered_json rows = ordered_json::array();
    for (const auto& pt : curve) {
        const double theory = s.geom.theta_s / (2.0 * pt.theta_pi);
        csv.row({fmt(pt.theta_pi * rad2deg), fmt(pt.ratio), fmt(theory)});
        rows.push_back({{"theta_pi_deg", pt.theta_pi * rad2deg},
                        {"ratio", pt.ratio},
                        {"ratio_theory", theory}});
    }
    ordered_json j;
    j["meta"] = s.meta_json();
    j["T_us"] = t_us;
    j["theta_s_deg"] = s.geom.theta_s * rad2deg;
    j["points"] = rows;
    spinecho::cli::write_json_file(s.path_for("ratio_scan.json"), j);
    std::cout << "wrote " << s.path_for("ratio_scan.csv") << ", " << s.path_for("ratio_scan.json")
              << "\n";
    return 0;
}

int cmd_noise_map(const Session& s, std::size_t grid_points, double span_widths) {
    const AtomSample atoms = sample_atoms(s.spec, s.seed, s.workers);
    NoiseGrid grid;
    grid.nx = grid.ny = grid_points;
    const double lobe_width = 2.0 * s.geom.lambda_c / (std::numbers::pi * s.spec.mode_waist);
    grid.half_span_x = grid.half_span_y = span_widths * lobe_width;
    const NoiseMap map = directional_noise_map(atoms, s.geom, s.epsilon, grid, 2, s.workers,
                                               s.spec.mode_waist);

    std::vector<std::string> extra = s.setup_meta();
    extra.push_back("lobe_center_deg: " + fmt(map.lobe_center_angle * rad2deg));
    extra.push_back("epsilon: " + fmt(s.epsilon));
    CsvWriter csv(s.path_for("noise_map.csv"), s.meta, extra,
                  "theta_x_deg,theta_y_deg,photons_per_shot");
    for (std::size_t iy = 0; iy < map.ny(); ++iy)
        for (std::size_t ix = 0; ix < map.nx(); ++ix)
            csv.row({fmt(map.theta_x[ix] * rad2deg), fmt(map.theta_y[iy] * rad2deg),
                     fmt(map.at(ix, iy))});

    // Peak position and emergent widths from the two axis cuts through it.
    std::size_t px = 0, py = 0;
    double peak = -1.0;
    for (std::size_t iy = 0; iy < map.ny(); ++iy)
        for (std::size_t ix = 0; ix < map.nx(); ++ix)
            if (map.at(ix, iy) > peak) {
                peak = map.at(ix, iy);
                px = ix;
                py = iy;
            }
    std::vector<double> cut_x(map.nx()), cut_y(map.ny());
    for (std::size_t ix = 0; ix < map.nx(); ++ix) cut_x[ix] = map.at(ix, py);
    for (std::size_t iy = 0; iy < map.ny(); ++iy) cut_y[iy] = map.at(px, iy);
    const FitResult fx = fit_gaussian_peak(map.theta_x, cut_x);
    const FitResult fy = fit_gaussian_peak(map.theta_y, cut_y);

    const double far_floor = far_angle_mean(map);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["lobe_center_deg"] = map.lobe_center_angle * rad2deg;
    j["peak_offset_deg"] = {map.theta_x[px] * rad2deg, map.theta_y[py] * rad2deg};
    j["peak_photons_per_cell"] = peak;
    j["floor_photons_per_cell"] = map.floor_photons_per_cell;
    j["far_angle_mean_per_cell"] = far_floor;
    j["peak_to_floor"] = peak / map.floor_photons_per_cell;
    j["n_eff"] = map.n_eff;
    j["covers_lobe"] = map.covers_lobe;
    j["width_theory_deg"] = lobe_width * rad2deg; // full 1/e width 2 lambda/(pi w)
    if (fx.converged) j["fit_full_width_x_deg"] = 2.0 * fx.param("half_width_1e") * rad2deg;
    if (fy.converged) j["fit_full_width_y_deg"] = 2.0 * fy.param("half_width_1e") * rad2deg;
    spinecho::cli::write_json_file(s.path_for("noise_map.json"), j);
    std::cout << "wrote " << s.path_for("noise_map.csv") << ", " << s.path_for("noise_map.json")
              << "\n";
    return 0;
}

int cmd_g2_curve(const Session& s, bool echo_on, double t_max_us, std::size_t points,
                 bool counts_mode) {
    const double t_max = t_max_us > 0.0 ? t_max_us * 1e-6 : (echo_on ? 4.0e-3 : 3.0 * s.tau_s());
    const auto ts = linspace(0.0, t_max, points);
    G2CurveOptions opts;
    opts.echo_on = echo_on;
    opts.epsilon = s.epsilon;
    opts.mode = s.mode;
    opts.transit = s.transit;
    opts.seed = s.seed;
    opts.workers = s.workers;
    if (counts_mode) opts.n_trials = s.cfg.run.n_trials;
    const auto curve = g2_curve(s.dlcz, s.geom, s.spec, ts, opts);

    std::vector<std::string> extra = s.setup_meta();
    extra.push_back(std::string("echo: ") + (echo_on ? "on" : "off"));
    if (counts_mode) extra.push_back("n_trials: " + std::to_string(opts.n_trials));
    CsvWriter csv(s.path_for("g2_curve.csv"), s.meta, extra,
                  "T_us,p_w,p_r,p_wr,g2,stderr,echo_on,feasible");
    std::vector<double> fit_t, fit_g2;
    double max_t_above2 = -1.0, initial_g2 = 0.0;
    bool have_initial = false;
    for (const auto& entry : curve) {
        const auto& pt = entry.point;
        csv.row({fmt(pt.T * 1e6), fmt(pt.p_w), fmt(pt.p_r), fmt(pt.p_wr), fmt(pt.g2),
                 fmt(pt.stderr_g2), echo_on ? "1" : "0", entry.feasible ? "1" : "0"});
        if (!entry.feasible) continue;
        if (!have_initial) {
            initial_g2 = pt.g2;
            have_initial = true;
        }
        fit_t.push_back(pt.T);
        fit_g2.push_back(pt.g2);
        if (pt.g2 > 2.0) max_t_above2 = std::max(max_t_above2, pt.T);
    }

    const FitResult fit = fit_lifetime_1e(fit_t, fit_g2, DecayForm::automatic);
    ordered_json j;
    j["meta"] = s.meta_json();
    j["echo_on"] = echo_on;
    j["counts_mode"] = counts_mode;
    if (counts_mode) j["n_trials"] = opts.n_trials;
    j["initial_g2"] = initial_g2;
    j["max_T_us_g2_above_2"] = max_t_above2 >= 0.0 ? max_t_above2 * 1e6 : -1.0;
    j["n_pi"] = echo_on ? s.dlcz.n_pi : 0.0;
    j["pulse_survival"] = echo_on ? (1.0 - s.epsilon) * (1.0 - s.epsilon) : 1.0;
    j["fit"] = fit_json(fit);
    if (fit.converged) j["fitted_lifetime_us"] = fit.param("tau") * 1e6;
    spinecho::cli::write_json_file(s.path_for("g2_curve.json"), j);
    std::cout << "wrote " << s.path_for("g2_curve.csv") << ", " << s.path_for("g2_curve.json")
              << "\n";
    return 0;
}

std::vector<std::vector<double>> read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");
    std::vector<std::vector<double>> cols(3);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream ss(line);
        double x, y, e;
        if (!(ss >> x >> y)) continue; // header or junk line
        cols[0].push_back(x);
        cols[1].push_back(y);
        if (ss >> e) cols[2].push_back(e);
    }
    if (cols[0].size() < 3) throw ConfigError("data file '" + path + "' has too few rows");
    if (!cols[2].empty() && cols[2].size() != cols[0].size())
        throw ConfigError("data file '" + path + "' mixes rows with and without yerr");
    return cols;
}

int cmd_fit(const Session& s, const std::string& input, const std::string& model) {
    const auto cols = read_xy_csv(input);
    std::span<const double> x(cols[0]), y(cols[1]), yerr(cols[2]);

    FitResult fit;
    if (model == "damped-cosine") fit = fit_damped_cosine(x, y, yerr);
    else if (model == "gaussian-peak") fit = fit_gaussian_peak(x, y, yerr);
    else if (model == "lifetime-exp") fit = fit_lifetime_1e(x, y, DecayForm::exponential, yerr);
    else if (model == "lifetime-gauss") fit = fit_lifetime_1e(x, y, DecayForm::gaussian, yerr);
    else if (model == "lifetime-auto") fit = fit_lifetime_1e(x, y, DecayForm::automatic, yerr);
    else throw ConfigError("unknown fit model '" + model + "'");

    ordered_json j;
    j["meta"] = s.meta_json();
    j["input"] = input;
    j["n_points"] = cols[0].size();
    j["fit"] = fit_json(fit);
    if (fit.converged && fit.model == "damped_cosine")
        j["pi_pulse_fidelity"] = pi_pulse_fidelity(fit);
    spinecho::cli::write_json_file(s.path_for("fit.json"), j);
    std::cout << j.dump(2) << "\n";
    return fit.converged ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-echo rephasing simulator for an atomic-ensemble quantum memory"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> out_flag, mode_flag;
    std::optional<unsigned> workers_flag;
    app.add_option("--config", config_path, "run-configuration file");
    app.add_option("--seed", seed_flag, "override the ensemble seed");
    app.add_option("--out", out_flag, "output directory");
    app.add_option("--mode", mode_flag, "mc|cf efficiency evaluation");
    app.add_option("--workers", workers_flag, "worker threads (results are identical)");

    double t_us = 600.0, t_max_us = 0.0, dt_min_us = 0.0, dt_max_us = 0.0;
    std::size_t points = 61;
    std::string echo_flag = "off";
    std::vector<double> angles_deg = {1.5, 1.9, 2.1, 2.5};
    std::size_t grid_points = 101;
    double span_widths = 5.0;
    std::string fit_input, fit_model = "lifetime-auto";

    auto* schedule = app.add_subcommand("schedule", "print the rephasing schedule for one T");
    schedule->add_option("--T-us", t_us, "storage time");
    auto* rabi = app.add_subcommand("rabi", "Raman Rabi curve plus damped-cosine fit");
    auto* dephase = app.add_subcommand("dephase", "storage efficiency vs T, no echo");
    dephase->add_option("--T-max-us", t_max_us, "scan end (0 = 3 tau_s)");
    dephase->add_option("--points", points, "number of scan points");
    auto* echo_scan = app.add_subcommand("echo-scan", "efficiency vs pulse interval at fixed T");
    echo_scan->add_option("--T-us", t_us, "storage time");
    echo_scan->add_option("--dt-min-us", dt_min_us, "scan start (0 = auto)");
    echo_scan->add_option("--dt-max-us", dt_max_us, "scan end (0 = auto)");
    echo_scan->add_option("--points", points, "number of scan points");
    auto* ratio_scan = app.add_subcommand("ratio-scan", "optimal dt/T vs Raman angle");
    ratio_scan->add_option("--theta-pi-deg", angles_deg, "Raman angles to scan");
    ratio_scan->add_option("--T-us", t_us, "storage time");
    ratio_scan->add_option("--points", points, "points per angle scan");
    auto* noise_map = app.add_subcommand("noise-map", "angular map of pi-pulse read-out noise");
    noise_map->add_option("--grid-points", grid_points, "cells per axis");
    noise_map->add_option("--span-widths", span_widths, "half-span in lobe full widths");
    auto* g2 = app.add_subcommand("g2-curve", "DLCZ cross-correlation vs storage time");
    g2->add_option("--echo", echo_flag, "on|off rephasing pulses");
    g2->add_option("--T-max-us", t_max_us, "scan end (0 = auto)");
    g2->add_option("--points", points, "number of T points");
    std::string counts_flag = "off";
    g2->add_option("--counts", counts_flag,
                   "on|off: estimate each point from [run] n_trials Bernoulli trials");
    auto* fit_cmd = app.add_subcommand("fit", "fit a CSV (x, y[, yerr]) with a named model");
    fit_cmd->add_option("--input", fit_input, "data file")->required();
    fit_cmd->add_option("--model", fit_model,
                        "damped-cosine|gaussian-peak|lifetime-exp|lifetime-gauss|lifetime-auto");
    for (auto* sub : {schedule, rabi, dephase, echo_scan, ratio_scan, noise_map, g2, fit_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        Session s = make_session(config_path, sub, seed_flag, out_flag, mode_flag, workers_flag);
        if (sub == "schedule") return cmd_schedule(s, t_us);
        if (sub == "rabi") return cmd_rabi(s);
        if (sub == "dephase") return cmd_dephase(s, t_max_us, points);
        if (sub == "echo-scan") return cmd_echo_scan(s, t_us, dt_min_us, dt_max_us, points);
        if (sub == "ratio-scan") return cmd_ratio_scan(s, angles_deg, t_us, points);
        if (sub == "noise-map") return cmd_noise_map(s, grid_points, span_widths);
        if (sub == "g2-curve") {
            if (echo_flag != "on" && echo_flag != "off")
                throw ConfigError("--echo must be on or off");
            if (counts_flag != "on" && counts_flag != "off")
                throw ConfigError("--counts must be on or off");
            return cmd_g2_curve(s, echo_flag == "on", t_max_us, points, counts_flag == "on");
        }
        if (sub == "fit") return cmd_fit(s, fit_input, fit_model);
        throw ConfigError("unknown subcommand " + sub);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
