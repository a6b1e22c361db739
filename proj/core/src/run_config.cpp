#include "spinecho/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spinecho/constants.hpp"
#include "spinecho/errors.hpp"

namespace spinecho {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void bad_key(const std::string& section, std::string_view key) {
    throw ConfigError("unknown config key [" + section + "] " + std::string(key));
}

[[noreturn]] void bad_value(const std::string& section, std::string_view key,
                            std::string_view value) {
    throw ConfigError("bad value for [" + section + "] " + std::string(key) + ": '" +
                      std::string(value) + "'");
}

double parse_double(const std::string& sec, std::string_view key, std::string_view v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(std::string(v), &used);
        if (used != v.size()) bad_value(sec, key, v);
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(sec, key, v);
    }
}

std::uint64_t parse_u64(const std::string& sec, std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(sec, key, v);
    return out;
}

bool parse_bool(const std::string& sec, std::string_view key, std::string_view v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    bad_value(sec, key, v);
}

Vec3 parse_vec3(const std::string& sec, std::string_view key, std::string_view v) {
    std::istringstream in{std::string(v)};
    double a, b, c;
    if (!(in >> a >> b >> c)) bad_value(sec, key, v);
    std::string rest;
    if (in >> rest) bad_value(sec, key, v);
    return {a, b, c};
}

Vec3 parse_unit_vec3(const std::string& sec, std::string_view key, std::string_view v) {
    const Vec3 raw = parse_vec3(sec, key, v);
    if (!(raw.norm() > 0.0)) bad_value(sec, key, v);
    return raw.normalized();
}

EffMode parse_mode(const std::string& sec, std::string_view key, std::string_view v) {
    if (v == "mc" || v == "monte_carlo") return EffMode::monte_carlo;
    if (v == "cf" || v == "closed_form") return EffMode::closed_form;
    bad_value(sec, key, v);
}

void apply_key(RunConfig& cfg, const std::string& sec, std::string_view key,
               std::string_view val) {
    if (sec == "geometry") {
        auto& g = cfg.geometry;
        if (key == "lambda1_nm") g.lambda1_nm = parse_double(sec, key, val);
        else if (key == "lambda2_nm") g.lambda2_nm = parse_double(sec, key, val);
        else if (key == "lambda_c_nm") g.lambda_c_nm = parse_double(sec, key, val);
        else if (key == "theta_s_deg") g.theta_s_deg = parse_double(sec, key, val);
        else if (key == "theta_pi_deg") g.theta_pi_deg = parse_double(sec, key, val);
        else if (key == "coupling_dir") g.coupling_dir = parse_unit_vec3(sec, key, val);
        else if (key == "probe_dir") g.probe_dir = parse_unit_vec3(sec, key, val);
        else if (key == "raman1_dir") g.raman1_dir = parse_unit_vec3(sec, key, val);
        else if (key == "raman2_dir") g.raman2_dir = parse_unit_vec3(sec, key, val);
        else bad_key(sec, key);
    } else if (sec == "ensemble") {
        auto& e = cfg.ensemble;
        if (key == "n_atoms") e.n_atoms = parse_u64(sec, key, val);
        else if (key == "temperature_uK") e.temperature_uK = parse_double(sec, key, val);
        else if (key == "cloud_sigma_um") e.cloud_sigma_um = parse_vec3(sec, key, val);
        else if (key == "mode_waist_um") e.mode_waist_um = parse_double(sec, key, val);
        else if (key == "species") e.species = std::string(val);
        else if (key == "atom_mass_kg") e.atom_mass_kg = parse_double(sec, key, val);
        else if (key == "seed") e.seed = parse_u64(sec, key, val);
        else bad_key(sec, key);
    } else if (sec == "pulses") {
        auto& p = cfg.pulses;
        if (key == "epsilon") p.epsilon = parse_double(sec, key, val);
        else if (key == "t1_policy") {
            if (val != "centered") bad_value(sec, key, val);
            p.t1_policy = std::string(val);
        } else if (key == "transit_loss") p.transit_loss = parse_bool(sec, key, val);
        else if (key == "rabi_frequency_khz") p.rabi_frequency_khz = parse_double(sec, key, val);
        else if (key == "rabi_decay_khz") p.rabi_decay_khz = parse_double(sec, key, val);
        else if (key == "rabi_points") p.rabi_points = parse_u64(sec, key, val);
        else if (key == "rabi_tau_max_us") p.rabi_tau_max_us = parse_double(sec, key, val);
        else if (key == "rabi_noise") p.rabi_noise = parse_double(sec, key, val);
        else bad_key(sec, key);
    } else if (sec == "dlcz") {
        auto& d = cfg.dlcz;
        if (key == "p_w_percent") d.p_w_percent = parse_double(sec, key, val);
        else if (key == "p_r_percent") d.p_r_percent = parse_double(sec, key, val);
        else if (key == "g2_initial") d.g2_initial = parse_double(sec, key, val);
        else if (key == "dark_r_fraction") d.dark_r_fraction = parse_double(sec, key, val);
        else if (key == "n_pi_percent") d.n_pi_percent = parse_double(sec, key, val);
        else bad_key(sec, key);
    } else if (sec == "run") {
        auto& r = cfg.run;
        if (key == "mode") r.mode = parse_mode(sec, key, val);
        else if (key == "out_dir") r.out_dir = std::string(val);
        else if (key == "workers") r.workers = static_cast<unsigned>(parse_u64(sec, key, val));
        else if (key == "n_trials") r.n_trials = parse_u64(sec, key, val);
        else bad_key(sec, key);
    } else {
        throw ConfigError("unknown config block [" + sec + "]");
    }
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (const char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001B3ull;
    }
    return hash;
}

RunConfig parse_run_config(std::string_view text) {
    RunConfig cfg;
    cfg.config_hash = fnv1a64(text);

    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        // inline comments: everything from the first '#' or ';' is dropped
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated [block]");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view val = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any [block]");
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        apply_key(cfg, section, key, val);
    }

    // Fail fast on inconsistent values, not at first use.
    make_geometry(cfg.geometry);
    make_ensemble(cfg.ensemble);
    make_dlcz(cfg.dlcz);
    if (cfg.run.workers < 1) throw ConfigError("[run] workers must be >= 1");
    if (!(cfg.pulses.epsilon >= 0.0 && cfg.pulses.epsilon <= 0.5))
        throw ConfigError("[pulses] epsilon must be in [0, 0.5]");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_run_config(buf.str());
    cfg.source_path = path;
    return cfg;
}

BeamGeometry make_geometry(const GeometryConfig& cfg, double hyperfine_hz) {
    constexpr double deg = std::numbers::pi / 180.0;
    try {
        BeamGeometry geom = BeamGeometry::from_angles(
            cfg.lambda_c_nm * 1e-9, cfg.lambda1_nm * 1e-9, cfg.theta_s_deg * deg,
            cfg.theta_pi_deg * deg, cfg.lambda2_nm * 1e-9, hyperfine_hz);
        if (cfg.coupling_dir || cfg.probe_dir || cfg.raman1_dir || cfg.raman2_dir) {
            geom = geom.with_directions(cfg.coupling_dir.value_or(geom.coupling_dir),
                                        cfg.probe_dir.value_or(geom.probe_dir),
                                        cfg.raman1_dir.value_or(geom.raman1_dir),
                                        cfg.raman2_dir.value_or(geom.raman2_dir));
        }
        return geom;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[geometry] ") + e.what());
    }
}

EnsembleSpec make_ensemble(const EnsembleConfig& cfg) {
    EnsembleSpec spec;
    spec.n_atoms = cfg.n_atoms;
    spec.temperature = cfg.temperature_uK * 1e-6;
    spec.cloud_sigma = cfg.cloud_sigma_um * 1e-6;
    spec.mode_waist = cfg.mode_waist_um * 1e-6;
    spec.atom_mass = cfg.atom_mass_kg > 0.0 ? cfg.atom_mass_kg : species_data(cfg.species).mass_kg;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[ensemble] ") + e.what());
    }
    return spec;
}

DlczParams make_dlcz(const DlczConfig& cfg) {
    return calibrate_dlcz(cfg.p_w_percent * 1e-2, cfg.p_r_percent * 1e-2, cfg.g2_initial,
                          cfg.dark_r_fraction, cfg.n_pi_percent * 1e-2);
}

TransitLoss transit_of(const PulsesConfig& cfg) {
    return cfg.transit_loss ? TransitLoss::on : TransitLoss::off;
}

} // namespace spinecho
