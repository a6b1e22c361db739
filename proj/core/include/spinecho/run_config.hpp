#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "spinecho/echo_schedule.hpp"
#include "spinecho/ensemble.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/photon_stats.hpp"
#include "spinecho/spinwave.hpp"
#include "spinecho/vec3.hpp"

namespace spinecho {

// Run-configuration file: flat text, [block] sections, key = value lines,
// '#' or ';' comments, strict (any unknown block or key is rejected before
// any computation). Units follow the lab presentation (nm, deg, uK, um, us,
// percent) and are converted here at the boundary. Every key has a default,
// so an empty file reproduces the reference setup.

struct GeometryConfig {
    double lambda1_nm = 795.0;
    double lambda2_nm = 0.0; // 0 = derive from lambda1 and the species splitting
    double lambda_c_nm = 795.0;
    double theta_s_deg = 1.1;
    double theta_pi_deg = 2.1;
    std::optional<Vec3> coupling_dir;
    std::optional<Vec3> probe_dir;
    std::optional<Vec3> raman1_dir;
    std::optional<Vec3> raman2_dir;
};

struct EnsembleConfig {
    std::uint64_t n_atoms = 100000;
    double temperature_uK = 15.0;
    Vec3 cloud_sigma_um{300.0, 300.0, 300.0};
    double mode_waist_um = 102.0;
    std::string species = "Rb87";
    double atom_mass_kg = 0.0; // 0 = species table
    std::uint64_t seed = 12345;
};

struct PulsesConfig {
    double epsilon = 0.03;
    std::string t1_policy = "centered"; // only policy: t1 = (T - dt)/2
    bool transit_loss = false;
    double rabi_frequency_khz = 87.1;
    double rabi_decay_khz = 13.4;
    std::uint64_t rabi_points = 161;
    double rabi_tau_max_us = 46.0;
    double rabi_noise = 0.0; // additive Gaussian noise, fraction of amplitude
};

struct DlczConfig {
    double p_w_percent = 0.35;
    double p_r_percent = 0.28;
    double g2_initial = 24.3;
    double dark_r_fraction = 0.1;
    double n_pi_percent = 0.8;
};

struct RunBlock {
    EffMode mode = EffMode::closed_form;
    std::string out_dir = ".";
    unsigned workers = 1;
    std::uint64_t n_trials = 1000000;
};

struct RunConfig {
    GeometryConfig geometry;
    EnsembleConfig ensemble;
    PulsesConfig pulses;
    DlczConfig dlcz;
    RunBlock run;
    std::uint64_t config_hash = 0; // FNV-1a of the file bytes
    std::string source_path;
};

/// Parses and validates a config file; throws ConfigError naming the
/// offending block/key.
RunConfig load_run_config(const std::string& path);

/// Parses config text (used by load_run_config and the tests).
RunConfig parse_run_config(std::string_view text);

BeamGeometry make_geometry(const GeometryConfig& cfg, double hyperfine_hz = -1.0);
EnsembleSpec make_ensemble(const EnsembleConfig& cfg);
DlczParams make_dlcz(const DlczConfig& cfg);
TransitLoss transit_of(const PulsesConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);

} // namespace spinecho
