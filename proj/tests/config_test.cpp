#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "spinecho/constants.hpp"
#include "spinecho/errors.hpp"
#include "spinecho/run_config.hpp"

using namespace spinecho;

TEST_CASE("defaults reproduce the reference setup") {
    const RunConfig cfg = parse_run_config("");
    CHECK(cfg.geometry.theta_s_deg == 1.1);
    CHECK(cfg.geometry.theta_pi_deg == 2.1);
    CHECK(cfg.ensemble.n_atoms == 100000);
    CHECK(cfg.ensemble.temperature_uK == 15.0);
    CHECK(cfg.dlcz.g2_initial == 24.3);
    const BeamGeometry geom = make_geometry(cfg.geometry);
    CHECK(geom.lambda_c == doctest::Approx(795e-9).epsilon(1e-12));
    const EnsembleSpec spec = make_ensemble(cfg.ensemble);
    CHECK(spec.atom_mass == doctest::Approx(constants::rb87_mass_kg).epsilon(1e-12));
    CHECK(spec.mode_waist == doctest::Approx(102e-6).epsilon(1e-12));
}

TEST_CASE("config parsing with unit conversion and overrides") {
    const std::string text = R"(# reference run
[geometry]
theta_pi_deg = 1.9
lambda1_nm = 794.98

[ensemble]
n_atoms = 5000
temperature_uK = 10
cloud_sigma_um = 200 250 400
species = Rb87
seed = 777

[pulses]
epsilon = 0.04
transit_loss = on

[run]
mode = mc
workers = 4
)";
    const RunConfig cfg = parse_run_config(text);
    CHECK(cfg.geometry.theta_pi_deg == 1.9);
    CHECK(cfg.geometry.lambda1_nm == 794.98);
    CHECK(cfg.ensemble.seed == 777);
    CHECK(cfg.pulses.epsilon == 0.04);
    CHECK(cfg.pulses.transit_loss);
    CHECK(cfg.run.mode == EffMode::monte_carlo);
    CHECK(cfg.run.workers == 4);

    const EnsembleSpec spec = make_ensemble(cfg.ensemble);
    CHECK(spec.temperature == doctest::Approx(10e-6).epsilon(1e-12));
    CHECK(spec.cloud_sigma.y == doctest::Approx(250e-6).epsilon(1e-12));
    const BeamGeometry geom = make_geometry(cfg.geometry);
    CHECK(geom.theta_pi == doctest::Approx(1.9 * std::numbers::pi / 180.0).epsilon(1e-12));
    CHECK(transit_of(cfg.pulses) == TransitLoss::on);
}

TEST_CASE("strict parsing rejects unknown keys, blocks and bad values") {
    CHECK_THROWS_AS(parse_run_config("[geometry]\nbogus_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[warp_drive]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[ensemble]\nn_atoms = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[ensemble]\nn_atoms =\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("orphan = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[run]\nmode = psychic\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[ensemble]\ncloud_sigma_um = 1 2\n"), ConfigError);
    try {
        parse_run_config("[dlcz]\nn_pi_percnt = 0.8\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("n_pi_percnt") != std::string::npos);
    }
}

TEST_CASE("inconsistent physics in a config is caught at parse time") {
    CHECK_THROWS_AS(parse_run_config("[ensemble]\ntemperature_uK = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[ensemble]\nspecies = Unobtainium\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[pulses]\nepsilon = 0.9\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[dlcz]\ng2_initial = 0.5\n"), ConfigError);
}

TEST_CASE("the only schedule policy is the centered pulse pair") {
    CHECK(parse_run_config("[pulses]\nt1_policy = centered\n").pulses.t1_policy == "centered");
    CHECK_THROWS_AS(parse_run_config("[pulses]\nt1_policy = left\n"), ConfigError);
}

TEST_CASE("inline comments are stripped from values and section lines") {
    const RunConfig cfg = parse_run_config(
        "[ensemble]  # the cloud\nn_atoms = 42   # small\nseed = 7\t; tab comment\n");
    CHECK(cfg.ensemble.n_atoms == 42);
    CHECK(cfg.ensemble.seed == 7);
}

TEST_CASE("fnv1a64 matches the reference vectors and keys the file bytes") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(parse_run_config("[run]\nworkers = 2\n").config_hash !=
          parse_run_config("[run]\nworkers = 3\n").config_hash);
}

TEST_CASE("load_run_config hashes exactly the file bytes") {
    const std::string path = "spinecho_config_test.cfg";
    const std::string text = "[ensemble]\nseed = 31415\n";
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    const RunConfig cfg = load_run_config(path);
    CHECK(cfg.ensemble.seed == 31415);
    CHECK(cfg.config_hash == fnv1a64(text));
    CHECK(cfg.source_path == path);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_run_config("definitely_not_here.cfg"), ConfigError);
}

TEST_CASE("dlcz block calibrates the click model") {
    const RunConfig cfg = parse_run_config("");
    const DlczParams params = make_dlcz(cfg.dlcz);
    CHECK(params.chi == doctest::Approx(0.9 / 24.2).epsilon(1e-12));
    CHECK(params.n_pi == doctest::Approx(0.008).epsilon(1e-12));
}
