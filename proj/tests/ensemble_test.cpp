#include <doctest.h>

#include <cmath>

#include "spinecho/constants.hpp"
#include "spinecho/ensemble.hpp"

using namespace spinecho;

namespace {

EnsembleSpec rb87_spec(std::size_t n_atoms, double temperature_uK = 15.0) {
    EnsembleSpec spec;
    spec.n_atoms = n_atoms;
    spec.temperature = temperature_uK * 1e-6;
    spec.cloud_sigma = {300e-6, 300e-6, 300e-6};
    spec.mode_waist = 102e-6;
    spec.atom_mass = constants::rb87_mass_kg;
    return spec;
}

} // namespace

TEST_CASE("thermal 1D RMS velocity for Rb87") {
    // oracle sqrt(kB T / m)
    CHECK(thermal_sigma_v(rb87_spec(1, 15.0)) ==
          doctest::Approx(std::sqrt(1.380649e-23 * 15e-6 / 1.44316060e-25)).epsilon(1e-12));
    CHECK(thermal_sigma_v(rb87_spec(1, 15.0)) == doctest::Approx(0.0379).epsilon(1e-3));
    CHECK(thermal_sigma_v(rb87_spec(1, 10.0)) == doctest::Approx(0.0309).epsilon(2e-3));
    // sqrt scaling: 4x temperature doubles the width
    CHECK(thermal_sigma_v(rb87_spec(1, 60.0)) ==
          doctest::Approx(2.0 * thermal_sigma_v(rb87_spec(1, 15.0))).epsilon(1e-12));
}

TEST_CASE("mean thermal speed convention") {
    const EnsembleSpec spec = rb87_spec(1);
    CHECK(mean_thermal_speed(spec) ==
          doctest::Approx(thermal_sigma_v(spec) * std::sqrt(8.0 / std::acos(-1.0)))
              .epsilon(1e-12));
}

TEST_CASE("single-atom sample has unit-length sequences") {
    const AtomSample s = sample_atoms(rb87_spec(1), 7);
    CHECK(s.positions.size() == 1);
    CHECK(s.velocities.size() == 1);
    CHECK(s.weights.size() == 1);
}

TEST_CASE("velocity component RMS matches the thermal width at n = 1e5") {
    const EnsembleSpec spec = rb87_spec(100000);
    const AtomSample s = sample_atoms(spec, 42);
    const double sigma = thermal_sigma_v(spec);
    double ss_x = 0.0, ss_y = 0.0, ss_z = 0.0;
    Vec3 mean{};
    for (const auto& v : s.velocities) {
        ss_x += v.x * v.x;
        ss_y += v.y * v.y;
        ss_z += v.z * v.z;
        mean += v;
    }
    const double n = static_cast<double>(spec.n_atoms);
    for (const double ss : {ss_x, ss_y, ss_z})
        CHECK(std::sqrt(ss / n) == doctest::Approx(sigma).epsilon(0.01));
    // sample mean tends to zero
    CHECK(std::abs(mean.x / n) < 5.0 * sigma / std::sqrt(n));
    CHECK(std::abs(mean.y / n) < 5.0 * sigma / std::sqrt(n));
    CHECK(std::abs(mean.z / n) < 5.0 * sigma / std::sqrt(n));
}

TEST_CASE("position marginals reproduce the cloud widths at n = 1e5") {
    EnsembleSpec spec = rb87_spec(100000);
    spec.cloud_sigma = {200e-6, 300e-6, 500e-6};
    const AtomSample s = sample_atoms(spec, 3);
    double ss_x = 0.0, ss_y = 0.0, ss_z = 0.0;
    for (const auto& r : s.positions) {
        ss_x += r.x * r.x;
        ss_y += r.y * r.y;
        ss_z += r.z * r.z;
    }
    const double n = static_cast<double>(spec.n_atoms);
    CHECK(ss_x / n == doctest::Approx(spec.cloud_sigma.x * spec.cloud_sigma.x).epsilon(0.05));
    CHECK(ss_y / n == doctest::Approx(spec.cloud_sigma.y * spec.cloud_sigma.y).epsilon(0.05));
    CHECK(ss_z / n == doctest::Approx(spec.cloud_sigma.z * spec.cloud_sigma.z).epsilon(0.05));
}

TEST_CASE("mode weights are in [0,1], transversely Gaussian and z-independent") {
    const EnsembleSpec spec = rb87_spec(2000);
    const AtomSample s = sample_atoms(spec, 11);
    for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(s.weights[j] >= 0.0);
        CHECK(s.weights[j] <= 1.0);
        const Vec3 shifted = s.positions[j] + Vec3{0.0, 0.0, 1.23e-3};
        CHECK(mode_weight_at(shifted, spec.mode_waist) == s.weights[j]);
    }
    CHECK(infer_mode_waist(s) == doctest::Approx(spec.mode_waist).epsilon(1e-9));
}

TEST_CASE("sampling is deterministic per seed and worker-count independent") {
    const EnsembleSpec spec = rb87_spec(5000);
    const AtomSample a = sample_atoms(spec, 99);
    const AtomSample b = sample_atoms(spec, 99);
    const AtomSample c = sample_atoms(spec, 100);
    const AtomSample d = sample_atoms(spec, 99, 4);
    REQUIRE(a.size() == b.size());
    bool identical = true, differs = false, identical_mt = true;
    for (std::size_t j = 0; j < a.size(); ++j) {
        identical = identical && a.positions[j] == b.positions[j] &&
                    a.velocities[j] == b.velocities[j] && a.weights[j] == b.weights[j];
        differs = differs || !(a.positions[j] == c.positions[j]);
        identical_mt = identical_mt && a.positions[j] == d.positions[j] &&
                       a.velocities[j] == d.velocities[j];
    }
    CHECK(identical);
    CHECK(differs);
    CHECK(identical_mt);
}

TEST_CASE("invalid ensemble specs are rejected") {
    EnsembleSpec spec = rb87_spec(0);
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = rb87_spec(10);
    spec.temperature = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = rb87_spec(10);
    spec.mode_waist = -1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
