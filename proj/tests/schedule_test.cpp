#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "spinecho/constants.hpp"
#include "spinecho/echo_schedule.hpp"
#include "spinecho/errors.hpp"

using namespace spinecho;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

BeamGeometry reference_geometry(double theta_pi_deg = 2.1, double lambda2 = 0.0) {
    return BeamGeometry::from_angles(795e-9, 795e-9, 1.1 * deg, theta_pi_deg * deg, lambda2);
}

EnsembleSpec thermal_spec(std::size_t n_atoms) {
    EnsembleSpec spec;
    spec.n_atoms = n_atoms;
    spec.temperature = 15e-6;
    spec.cloud_sigma = {300e-6, 300e-6, 300e-6};
    spec.mode_waist = 102e-6;
    spec.atom_mass = constants::rb87_mass_kg;
    return spec;
}

} // namespace

TEST_CASE("schedule_for centers the rephasing pair at dt = ratio * T") {
    const BeamGeometry geom = reference_geometry();
    const EchoSchedule sched = schedule_for(geom, 600e-6, 0.03);
    CHECK(sched.delta_t() == doctest::Approx(rephasing_ratio(geom) * 600e-6).epsilon(1e-12));
    CHECK(sched.delta_t() * 1e6 == doctest::Approx(157.15).epsilon(1e-3));
    CHECK(sched.t1 == doctest::Approx((600e-6 - sched.delta_t()) / 2.0).epsilon(1e-12));
    CHECK(sched.pulses[0].sign == -1);
    CHECK(sched.pulses[1].sign == +1);
    CHECK(sched.pulses[0].epsilon == 0.03);
    CHECK(sched.pulses[0].k_pi.magnitude() ==
          doctest::Approx(raman_wavevector(geom).magnitude()).epsilon(1e-12));
}

TEST_CASE("equal angles put the pulses half a window apart") {
    const BeamGeometry geom = BeamGeometry::from_angles(795e-9, 795e-9, 1.1 * deg, 1.1 * deg,
                                                        795e-9);
    const EchoSchedule sched = schedule_for(geom, 100e-6);
    CHECK(sched.delta_t() == doctest::Approx(50e-6).epsilon(1e-12));
}

TEST_CASE("degenerate and infeasible schedules are rejected") {
    const BeamGeometry geom = reference_geometry();
    CHECK_THROWS_AS(schedule_for(geom, 0.0), InfeasibleError);

    const BeamGeometry narrow = reference_geometry(0.4); // ratio > 1
    CHECK(rephasing_ratio(narrow) > 1.0);
    try {
        schedule_for(narrow, 600e-6);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("theta_pi must be at least") != std::string::npos);
        CHECK(min_feasible_theta_pi(narrow) == doctest::Approx(0.55 * deg).epsilon(2e-3));
    }
}

TEST_CASE("closed-form dt scan is an exact Gaussian around the schedule") {
    // equal Raman wavelengths keep k_pi exactly collinear with k_s; the
    // hyperfine-split pair adds a ~1.8e-5 off-axis component that skews the
    // curve at the 1e-6 level (checked separately below)
    const BeamGeometry geom = reference_geometry(2.1, 795e-9);
    const EnsembleSpec spec = thermal_spec(10);
    const double T = 600e-6;
    const double dt_star = rephasing_ratio(geom) * T;
    const double width = scan_half_width_1e(geom, spec);
    CHECK(width * 1e6 == doctest::Approx(45.57).epsilon(2e-3)); // 1/(2 k_pi sigma_v)

    const auto curve = scan_delta_t(geom, spec, T, dt_star - 3.0 * width, dt_star + 3.0 * width,
                                    61, EffMode::closed_form, 0);
    std::vector<double> xs, ys;
    for (const auto& p : curve) {
        xs.push_back(p.delta_t);
        ys.push_back(p.eta);
    }
    const PeakEstimate peak = locate_peak(xs, ys);
    REQUIRE(peak.bracketed);
    CHECK(peak.center == doctest::Approx(dt_star).epsilon(1e-9));
    CHECK(peak.half_width_1e == doctest::Approx(width).epsilon(1e-6));
    const double step = xs[1] - xs[0];
    CHECK(std::abs(peak.center - dt_star) < step);

    // curve symmetry about the peak
    for (std::size_t i = 0; i < xs.size() / 2; ++i) {
        CHECK(ys[i] == doctest::Approx(ys[xs.size() - 1 - i]).epsilon(1e-9));
    }

    // the hyperfine-split default geometry only bends this at the 1e-5 level
    const BeamGeometry split = reference_geometry();
    const double dt_split = rephasing_ratio(split) * T;
    const auto curve2 = scan_delta_t(split, spec, T, dt_split - 2.0 * width,
                                     dt_split + 2.0 * width, 21, EffMode::closed_form, 0);
    for (std::size_t i = 0; i < curve2.size() / 2; ++i)
        CHECK(curve2[i].eta ==
              doctest::Approx(curve2[curve2.size() - 1 - i].eta).epsilon(1e-4));
}

TEST_CASE("vanishing thermal velocity leaves nothing to rephase") {
    const BeamGeometry geom = reference_geometry();
    EnsembleSpec cold = thermal_spec(10);
    cold.temperature = 1e-20;
    const double T = 600e-6;
    const auto curve = scan_delta_t(geom, cold, T, 0.1 * T, 0.9 * T, 11, EffMode::closed_form, 0);
    for (const auto& p : curve) CHECK(p.eta == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monte carlo scan peaks where the closed form does") {
    const BeamGeometry geom = reference_geometry();
    const EnsembleSpec spec = thermal_spec(20000);
    const double T = 600e-6;
    const double dt_star = rephasing_ratio(geom) * T;
    const double width = scan_half_width_1e(geom, spec);
    const auto curve = scan_delta_t(geom, spec, T, dt_star - 3.0 * width, dt_star + 3.0 * width,
                                    41, EffMode::monte_carlo, 4);
    std::vector<double> xs, ys;
    for (const auto& p : curve) {
        xs.push_back(p.delta_t);
        ys.push_back(p.eta);
    }
    const PeakEstimate peak = locate_peak(xs, ys);
    REQUIRE(peak.bracketed);
    CHECK(peak.center == doctest::Approx(dt_star).epsilon(0.01));
    CHECK(peak.half_width_1e == doctest::Approx(width).epsilon(0.05));
}

TEST_CASE("scan rejects bad ranges") {
    const BeamGeometry geom = reference_geometry();
    const EnsembleSpec spec = thermal_spec(10);
    CHECK_THROWS_AS(scan_delta_t(geom, spec, 600e-6, 0.0, 300e-6, 11, EffMode::closed_form, 0),
                    InfeasibleError);
    CHECK_THROWS_AS(scan_delta_t(geom, spec, 600e-6, 100e-6, 700e-6, 11, EffMode::closed_form, 0),
                    InfeasibleError);
    CHECK_THROWS_AS(scan_delta_t(geom, spec, 600e-6, 100e-6, 300e-6, 2, EffMode::closed_form, 0),
                    InfeasibleError);
}

TEST_CASE("ratio vs angle reproduces the 1/theta_pi hyperbola") {
    const BeamGeometry base = reference_geometry();
    const EnsembleSpec spec = thermal_spec(10);
    const double T = 600e-6;
    const std::vector<double> angles = {1.5 * deg, 1.9 * deg, 2.1 * deg, 2.2 * deg, 3.0 * deg};
    const auto curve = ratio_vs_angle(base, spec, angles, T, EffMode::closed_form, 0, 61);
    REQUIRE(curve.size() == angles.size());
    for (const auto& pt : curve) {
        const double theory = base.theta_s / (2.0 * pt.theta_pi);
        CHECK(std::abs(pt.ratio - theory) < 6.0 * scan_half_width_1e(base, spec) / 60.0 / T);
        CHECK(pt.ratio == doctest::Approx(theory).epsilon(2e-3));
    }
    // doubling the angle halves the ratio
    const auto doubled = ratio_vs_angle(base, spec, std::vector<double>{1.1 * deg, 2.2 * deg}, T,
                                        EffMode::closed_form, 0, 61);
    CHECK(doubled[1].ratio == doctest::Approx(0.5 * doubled[0].ratio).epsilon(1e-3));
    CHECK(doubled[1].ratio == doctest::Approx(0.25).epsilon(1e-3)); // theta_pi = 2 theta_s
}

TEST_CASE("locate_peak flags unbracketed maxima") {
    const std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> rising = {0.1, 0.2, 0.4, 0.9};
    const PeakEstimate peak = locate_peak(xs, rising);
    CHECK_FALSE(peak.bracketed);
    CHECK(peak.center == 3.0);
}
