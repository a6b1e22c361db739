#include "spinecho/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spinecho/constants.hpp"
#include "spinecho/errors.hpp"

namespace spinecho {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Vec3 tilt_in_xz(double angle_from_z) {
    return {std::sin(angle_from_z), 0.0, std::cos(angle_from_z)};
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_unit(const Vec3& v, const char* name) {
    if (std::abs(v.norm() - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(name) + " direction is not unit length");
}

void validate(const BeamGeometry& g) {
    require(g.lambda1 > 0 && g.lambda2 > 0 && g.lambda_c > 0, "wavelengths must be positive");
    require(g.theta_s > 0 && g.theta_s < std::numbers::pi / 2, "theta_s must be in (0, pi/2)");
    require(g.theta_pi > 0 && g.theta_pi < std::numbers::pi / 2, "theta_pi must be in (0, pi/2)");
    check_unit(g.coupling_dir, "coupling");
    check_unit(g.probe_dir, "probe");
    check_unit(g.raman1_dir, "raman1");
    check_unit(g.raman2_dir, "raman2");
}

} // namespace

BeamGeometry BeamGeometry::from_angles(double lambda_c, double lambda1, double theta_s,
                                       double theta_pi, double lambda2, double hyperfine_hz) {
    if (lambda2 <= 0.0) {
        // Beam 2 drives the |g> <-> |e> leg, red of beam 1 by the splitting.
        const double split = hyperfine_hz >= 0.0 ? hyperfine_hz : constants::rb87_hyperfine_hz;
        const double nu2 = constants::speed_of_light / lambda1 - split;
        lambda2 = constants::speed_of_light / nu2;
    }
    BeamGeometry g;
    g.lambda1 = lambda1;
    g.lambda2 = lambda2;
    g.lambda_c = lambda_c;
    g.theta_s = theta_s;
    g.theta_pi = theta_pi;
    g.coupling_dir = {0.0, 0.0, 1.0};
    g.probe_dir = tilt_in_xz(theta_s);
    // Raman pair bisected at theta_s/2 so k_pi = k2 - k1 lands parallel to
    // k_s = k_p - k_c (both along (cos(theta_s/2), 0, -sin(theta_s/2))).
    g.raman1_dir = tilt_in_xz(theta_s / 2.0 - theta_pi / 2.0);
    g.raman2_dir = tilt_in_xz(theta_s / 2.0 + theta_pi / 2.0);
    validate(g);
    return g;
}

BeamGeometry BeamGeometry::with_directions(const Vec3& coupling, const Vec3& probe,
                                           const Vec3& raman1, const Vec3& raman2) const {
    BeamGeometry g = *this;
    g.coupling_dir = coupling;
    g.probe_dir = probe;
    g.raman1_dir = raman1;
    g.raman2_dir = raman2;
    validate(g);
    return g;
}

double BeamGeometry::k_coupling() const { return two_pi / lambda_c; }
double BeamGeometry::k_raman1() const { return two_pi / lambda1; }
double BeamGeometry::k_raman2() const { return two_pi / lambda2; }

Wavevector spinwave_wavevector(const BeamGeometry& geom) {
    // Probe and coupling are split by the same ground-state splitting; at the
    // spin-wave scale k_c * theta_s that difference is far below every quoted
    // digit, so both legs use |k| = 2 pi / lambda_c.
    const double k = geom.k_coupling();
    return {geom.probe_dir * k - geom.coupling_dir * k};
}

Wavevector raman_wavevector(const BeamGeometry& geom) {
    return {geom.raman2_dir * geom.k_raman2() - geom.raman1_dir * geom.k_raman1()};
}

double rephasing_ratio(const BeamGeometry& geom) {
    const double k_pi = raman_wavevector(geom).magnitude();
    if (k_pi <= 0.0)
        throw InfeasibleError("degenerate geometry: |k_pi| = 0, rephasing ratio undefined");
    return spinwave_wavevector(geom).magnitude() / (2.0 * k_pi);
}

double min_feasible_theta_pi(const BeamGeometry& geom) {
    // Small-angle inversion of ratio(theta_pi) = 1: k_1 * theta_pi = |k_s| / 2.
    return spinwave_wavevector(geom).magnitude() / (2.0 * geom.k_raman1());
}

} // namespace spinecho
