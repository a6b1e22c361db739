#include "spinecho/echo_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "spinecho/errors.hpp"
#include "spinecho/parallel.hpp"

namespace spinecho {

void EchoSchedule::validate() const {
    if (!(t1 >= 0.0 && t1 < t2 && t2 <= readout_T))
        throw InfeasibleError("echo schedule must satisfy 0 <= t1 < t2 <= T");
    for (const auto& p : pulses) p.validate();
}

EchoSchedule schedule_for(const BeamGeometry& geom, double T, double epsilon) {
    if (!(T > 0.0)) throw InfeasibleError("degenerate schedule: storage time T must be > 0");
    const double ratio = rephasing_ratio(geom);
    if (ratio > 1.0) {
        std::ostringstream msg;
        msg << "rephasing interval dt = " << ratio << " * T exceeds the storage window; "
            << "theta_pi must be at least "
            << min_feasible_theta_pi(geom) * 180.0 / std::numbers::pi << " deg";
        throw InfeasibleError(msg.str());
    }
    const double dt = ratio * T;
    const Wavevector k_pi = raman_wavevector(geom);
    EchoSchedule sched;
    sched.readout_T = T;
    sched.t1 = (T - dt) / 2.0;
    sched.t2 = sched.t1 + dt;
    sched.pulses[0] = PulseEvent{sched.t1, k_pi, epsilon, -1};
    sched.pulses[1] = PulseEvent{sched.t2, k_pi, epsilon, +1};
    sched.validate();
    return sched;
}

McEstimate echo_efficiency_mc(const AtomSample& atoms, const BeamGeometry& geom,
                              const EchoSchedule& sched, TransitLoss transit) {
    sched.validate();
    auto state = imprint(atoms, spinwave_wavevector(geom));
    state = free_evolve(std::move(state), atoms, sched.t1);
    state = apply_pi_pulse(std::move(state), atoms, sched.pulses[0]);
    state = free_evolve(std::move(state), atoms, sched.delta_t());
    state = apply_pi_pulse(std::move(state), atoms, sched.pulses[1]);
    state = free_evolve(std::move(state), atoms, sched.readout_T - sched.t2);
    return retrieval_efficiency_mc_err(state, atoms, transit);
}

McEstimate free_decay_efficiency_mc(const AtomSample& atoms, const BeamGeometry& geom, double T,
                                    TransitLoss transit) {
    auto state = imprint(atoms, spinwave_wavevector(geom));
    state = free_evolve(std::move(state), atoms, T);
    return retrieval_efficiency_mc_err(state, atoms, transit);
}

double retrieval_efficiency_closed_form(const BeamGeometry& geom, const EnsembleSpec& spec,
                                        const EchoSchedule* sched, double T,
                                        TransitLoss transit) {
    const double sigma_v = thermal_sigma_v(spec);
    Vec3 coeff = spinwave_wavevector(geom).components * T;
    double survival = 1.0;
    if (sched != nullptr) {
        sched->validate();
        Vec3 statics{};
        for (const auto& p : sched->pulses) {
            if (p.sign == 0)
                throw std::invalid_argument(
                    "closed form requires explicit pulse signs (schedule_for sets them)");
            const Vec3 term = p.k_pi.components * (-2.0 * static_cast<double>(p.sign));
            statics += term;
            coeff += term * p.time;
            survival *= 1.0 - p.epsilon;
        }
        // A non-cancelling pulse pair leaves a static spatial grating whose
        // decay is cloud-size physics, outside this closed form.
        if (statics.norm() > 1e-9 * raman_wavevector(geom).magnitude())
            throw InfeasibleError("closed form needs a sign-cancelling pulse pair");
    }
    if (transit == TransitLoss::off) return dephasing_efficiency_cf(coeff, sigma_v, survival);
    return dephasing_efficiency_cf_transit(coeff, sigma_v, survival, T, spec.mode_waist,
                                           spec.cloud_sigma);
}

std::vector<ScanPoint> scan_delta_t(const BeamGeometry& geom, const EnsembleSpec& spec, double T,
                                    double dt_min, double dt_max, std::size_t n_points,
                                    EffMode mode, std::uint64_t seed, double epsilon,
                                    unsigned workers) {
    if (!(T > 0.0)) throw InfeasibleError("scan requires T > 0");
    if (!(dt_min > 0.0 && dt_max < T && dt_min < dt_max))
        throw InfeasibleError("scan range must satisfy 0 < dt_min < dt_max < T");
    if (n_points < 3) throw InfeasibleError("scan needs at least 3 points");

    const Wavevector k_pi = raman_wavevector(geom);
    AtomSample atoms;
    if (mode == EffMode::monte_carlo) atoms = sample_atoms(spec, seed, workers);

    std::vector<ScanPoint> curve(n_points);
    const double step = (dt_max - dt_min) / static_cast<double>(n_points - 1);
    parallel_for(n_points, workers, [&](std::size_t i) {
        const double dt = dt_min + step * static_cast<double>(i);
        EchoSchedule sched;
        sched.readout_T = T;
        sched.t1 = (T - dt) / 2.0;
        sched.t2 = sched.t1 + dt;
        sched.pulses[0] = PulseEvent{sched.t1, k_pi, epsilon, -1};
        sched.pulses[1] = PulseEvent{sched.t2, k_pi, epsilon, +1};
        if (mode == EffMode::closed_form) {
            curve[i] = {dt, retrieval_efficiency_closed_form(geom, spec, &sched, T), 0.0};
        } else {
            const auto est = echo_efficiency_mc(atoms, geom, sched);
            curve[i] = {dt, est.value, est.stderr};
        }
    });
    return curve;
}

double scan_half_width_1e(const BeamGeometry& geom, const EnsembleSpec& spec) {
    return 1.0 / (2.0 * raman_wavevector(geom).magnitude() * thermal_sigma_v(spec));
}

PeakEstimate locate_peak(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw std::invalid_argument("locate_peak needs >= 3 matching points");
    std::size_t imax = 0;
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] > ys[imax]) imax = i;

    PeakEstimate est;
    est.center = xs[imax];
    est.amplitude = ys[imax];
    if (imax == 0 || imax + 1 == ys.size()) return est; // not bracketed

    // Three-point parabola through log(y); vertex and curvature give the
    // Gaussian center and 1/e half-width exactly for a Gaussian curve.
    const double floor_y = 1e-300;
    const double x0 = xs[imax - 1], x1 = xs[imax], x2 = xs[imax + 1];
    const double l0 = std::log(std::max(ys[imax - 1], floor_y));
    const double l1 = std::log(std::max(ys[imax], floor_y));
    const double l2 = std::log(std::max(ys[imax + 1], floor_y));
    const double d01 = (l1 - l0) / (x1 - x0);
    const double d12 = (l2 - l1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0); // = gamma in a + b x + gamma x^2
    if (!(curvature < 0.0)) return est;
    const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    est.center = vertex;
    est.half_width_1e = std::sqrt(-1.0 / curvature);
    est.amplitude = std::exp(l1 - curvature * (x1 - vertex) * (x1 - vertex));
    est.bracketed = true;
    return est;
}

std::vector<RatioPoint> ratio_vs_angle(const BeamGeometry& base, const EnsembleSpec& spec,
                                       std::span<const double> theta_pi_list, double T,
                                       EffMode mode, std::uint64_t seed, std::size_t n_points,
                                       unsigned workers) {
    std::vector<RatioPoint> out;
    out.reserve(theta_pi_list.size());
    for (const double theta_pi : theta_pi_list) {
        const BeamGeometry geom = BeamGeometry::from_angles(base.lambda_c, base.lambda1,
                                                            base.theta_s, theta_pi, base.lambda2);
        const double dt_star = rephasing_ratio(geom) * T;
        const double width = scan_half_width_1e(geom, spec);
        const double dt_min = std::max(dt_star - 3.0 * width, T * 1e-4);
        const double dt_max = std::min(dt_star + 3.0 * width, T * (1.0 - 1e-4));
        const auto curve = scan_delta_t(geom, spec, T, dt_min, dt_max, n_points, mode, seed, 0.0,
                                        workers);
        std::vector<double> xs(curve.size()), ys(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            xs[i] = curve[i].delta_t;
            ys[i] = curve[i].eta;
        }
        const auto peak = locate_peak(xs, ys);
        out.push_back({theta_pi, peak.center / T});
    }
    return out;
}

} // namespace spinecho
