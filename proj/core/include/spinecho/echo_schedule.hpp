#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spinecho/ensemble.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/spinwave.hpp"

namespace spinecho {

/// Two-pulse rephasing schedule inside a storage window [0, T].
struct EchoSchedule {
    double t1 = 0.0;
    double t2 = 0.0;
    double readout_T = 0.0;
    std::array<PulseEvent, 2> pulses;

    double delta_t() const { return t2 - t1; }
    void validate() const; // 0 <= t1 < t2 <= T
};

/// Builds the schedule satisfying 2 k_pi dt = k_s T: dt = ratio * T with the
/// pulse pair centered in the window (t1 = (T - dt)/2). Throws
/// InfeasibleError when the geometry cannot fit dt <= T, naming the minimum
/// Raman angle that would.
EchoSchedule schedule_for(const BeamGeometry& geom, double T, double epsilon = 0.0);

enum class EffMode { monte_carlo, closed_form };

/// Runs the full imprint / evolve / pulse chain for one schedule.
McEstimate echo_efficiency_mc(const AtomSample& atoms, const BeamGeometry& geom,
                              const EchoSchedule& sched, TransitLoss transit = TransitLoss::off);

/// No-pulse storage over [0, T].
McEstimate free_decay_efficiency_mc(const AtomSample& atoms, const BeamGeometry& geom, double T,
                                    TransitLoss transit = TransitLoss::off);

/// Closed-form efficiency for an optional schedule (nullptr = no pulses).
double retrieval_efficiency_closed_form(const BeamGeometry& geom, const EnsembleSpec& spec,
                                        const EchoSchedule* sched, double T,
                                        TransitLoss transit = TransitLoss::off);

struct ScanPoint {
    double delta_t = 0.0;
    double eta = 0.0;
    double stderr = 0.0; // 0 in closed form
};

/// Efficiency vs pulse interval at fixed T. MC mode reuses one atom sample
/// across all points (common random numbers).
std::vector<ScanPoint> scan_delta_t(const BeamGeometry& geom, const EnsembleSpec& spec, double T,
                                    double dt_min, double dt_max, std::size_t n_points,
                                    EffMode mode, std::uint64_t seed, double epsilon = 0.0,
                                    unsigned workers = 1);

/// 1/e half-width of the closed-form scan Gaussian, 1 / (2 |k_pi| sigma_v).
double scan_half_width_1e(const BeamGeometry& geom, const EnsembleSpec& spec);

struct PeakEstimate {
    double center = 0.0;
    double half_width_1e = 0.0;
    double amplitude = 0.0;
    bool bracketed = false;
};

/// Quadratic interpolation of log(y) around the max grid point; exact for a
/// Gaussian curve and robust against MC noise.
PeakEstimate locate_peak(std::span<const double> xs, std::span<const double> ys);

struct RatioPoint {
    double theta_pi = 0.0;
    double ratio = 0.0; // located dt* / T
};

/// Re-optimizes dt for each Raman angle (coplanar geometry rebuilt per angle)
/// and reports dt*/T, the hyperbola of the rephasing condition.
std::vector<RatioPoint> ratio_vs_angle(const BeamGeometry& base, const EnsembleSpec& spec,
                                       std::span<const double> theta_pi_list, double T,
                                       EffMode mode, std::uint64_t seed,
                                       std::size_t n_points = 61, unsigned workers = 1);

} // namespace spinecho
