#pragma once

#include <cstddef>
#include <vector>

#include "spinecho/ensemble.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/vec3.hpp"

namespace spinecho {

/// One instantaneous Raman pi pulse. `sign` selects the bookkeeping direction
/// of the imprinted grating phase, sign * (-2) * k_pi . r(t): the standard
/// echo pair is (-1, +1). sign = 0 lets the state pick the direction from its
/// current ground-state pattern.
struct PulseEvent {
    double time = 0.0; // s
    Wavevector k_pi;
    double epsilon = 0.0; // per-pulse transfer imperfection
    int sign = 0;

    void validate() const;
};

/// Collective single-excitation phase grating over one atom sample.
///
/// phases[j] accumulates the per-atom mismatch relative to the frame that
/// co-moves with the readout grating: free flight adds k_s . v_j dt, a pulse
/// adds sign * (-2) k_pi . r_j(t). In this frame the stored phases are the
/// conjugate of the bare state-amplitude phases; |sum|^2 is unchanged and the
/// echo pair cancels the motional term exactly when 2 k_pi dt = k_s T.
class SpinWaveState {
public:
    const std::vector<double>& phases() const { return phase_; }
    const std::vector<double>& weights() const { return weight_; }
    /// Per-atom population still in the coherent grating, prod (1 - eps).
    const std::vector<double>& survival() const { return survival_; }
    /// Per-atom population lost to the wrong state, 1 - survival.
    double residual(std::size_t j) const { return 1.0 - survival_[j]; }

    const Wavevector& k_s() const { return k_s_; }
    double t_now() const { return t_now_; }
    /// False after an odd number of pi pulses (pattern |s...g_j...s>).
    bool original_pattern() const { return original_pattern_; }
    int pulses_applied() const { return pulses_applied_; }
    std::size_t size() const { return phase_.size(); }

    /// Grating-frame mismatch of atom j (zero for a fresh imprint).
    double mismatch(std::size_t j) const { return phase_[j] - imprint_phase_[j]; }

    friend SpinWaveState imprint(const AtomSample& atoms, const Wavevector& k_s);
    friend SpinWaveState free_evolve(SpinWaveState state, const AtomSample& atoms, double dt);
    friend SpinWaveState apply_pi_pulse(SpinWaveState state, const AtomSample& atoms,
                                        const PulseEvent& pulse);

private:
    std::vector<double> phase_;
    std::vector<double> imprint_phase_;
    std::vector<double> survival_;
    std::vector<double> weight_;
    Wavevector k_s_;
    double t_now_ = 0.0;
    bool original_pattern_ = true;
    int pulses_applied_ = 0;
};

/// Writes the phase grating k_s . r_j(0) onto the sample at t = 0.
SpinWaveState imprint(const AtomSample& atoms, const Wavevector& k_s);

/// Ballistic evolution: every phase advances by k_s . v_j dt.
SpinWaveState free_evolve(SpinWaveState state, const AtomSample& atoms, double dt);

/// Applies one pi pulse at pulse.time (which must equal the state clock;
/// evolve first). Flips the pattern, imprints the +-2 k_pi . r_j(t) phase and
/// moves a fraction epsilon of each atom's population out of the grating.
SpinWaveState apply_pi_pulse(SpinWaveState state, const AtomSample& atoms,
                             const PulseEvent& pulse);

struct McEstimate {
    double value = 0.0;
    double stderr = 0.0;
};

/// Collective readout efficiency |sum_j w_j sqrt(s_j) e^{i dphi_j}|^2 / (sum_j w_j)^2.
double retrieval_efficiency_mc(const SpinWaveState& state);

/// Same, with a delete-one-block jackknife standard error.
McEstimate retrieval_efficiency_mc_err(const SpinWaveState& state, std::size_t n_blocks = 64);

enum class TransitLoss { off, on };

/// Efficiency with the beam-transit loss channel: the readout weight of atom
/// j becomes sqrt(w_j(0) w_j(t_now)), re-evaluating the mode overlap at the
/// atom's ballistic readout position.
double retrieval_efficiency_mc(const SpinWaveState& state, const AtomSample& atoms,
                               TransitLoss transit);
McEstimate retrieval_efficiency_mc_err(const SpinWaveState& state, const AtomSample& atoms,
                                       TransitLoss transit, std::size_t n_blocks = 64);

/// Closed form for Gaussian velocities: survival * exp(-|c|^2 sigma_v^2),
/// where c = k_s T - 2 k_pi dt is the net linear phase coefficient and
/// survival the pulse-imperfection population factor prod (1 - eps).
double dephasing_efficiency_cf(const Vec3& phase_coeff, double sigma_v, double survival);

/// Closed form including beam-transit loss: exact Gaussian integral over the
/// correlated transverse (position, velocity) pair per axis.
double dephasing_efficiency_cf_transit(const Vec3& phase_coeff, double sigma_v, double survival,
                                       double readout_T, double waist, const Vec3& cloud_sigma);

} // namespace spinecho
