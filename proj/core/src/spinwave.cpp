#include "spinecho/spinwave.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "spinecho/errors.hpp"

namespace spinecho {

namespace {

constexpr double time_slop = 1e-12; // s; pulse times are microsecond-scale

// Compensated accumulator; keeps collective sums reproducible to ~1e-15
// independent of atom count.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct CollectiveSum {
    double re = 0.0;
    double im = 0.0;
    double w = 0.0;
};

template <typename WeightFn>
CollectiveSum collective_sum(const SpinWaveState& state, WeightFn&& readout_weight,
                             std::size_t begin, std::size_t end) {
    KahanSum re, im, w;
    const auto& weights = state.weights();
    const auto& survival = state.survival();
    for (std::size_t j = begin; j < end; ++j) {
        const double amp = readout_weight(j) * std::sqrt(survival[j]);
        const double phi = state.mismatch(j);
        re.add(amp * std::cos(phi));
        im.add(amp * std::sin(phi));
        w.add(weights[j]);
    }
    return {re.sum, im.sum, w.sum};
}

double efficiency_of(const CollectiveSum& s) {
    if (s.w <= 0.0) return 0.0;
    return (s.re * s.re + s.im * s.im) / (s.w * s.w);
}

template <typename WeightFn>
McEstimate jackknife_efficiency(const SpinWaveState& state, WeightFn&& readout_weight,
                                std::size_t n_blocks) {
    const std::size_t n = state.size();
    const std::size_t blocks = std::max<std::size_t>(1, std::min(n_blocks, n));
    std::vector<CollectiveSum> part(blocks);
    const std::size_t chunk = (n + blocks - 1) / blocks;
    CollectiveSum total;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        part[b] = collective_sum(state, readout_weight, begin, end);
        total.re += part[b].re;
        total.im += part[b].im;
        total.w += part[b].w;
    }
    McEstimate est;
    est.value = efficiency_of(total);
    if (blocks < 2) return est;

    std::vector<double> loo(blocks);
    double mean = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const CollectiveSum rest{total.re - part[b].re, total.im - part[b].im,
                                 total.w - part[b].w};
        loo[b] = efficiency_of(rest);
        mean += loo[b];
    }
    mean /= static_cast<double>(blocks);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    est.stderr = std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
    return est;
}

} // namespace

void PulseEvent::validate() const {
    if (time < 0.0) throw std::invalid_argument("pulse time must be >= 0");
    if (epsilon < 0.0 || epsilon > 0.5)
        throw std::invalid_argument("pulse epsilon must be in [0, 0.5]");
    if (sign != -1 && sign != 0 && sign != 1)
        throw std::invalid_argument("pulse sign must be -1, 0 (auto) or +1");
}

SpinWaveState imprint(const AtomSample& atoms, const Wavevector& k_s) {
    if (atoms.size() == 0) throw std::invalid_argument("imprint on empty atom sample");
    SpinWaveState state;
    const std::size_t n = atoms.size();
    state.phase_.resize(n);
    state.imprint_phase_.resize(n);
    state.survival_.assign(n, 1.0);
    state.weight_ = atoms.weights;
    state.k_s_ = k_s;
    for (std::size_t j = 0; j < n; ++j) {
        const double phi = k_s.components.dot(atoms.positions[j]);
        state.phase_[j] = phi;
        state.imprint_phase_[j] = phi;
    }
    return state;
}

SpinWaveState free_evolve(SpinWaveState state, const AtomSample& atoms, double dt) {
    if (dt < 0.0) throw std::invalid_argument("free_evolve requires dt >= 0");
    if (atoms.size() != state.size())
        throw std::invalid_argument("atom sample does not match state size");
    for (std::size_t j = 0; j < state.size(); ++j)
        state.phase_[j] += state.k_s_.components.dot(atoms.velocities[j]) * dt;
    state.t_now_ += dt;
    return state;
}

SpinWaveState apply_pi_pulse(SpinWaveState state, const AtomSample& atoms,
                             const PulseEvent& pulse) {
    pulse.validate();
    if (atoms.size() != state.size())
        throw std::invalid_argument("atom sample does not match state size");
    if (pulse.time < state.t_now_ - time_slop)
        throw SequenceError("pi pulse scheduled before the state's current time");
    if (pulse.time > state.t_now_ + time_slop)
        throw SequenceError("state must be evolved to the pulse time before applying it");

    // Standard pair bookkeeping: a pulse on the original pattern adds
    // +2 k_pi . r(t) (sign -1 in the sign*(-2) convention), the return pulse
    // adds -2 k_pi . r(t); their difference is -2 k_pi . v dt, which cancels
    // the +k_s . v T motional term at 2 k_pi dt = k_s T.
    const int sign = pulse.sign != 0 ? pulse.sign : (state.original_pattern_ ? -1 : 1);
    const double t = state.t_now_;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const Vec3 r_t = atoms.positions[j] + atoms.velocities[j] * t;
        state.phase_[j] += static_cast<double>(sign) * -2.0 * pulse.k_pi.components.dot(r_t);
        state.survival_[j] *= 1.0 - pulse.epsilon;
    }
    state.original_pattern_ = !state.original_pattern_;
    ++state.pulses_applied_;
    return state;
}

double retrieval_efficiency_mc(const SpinWaveState& state) {
    return efficiency_of(
        collective_sum(state, [&](std::size_t j) { return state.weights()[j]; }, 0, state.size()));
}

McEstimate retrieval_efficiency_mc_err(const SpinWaveState& state, std::size_t n_blocks) {
    return jackknife_efficiency(state, [&](std::size_t j) { return state.weights()[j]; },
                                n_blocks);
}

namespace {

double transit_weight(const SpinWaveState& state, const AtomSample& atoms, std::size_t j,
                      double waist) {
    const Vec3 r_t = atoms.positions[j] + atoms.velocities[j] * state.t_now();
    return std::sqrt(state.weights()[j] * mode_weight_at(r_t, waist));
}

} // namespace

double retrieval_efficiency_mc(const SpinWaveState& state, const AtomSample& atoms,
                               TransitLoss transit) {
    if (transit == TransitLoss::off) return retrieval_efficiency_mc(state);
    const double waist = infer_mode_waist(atoms);
    return efficiency_of(collective_sum(
        state, [&](std::size_t j) { return transit_weight(state, atoms, j, waist); }, 0,
        state.size()));
}

McEstimate retrieval_efficiency_mc_err(const SpinWaveState& state, const AtomSample& atoms,
                                       TransitLoss transit, std::size_t n_blocks) {
    if (transit == TransitLoss::off) return retrieval_efficiency_mc_err(state, n_blocks);
    const double waist = infer_mode_waist(atoms);
    return jackknife_efficiency(
        state, [&](std::size_t j) { return transit_weight(state, atoms, j, waist); }, n_blocks);
}

double dephasing_efficiency_cf(const Vec3& phase_coeff, double sigma_v, double survival) {
    const double c2 = phase_coeff.norm2();
    return survival * std::exp(-c2 * sigma_v * sigma_v);
}

double dephasing_efficiency_cf_transit(const Vec3& phase_coeff, double sigma_v, double survival,
                                       double readout_T, double waist, const Vec3& cloud_sigma) {
    // Per transverse axis, the readout amplitude is the Gaussian integral of
    // exp(-(x^2 + (x + v T)^2)/(2 w^2)) e^{i c v} over x ~ N(0, sigma^2),
    // v ~ N(0, sigma_v^2), normalized by the T = 0 overlap integral.
    const double sv2 = sigma_v * sigma_v;
    auto axis_amplitude = [&](double sigma, double c) {
        const double w2 = waist * waist;
        const double a = 1.0 / (sigma * sigma) + 2.0 / w2;
        const double b = readout_T / w2;
        const double d = 1.0 / sv2 + readout_T * readout_T / w2;
        const double det = a * d - b * b;
        return std::sqrt(a / (sv2 * det)) * std::exp(-0.5 * c * c * a / det);
    };
    const double amp = axis_amplitude(cloud_sigma.x, phase_coeff.x) *
                       axis_amplitude(cloud_sigma.y, phase_coeff.y) *
                       std::exp(-0.5 * phase_coeff.z * phase_coeff.z * sv2);
    return survival * amp * amp;
}

} // namespace spinecho
