#pragma once

#include <map>
#include <span>
#include <string>

namespace spinecho {

struct FitResult {
    std::map<std::string, double> parameters;
    std::map<std::string, double> stderrs;
    double residual_rms = 0.0;
    bool converged = false;
    int n_iter = 0;
    std::string model; // model family actually fitted
    std::string flag; // empty on success; "non_decaying", "peak_not_bracketed", ...

    double param(const std::string& name) const { return parameters.at(name); }
    double stderr_of(const std::string& name) const { return stderrs.at(name); }
};

/// y = A cos(2 pi f t) e^{-gamma t} + B. Parameters: "amplitude", "offset",
/// "frequency" (Hz), "decay_rate" (1/s). Frequency is initialized from a
/// periodogram peak.
FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                            std::span<const double> yerr = {});

/// Ground-state transfer fidelity of one pi pulse from a converged Rabi fit:
/// F = (1 + e^{-gamma tau_pi}) / 2 at tau_pi = 1 / (2 f), the A/B-normalized
/// contrast at the pi time.
double pi_pulse_fidelity(const FitResult& rabi_fit);

/// y = A exp(-((x - c)/s)^2) + B. Parameters: "center", "amplitude",
/// "half_width_1e" (s, the 1/e half-width), "offset".
FitResult fit_gaussian_peak(std::span<const double> x, std::span<const double> y,
                            std::span<const double> yerr = {});

enum class DecayForm { exponential, gaussian, automatic };

/// y = y0 exp(-t/tau) + c or y0 exp(-(t/tau)^2) + c; "tau" is the 1/e time
/// either way. `automatic` fits both and keeps the lower residual RMS; the
/// chosen form is reported in FitResult::model.
FitResult fit_lifetime_1e(std::span<const double> t, std::span<const double> y, DecayForm form,
                          std::span<const double> yerr = {});

} // namespace spinecho
