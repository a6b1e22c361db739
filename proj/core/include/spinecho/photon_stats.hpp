#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinecho/echo_schedule.hpp"
#include "spinecho/ensemble.hpp"
#include "spinecho/geometry.hpp"

namespace spinecho {

/// Per-trial probabilities of the heralded single-excitation model. All
/// dimensionless, per experimental shot.
struct DlczParams {
    double chi = 0.0; // pair-excitation probability per trial
    double eta_w = 0.0; // write-out detection efficiency
    double eta_r = 0.0; // conditional retrieval x detection efficiency at T = 0
    double dark_w = 0.0; // uncorrelated write-channel background per trial
    double dark_r = 0.0; // uncorrelated read-channel background per trial
    double n_pi = 0.0; // pi-pulse noise in the read-out mode per trial

    void validate() const;
};

struct ClickProbs {
    double p_w = 0.0;
    double p_r = 0.0;
    double p_wr = 0.0;
};

struct CorrelationPoint {
    double T = 0.0; // s
    double p_w = 0.0;
    double p_r = 0.0;
    double p_wr = 0.0;
    double g2 = 0.0;
    double stderr_g2 = 0.0;
};

/// g2 = p_wr / (p_w p_r). Throws std::domain_error on a zero denominator.
double g2_estimate(double p_w, double p_r, double p_wr);

struct G2Counts {
    std::uint64_t n_w = 0;
    std::uint64_t n_r = 0;
    std::uint64_t n_wr = 0;
    std::uint64_t n_trials = 0;
};

/// Count-level estimate with propagated binomial standard errors (independent
/// delta-method approximation).
CorrelationPoint g2_from_counts(const G2Counts& counts);

/// Leading-order DLCZ click model. With q = eta_r * eta_deph and
/// x = dark_r (+ n_pi when the echo is on):
///   p_w  = chi eta_w + dark_w
///   p_r  = chi q + x
///   p_wr = chi eta_w (q + x) + dark_w p_r
/// (heralded conditional structure; dark write clicks herald nothing and
/// coincide at the unconditional read rate, so p_wr = p_w (q + x) exactly
/// when dark_w = 0). eta_deph comes from the spin-wave dynamics and already
/// contains the (1-eps)^2 pulse survival when the echo is on.
ClickProbs model_probabilities(const DlczParams& params, double eta_deph, bool echo_on);

double model_g2(const DlczParams& params, double eta_deph, bool echo_on);

/// Inverts the T = 0 echo-off measurements (p_w, p_r, g2) for the model
/// parameters, attributing dark_fraction * p_r to read background (dark_w is
/// folded into the write channel):
///   dark_r = f p_r,  eta_r = p_r (g2 - f),  chi = (1 - f)/(g2 - f),
///   eta_w = p_w / chi.
DlczParams calibrate_dlcz(double p_w, double p_r, double g2, double dark_fraction = 0.1,
                          double n_pi = 0.0);

struct G2CurvePoint {
    CorrelationPoint point;
    bool feasible = true;
};

struct G2CurveOptions {
    bool echo_on = false;
    double epsilon = 0.0; // per-pulse imperfection when the echo is on
    EffMode mode = EffMode::closed_form;
    TransitLoss transit = TransitLoss::off;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::uint64_t n_trials = 0; // > 0: points are count-level estimates
};

/// g2 vs storage time; echo-on points use schedule_for(T). Infeasible
/// schedules are reported with feasible = false and skipped values.
std::vector<G2CurvePoint> g2_curve(const DlczParams& params, const BeamGeometry& geom,
                                   const EnsembleSpec& spec, std::span<const double> t_list,
                                   const G2CurveOptions& opts);

/// Bernoulli sampling of the joint click model; bit-reproducible for a given
/// (seed, n_trials) at any worker count (fixed 65536-trial substream blocks).
G2Counts simulate_counts(const DlczParams& params, double eta_deph, bool echo_on,
                         std::uint64_t n_trials, std::uint64_t seed, unsigned workers = 1);

struct Nonclassicality {
    double margin = 0.0; // g2 - 2
    bool nonclassical = false; // margin positive at the stated confidence
};

Nonclassicality nonclassicality_margin(const CorrelationPoint& point, double n_sigma = 1.0);

} // namespace spinecho
