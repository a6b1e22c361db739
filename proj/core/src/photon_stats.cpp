#include "spinecho/photon_stats.hpp"

#include <cmath>
#include <stdexcept>

#include "spinecho/errors.hpp"
#include "spinecho/parallel.hpp"
#include "spinecho/rng.hpp"

namespace spinecho {

namespace {

constexpr std::uint64_t trials_per_block = 1ull << 16;

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p < 1.0))
        throw ConfigError(std::string(name) + " must be in [0, 1)");
}

} // namespace

void DlczParams::validate() const {
    check_prob(chi, "chi");
    check_prob(eta_w, "eta_w");
    check_prob(eta_r, "eta_r");
    check_prob(dark_w, "dark_w");
    check_prob(dark_r, "dark_r");
    check_prob(n_pi, "n_pi");
    if (!(chi * eta_r + dark_r + n_pi < 1.0))
        throw ConfigError("chi*eta_r + dark_r + n_pi must stay below 1");
}

double g2_estimate(double p_w, double p_r, double p_wr) {
    if (!(p_w > 0.0) || !(p_r > 0.0))
        throw std::domain_error("g2 undefined: p_w and p_r must be positive");
    return p_wr / (p_w * p_r);
}

CorrelationPoint g2_from_counts(const G2Counts& counts) {
    if (counts.n_trials == 0) throw std::domain_error("g2 undefined: no trials");
    const double n = static_cast<double>(counts.n_trials);
    CorrelationPoint pt;
    pt.p_w = static_cast<double>(counts.n_w) / n;
    pt.p_r = static_cast<double>(counts.n_r) / n;
    pt.p_wr = static_cast<double>(counts.n_wr) / n;
    if (counts.n_wr == 0) {
        pt.g2 = 0.0;
        pt.stderr_g2 = 0.0;
        return pt;
    }
    pt.g2 = g2_estimate(pt.p_w, pt.p_r, pt.p_wr);
    const double rel2 = (1.0 - pt.p_wr) / static_cast<double>(counts.n_wr) +
                        (1.0 - pt.p_w) / static_cast<double>(counts.n_w) +
                        (1.0 - pt.p_r) / static_cast<double>(counts.n_r);
    pt.stderr_g2 = pt.g2 * std::sqrt(rel2);
    return pt;
}

ClickProbs model_probabilities(const DlczParams& params, double eta_deph, bool echo_on) {
    params.validate();
    if (!(eta_deph >= 0.0 && eta_deph <= 1.0))
        throw ConfigError("eta_deph must be in [0, 1]");
    const double q = params.eta_r * eta_deph;
    const double extra = params.dark_r + (echo_on ? params.n_pi : 0.0);
    ClickProbs probs;
    probs.p_w = params.chi * params.eta_w + params.dark_w;
    probs.p_r = params.chi * q + extra;
    // True heralds retrieve with q on top of the backgrounds; dark write
    // clicks coincide with reads at the unconditional rate.
    probs.p_wr = params.chi * params.eta_w * (q + extra) + params.dark_w * probs.p_r;
    if (probs.p_w >= 1.0 || probs.p_r >= 1.0)
        throw ConfigError("click probabilities exceed 1; parameters inconsistent");
    // Linearization limit: at per-shot probabilities near one the leading
    // order can produce an impossible joint; refuse those parameters.
    if (probs.p_wr > probs.p_w || probs.p_wr > probs.p_r)
        throw ConfigError("parameters outside the leading-order model's validity");
    return probs;
}

double model_g2(const DlczParams& params, double eta_deph, bool echo_on) {
    const ClickProbs probs = model_probabilities(params, eta_deph, echo_on);
    return g2_estimate(probs.p_w, probs.p_r, probs.p_wr);
}

DlczParams calibrate_dlcz(double p_w, double p_r, double g2, double dark_fraction, double n_pi) {
    if (!(p_w > 0.0 && p_r > 0.0)) throw ConfigError("calibration needs p_w, p_r > 0");
    if (!(dark_fraction >= 0.0 && dark_fraction < 1.0))
        throw ConfigError("dark fraction must be in [0, 1)");
    if (!(g2 > 1.0)) throw ConfigError("calibration needs g2 > 1");
    DlczParams params;
    params.dark_w = 0.0;
    params.dark_r = dark_fraction * p_r;
    params.eta_r = p_r * (g2 - dark_fraction);
    params.chi = (1.0 - dark_fraction) / (g2 - dark_fraction);
    params.eta_w = p_w / params.chi;
    params.n_pi = n_pi;
    params.validate();
    return params;
}

std::vector<G2CurvePoint> g2_curve(const DlczParams& params, const BeamGeometry& geom,
                                   const EnsembleSpec& spec, std::span<const double> t_list,
                                   const G2CurveOptions& opts) {
    params.validate();
    const double survival_on = (1.0 - opts.epsilon) * (1.0 - opts.epsilon);
    AtomSample atoms;
    if (opts.mode == EffMode::monte_carlo) atoms = sample_atoms(spec, opts.seed, opts.workers);

    std::vector<G2CurvePoint> out(t_list.size());
    parallel_for(t_list.size(), opts.workers, [&](std::size_t i) {
        const double T = t_list[i];
        G2CurvePoint entry;
        entry.point.T = T;
        double eta = 0.0, eta_err = 0.0;
        try {
            if (T <= 0.0) {
                eta = opts.echo_on ? survival_on : 1.0;
            } else if (opts.echo_on) {
                const EchoSchedule sched = schedule_for(geom, T, opts.epsilon);
                if (opts.mode == EffMode::closed_form) {
                    eta = retrieval_efficiency_closed_form(geom, spec, &sched, T, opts.transit);
                } else {
                    const auto est = echo_efficiency_mc(atoms, geom, sched, opts.transit);
                    eta = est.value;
                    eta_err = est.stderr;
                }
            } else {
                if (opts.mode == EffMode::closed_form) {
                    eta = retrieval_efficiency_closed_form(geom, spec, nullptr, T, opts.transit);
                } else {
                    const auto est = free_decay_efficiency_mc(atoms, geom, T, opts.transit);
                    eta = est.value;
                    eta_err = est.stderr;
                }
            }
        } catch (const InfeasibleError&) {
            entry.feasible = false;
            out[i] = entry;
            return;
        }
        eta = std::clamp(eta, 0.0, 1.0);
        if (opts.n_trials > 0) {
            // Finite-statistics emulation: counts from a per-point substream.
            const std::uint64_t point_seed = opts.seed ^ (0x9E3779B97F4A7C15ull * (i + 1));
            const G2Counts counts =
                simulate_counts(params, eta, opts.echo_on, opts.n_trials, point_seed, 1);
            const double T = entry.point.T;
            entry.point = g2_from_counts(counts);
            entry.point.T = T;
            out[i] = entry;
            return;
        }
        const ClickProbs probs = model_probabilities(params, eta, opts.echo_on);
        entry.point.p_w = probs.p_w;
        entry.point.p_r = probs.p_r;
        entry.point.p_wr = probs.p_wr;
        entry.point.g2 = g2_estimate(probs.p_w, probs.p_r, probs.p_wr);
        if (eta_err > 0.0) {
            const double lo = model_g2(params, std::clamp(eta - eta_err, 0.0, 1.0), opts.echo_on);
            const double hi = model_g2(params, std::clamp(eta + eta_err, 0.0, 1.0), opts.echo_on);
            entry.point.stderr_g2 = 0.5 * std::abs(hi - lo);
        }
        out[i] = entry;
    });
    return out;
}

G2Counts simulate_counts(const DlczParams& params, double eta_deph, bool echo_on,
                         std::uint64_t n_trials, std::uint64_t seed, unsigned workers) {
    if (n_trials < 1) throw std::invalid_argument("simulate_counts needs n_trials >= 1");
    const ClickProbs model = model_probabilities(params, eta_deph, echo_on); // validates
    (void)model;
    const double q = params.eta_r * eta_deph;
    const double extra = params.dark_r + (echo_on ? params.n_pi : 0.0);

    const std::uint64_t n_blocks = (n_trials + trials_per_block - 1) / trials_per_block;
    std::vector<G2Counts> block_counts(n_blocks);
    parallel_for(n_blocks, workers, [&](std::size_t blk) {
        Rng rng(seed, blk);
        const std::uint64_t begin = static_cast<std::uint64_t>(blk) * trials_per_block;
        const std::uint64_t end = std::min(n_trials, begin + trials_per_block);
        G2Counts c;
        for (std::uint64_t t = begin; t < end; ++t) {
            const bool excited = rng.uniform01() < params.chi;
            const bool w_signal = rng.uniform01() < params.eta_w;
            const bool w_dark = rng.uniform01() < params.dark_w;
            const bool r_signal = rng.uniform01() < q;
            const bool r_back = rng.uniform01() < extra;
            const bool w_click = (excited && w_signal) || w_dark;
            const bool r_click = (excited && r_signal) || r_back;
            c.n_w += w_click;
            c.n_r += r_click;
            c.n_wr += (w_click && r_click);
        }
        block_counts[blk] = c;
    });

    G2Counts total;
    total.n_trials = n_trials;
    for (const auto& c : block_counts) {
        total.n_w += c.n_w;
        total.n_r += c.n_r;
        total.n_wr += c.n_wr;
    }
    return total;
}

Nonclassicality nonclassicality_margin(const CorrelationPoint& point, double n_sigma) {
    Nonclassicality result;
    result.margin = point.g2 - 2.0;
    result.nonclassical = point.g2 - n_sigma * point.stderr_g2 > 2.0;
    return result;
}

} // namespace spinecho
