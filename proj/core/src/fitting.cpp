#include "spinecho/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spinecho {

namespace {

constexpr int max_iterations = 200;
constexpr double step_tolerance = 1e-10; // relative parameter step
constexpr double grad_tolerance = 1e-12;

// Gaussian elimination with partial pivoting; the model zoo never exceeds
// four parameters so this is all the linear algebra the fits need.
bool solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n,
                  std::vector<double>& out) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (std::abs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] / a[col * n + col];
            for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
            b[row] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double s = b[row];
        for (std::size_t k = row + 1; k < n; ++k) s -= a[row * n + k] * out[k];
        out[row] = s / a[row * n + row];
    }
    return true;
}

struct Model {
    std::size_t n_params;
    std::function<double(const double*, double)> eval;
    std::function<void(const double*, double, double*)> jacobian;
};

struct LmData {
    std::span<const double> x;
    std::span<const double> y;
    std::vector<double> weight; // 1/sigma^2, all ones when no yerr
};

double weighted_sse(const Model& model, const LmData& data, const std::vector<double>& p) {
    double sse = 0.0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double r = data.y[i] - model.eval(p.data(), data.x[i]);
        sse += data.weight[i] * r * r;
    }
    return sse;
}

/// Damped Gauss-Newton (Levenberg-Marquardt) with analytic Jacobians.
FitResult lm_fit(const Model& model, const LmData& data, std::vector<double> p,
                 const std::vector<std::string>& names) {
    const std::size_t n = model.n_params;
    const std::size_t m = data.x.size();
    FitResult result;
    result.converged = false;

    double lambda = 1e-3;
    double sse = weighted_sse(model, data, p);
    std::vector<double> jrow(n), grad(n), hessian(n * n), step;
    int iter = 0;
    bool small_grad = false;

    for (; iter < max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hessian.begin(), hessian.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double r = data.y[i] - model.eval(p.data(), data.x[i]);
            model.jacobian(p.data(), data.x[i], jrow.data());
            const double w = data.weight[i];
            for (std::size_t a = 0; a < n; ++a) {
                grad[a] += w * jrow[a] * r;
                for (std::size_t b = a; b < n; ++b) hessian[a * n + b] += w * jrow[a] * jrow[b];
            }
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < a; ++b) hessian[a * n + b] = hessian[b * n + a];

        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < grad_tolerance) {
            small_grad = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 16 && !stepped; ++attempt) {
            std::vector<double> damped = hessian;
            for (std::size_t a = 0; a < n; ++a)
                damped[a * n + a] += lambda * std::max(hessian[a * n + a], 1e-30);
            if (!solve_linear(damped, grad, n, step)) {
                lambda *= 4.0;
                continue;
            }
            std::vector<double> trial(n);
            for (std::size_t a = 0; a < n; ++a) trial[a] = p[a] + step[a];
            const double trial_sse = weighted_sse(model, data, trial);
            if (trial_sse <= sse) {
                double rel_step = 0.0;
                for (std::size_t a = 0; a < n; ++a)
                    rel_step = std::max(rel_step,
                                        std::abs(step[a]) / std::max(1e-30, std::abs(trial[a])));
                p = std::move(trial);
                sse = trial_sse;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (rel_step < step_tolerance) {
                    result.converged = true;
                }
            } else {
                lambda *= 4.0;
            }
        }
        if (!stepped || result.converged) break;
    }
    if (small_grad) result.converged = true;
    result.n_iter = iter + 1;
    result.residual_rms = std::sqrt(sse / static_cast<double>(m));
    if (!result.converged && result.flag.empty()) result.flag = "max_iterations";

    // Linearized covariance: sigma_res^2 (J^T W J)^-1 on the diagonal.
    const double dof = static_cast<double>(m > n ? m - n : 1);
    const double sigma2 = sse / dof;
    std::fill(hessian.begin(), hessian.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        model.jacobian(p.data(), data.x[i], jrow.data());
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                hessian[a * n + b] += data.weight[i] * jrow[a] * jrow[b];
    }
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<double> unit(n, 0.0);
        unit[a] = 1.0;
        std::vector<double> col;
        const double var = solve_linear(hessian, unit, n, col) ? sigma2 * col[a] : 0.0;
        result.parameters[names[a]] = p[a];
        result.stderrs[names[a]] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return result;
}

LmData make_data(std::span<const double> x, std::span<const double> y,
                 std::span<const double> yerr) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y sizes differ");
    if (!yerr.empty() && yerr.size() != y.size())
        throw std::invalid_argument("yerr size differs from y");
    LmData data{x, y, {}};
    data.weight.assign(x.size(), 1.0);
    for (std::size_t i = 0; i < yerr.size(); ++i) {
        if (!(yerr[i] > 0.0)) throw std::invalid_argument("yerr entries must be positive");
        data.weight[i] = 1.0 / (yerr[i] * yerr[i]);
    }
    return data;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Least-squares slope of y against x (decay pre-check).
double linear_slope(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

} // namespace

FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                            std::span<const double> yerr) {
    if (t.size() < 8) throw std::invalid_argument("damped-cosine fit needs >= 8 points");
    LmData data = make_data(t, y, yerr);

    const auto [tmin_it, tmax_it] = std::minmax_element(t.begin(), t.end());
    const double span = *tmax_it - *tmin_it;
    if (!(span > 0.0)) throw std::invalid_argument("t values must span a nonzero interval");

    // Periodogram peak for the frequency start; 4x oversampled up to the
    // mean-spacing Nyquist rate.
    const double ybar = mean_of(y);
    const double f_max = static_cast<double>(t.size()) / (2.0 * span);
    const std::size_t nf = 8 * t.size();
    double best_f = 1.0 / span, best_p = -1.0;
    for (std::size_t k = 1; k <= nf; ++k) {
        const double f = f_max * static_cast<double>(k) / static_cast<double>(nf);
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double ph = 2.0 * std::numbers::pi * f * t[i];
            re += (y[i] - ybar) * std::cos(ph);
            im += (y[i] - ybar) * std::sin(ph);
        }
        const double p = re * re + im * im;
        if (p > best_p) {
            best_p = p;
            best_f = f;
        }
    }
    double a0 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        a0 += (y[i] - ybar) * std::cos(2.0 * std::numbers::pi * best_f * t[i]);
    a0 *= 2.0 / static_cast<double>(t.size());

    Model model;
    model.n_params = 4;
    model.eval = [](const double* p, double x) {
        return p[0] * std::cos(2.0 * std::numbers::pi * p[2] * x) * std::exp(-p[3] * x) + p[1];
    };
    model.jacobian = [](const double* p, double x, double* j) {
        const double phase = 2.0 * std::numbers::pi * p[2] * x;
        const double damp = std::exp(-p[3] * x);
        j[0] = std::cos(phase) * damp;
        j[1] = 1.0;
        j[2] = -p[0] * 2.0 * std::numbers::pi * x * std::sin(phase) * damp;
        j[3] = -p[0] * x * std::cos(phase) * damp;
    };
    FitResult result = lm_fit(model, data, {a0, ybar, best_f, 0.5 / span},
                              {"amplitude", "offset", "frequency", "decay_rate"});
    result.model = "damped_cosine";
    return result;
}

double pi_pulse_fidelity(const FitResult& rabi_fit) {
    if (!rabi_fit.converged) throw std::invalid_argument("pi fidelity needs a converged fit");
    const double f = rabi_fit.param("frequency");
    const double gamma = rabi_fit.param("decay_rate");
    if (!(f > 0.0)) throw std::invalid_argument("pi fidelity needs frequency > 0");
    const double tau_pi = 1.0 / (2.0 * f);
    return 0.5 * (1.0 + std::exp(-gamma * tau_pi));
}

FitResult fit_gaussian_peak(std::span<const double> x, std::span<const double> y,
                            std::span<const double> yerr) {
    if (x.size() < 5) throw std::invalid_argument("gaussian-peak fit needs >= 5 points");
    LmData data = make_data(x, y, yerr);

    std::size_t imax = 0;
    std::size_t imin = 0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (y[i] > y[imax]) imax = i;
        if (y[i] < y[imin]) imin = i;
    }
    if (imax == 0 || imax + 1 == y.size()) {
        FitResult flagged;
        flagged.model = "gaussian_peak";
        flagged.flag = "peak_not_bracketed";
        return flagged;
    }
    const double b0 = y[imin];
    const double a0 = y[imax] - b0;
    const double c0 = x[imax];
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = std::max(y[i] - b0, 0.0);
        m0 += v;
        m2 += v * (x[i] - c0) * (x[i] - c0);
    }
    const double s0 = m0 > 0.0 ? std::sqrt(2.0 * m2 / m0) : 1.0;

    Model model;
    model.n_params = 4;
    model.eval = [](const double* p, double x_) {
        const double u = (x_ - p[0]) / p[2];
        return p[1] * std::exp(-u * u) + p[3];
    };
    model.jacobian = [](const double* p, double x_, double* j) {
        const double u = (x_ - p[0]) / p[2];
        const double g = std::exp(-u * u);
        j[0] = p[1] * g * 2.0 * u / p[2];
        j[1] = g;
        j[2] = p[1] * g * 2.0 * u * u / p[2];
        j[3] = 1.0;
    };
    FitResult result = lm_fit(model, data, {c0, a0, s0, b0},
                              {"center", "amplitude", "half_width_1e", "offset"});
    result.model = "gaussian_peak";
    result.parameters["half_width_1e"] = std::abs(result.parameters["half_width_1e"]);
    return result;
}

namespace {

FitResult fit_one_decay(std::span<const double> t, std::span<const double> y, bool gaussian_form,
                        const LmData& data) {
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const double c0 = *ymin_it - 0.05 * (*ymax_it - *ymin_it);

    // Log-linear start: ln(y - c0) against t (exponential) or t^2 (gaussian).
    std::vector<double> u, v;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = y[i] - c0;
        if (d > 0.0) {
            u.push_back(gaussian_form ? t[i] * t[i] : t[i]);
            v.push_back(std::log(d));
        }
    }
    double tau0 = t.back() > t.front() ? (t.back() - t.front()) : 1.0;
    double y00 = *ymax_it - c0;
    if (u.size() >= 2) {
        const double slope = linear_slope(u, v);
        if (slope < 0.0) tau0 = gaussian_form ? std::sqrt(-1.0 / slope) : -1.0 / slope;
        double icpt = mean_of(v) - slope * mean_of(u);
        y00 = std::exp(icpt);
    }

    Model model;
    model.n_params = 3;
    if (gaussian_form) {
        model.eval = [](const double* p, double x) {
            const double u_ = x / p[1];
            return p[0] * std::exp(-u_ * u_) + p[2];
        };
        model.jacobian = [](const double* p, double x, double* j) {
            const double u_ = x / p[1];
            const double e = std::exp(-u_ * u_);
            j[0] = e;
            j[1] = p[0] * e * 2.0 * x * x / (p[1] * p[1] * p[1]);
            j[2] = 1.0;
        };
    } else {
        model.eval = [](const double* p, double x) { return p[0] * std::exp(-x / p[1]) + p[2]; };
        model.jacobian = [](const double* p, double x, double* j) {
            const double e = std::exp(-x / p[1]);
            j[0] = e;
            j[1] = p[0] * e * x / (p[1] * p[1]);
            j[2] = 1.0;
        };
    }
    FitResult result = lm_fit(model, data, {y00, tau0, c0}, {"y0", "tau", "offset"});
    result.model = gaussian_form ? "gaussian" : "exponential";
    result.parameters["tau"] = std::abs(result.parameters["tau"]);
    return result;
}

} // namespace

FitResult fit_lifetime_1e(std::span<const double> t, std::span<const double> y, DecayForm form,
                          std::span<const double> yerr) {
    if (t.size() < 5) throw std::invalid_argument("lifetime fit needs >= 5 points");
    LmData data = make_data(t, y, yerr);

    if (linear_slope(t, y) >= 0.0) {
        FitResult flagged;
        flagged.model = "lifetime";
        flagged.flag = "non_decaying";
        return flagged;
    }
    if (form == DecayForm::exponential) return fit_one_decay(t, y, false, data);
    if (form == DecayForm::gaussian) return fit_one_decay(t, y, true, data);
    FitResult expo = fit_one_decay(t, y, false, data);
    FitResult gauss = fit_one_decay(t, y, true, data);
    if (expo.converged && !gauss.converged) return expo;
    if (gauss.converged && !expo.converged) return gauss;
    return expo.residual_rms <= gauss.residual_rms ? expo : gauss;
}

} // namespace spinecho
