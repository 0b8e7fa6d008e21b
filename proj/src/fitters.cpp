#include "triham/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "triham/errors.hpp"

namespace triham {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLn2 = 0.69314718055994530941723212145818;

// exp with clamped argument; keeps trial LM steps from overflowing.
inline double safe_exp(double x) { return std::exp(std::clamp(x, -500.0, 500.0)); }

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Noise floor from first differences (signal assumed smooth on the grid).
double diff_noise_estimate(const std::vector<double>& v) {
    if (v.size() < 3) return 0.0;
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    return sample_std(d) / std::sqrt(2.0);
}

}  // namespace

LmOutcome levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>& eval,
    Eigen::VectorXd x0, const LmOptions& options) {
    const Eigen::Index p = x0.size();
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    eval(x, r, &jac);
    double rss = r.squaredNorm();

    double mu = 1e-3;
    double nu = 2.0;
    LmOutcome out;
    out.converged = false;

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        // Marquardt scaling with a small ridge so zero-curvature directions
        // (e.g. an unused background term) stay solvable.
        Eigen::VectorXd damp = jtj.diagonal();
        const double floor = std::max(1e-12, 1e-12 * damp.maxCoeff());
        for (Eigen::Index i = 0; i < p; ++i) damp(i) = std::max(damp(i), floor);

        Eigen::MatrixXd lhs = jtj;
        lhs.diagonal() += mu * damp;
        const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);

        const double step_norm = step.norm();
        const double x_norm = x.norm();
        if (step_norm <= options.step_tolerance * (x_norm + options.step_tolerance)) {
            out.converged = true;
            break;
        }

        const Eigen::VectorXd x_trial = x + step;
        Eigen::VectorXd r_trial;
        eval(x_trial, r_trial, nullptr);
        const double rss_trial = r_trial.squaredNorm();
        if (rss_trial < rss && std::isfinite(rss_trial)) {
            x = x_trial;
            eval(x, r, &jac);
            rss = r.squaredNorm();
            mu = std::max(mu / 3.0, 1e-14);
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if (mu > 1e14) {
                // Damping saturated: no descent direction left at double
                // precision, treat the current point as converged.
                out.converged = true;
                break;
            }
        }
    }
    if (!out.converged) {
        throw Error(ErrorKind::NonConvergence,
                    "no convergence after " + std::to_string(options.max_iterations) +
                        " iterations (rss " + std::to_string(rss) + ")");
    }
    eval(x, r, &jac);
    out.x = x;
    out.normal_matrix = jac.transpose() * jac;
    out.rss = r.squaredNorm();
    out.iterations = iter;
    return out;
}

double estimate_dominant_frequency(const std::vector<double>& times_ns,
                                   const std::vector<double>& signal, double* amplitude,
                                   double* phase) {
    const std::size_t n = times_ns.size();
    if (n < 4 || signal.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "need >= 4 samples for a spectrum estimate");
    }
    const double span = times_ns.back() - times_ns.front();
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) min_step = std::min(min_step, times_ns[i] - times_ns[i - 1]);
    if (!(span > 0.0) || !(min_step > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "times must be strictly increasing");
    }
    const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);

    const double f_nyquist = 1e3 / (2.0 * min_step);
    const double f_min = 0.8e3 / span;  // sub-period frequencies are background, not fringe
    const std::size_t grid = 8 * n;
    const double df = (f_nyquist - f_min) / static_cast<double>(grid);

    auto spectrum_at = [&](double f) {
        std::complex<double> s(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = -kTwoPi * f * times_ns[i] * 1e-3;
            s += (signal[i] - mean) * std::complex<double>(std::cos(arg), std::sin(arg));
        }
        return s;
    };

    double best_f = f_min;
    double best_power = -1.0;
    for (std::size_t k = 0; k <= grid; ++k) {
        const double f = f_min + df * static_cast<double>(k);
        const double power = std::norm(spectrum_at(f));
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    // Parabolic refinement on the power grid.
    if (best_f > f_min + df && best_f < f_nyquist - df) {
        const double pm = std::norm(spectrum_at(best_f - df));
        const double pp = std::norm(spectrum_at(best_f + df));
        const double denom = pm - 2.0 * best_power + pp;
        if (denom < 0.0) best_f += 0.5 * df * (pm - pp) / denom;
    }
    if (amplitude != nullptr || phase != nullptr) {
        const std::complex<double> s = spectrum_at(best_f);
        if (amplitude != nullptr) *amplitude = 2.0 * std::abs(s) / static_cast<double>(n);
        if (phase != nullptr) *phase = std::arg(s);
    }
    return best_f;
}

namespace {

// Internal Ramsey parameterization: (f, lambda2, A, phi, c0, c1, lambda_bg)
// with decay rates lambda = 1/T in 1/ns, so the parameters are unconstrained.
struct RamseyModel {
    const std::vector<double>& t;
    const std::vector<double>& y;
    bool fit_background;

    int n_params() const { return fit_background ? 7 : 5; }

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const auto n = static_cast<Eigen::Index>(t.size());
        r.resize(n);
        if (jac != nullptr) jac->resize(n, n_params());
        const double f = x(0), lambda2 = x(1), a = x(2), phi = x(3), c0 = x(4);
        const double c1 = fit_background ? x(5) : 0.0;
        const double lambda_bg = fit_background ? x(6) : 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ti = t[static_cast<std::size_t>(i)];
            const double env = safe_exp(-lambda2 * ti);
            const double bg = safe_exp(-lambda_bg * ti);
            const double arg = kTwoPi * f * ti * 1e-3 + phi;
            const double c = std::cos(arg), s = std::sin(arg);
            r(i) = c0 + c1 * bg + a * env * c - y[static_cast<std::size_t>(i)];
            if (jac != nullptr) {
                (*jac)(i, 0) = -a * env * s * kTwoPi * ti * 1e-3;
                (*jac)(i, 1) = -a * ti * env * c;
                (*jac)(i, 2) = env * c;
                (*jac)(i, 3) = -a * env * s;
                (*jac)(i, 4) = 1.0;
                if (fit_background) {
                    (*jac)(i, 5) = bg;
                    (*jac)(i, 6) = -c1 * ti * bg;
                }
            }
        }
    }
};

}  // namespace

RamseyFitResult fit_ramsey(const RamseyTrace& trace, const RamseyFitOptions& options) {
    const std::vector<double>& t = trace.delays_ns;
    const std::vector<double>& y = trace.signal;
    if (t.size() < 8 || y.size() != t.size()) {
        throw Error(ErrorKind::InvalidArgument, "fit_ramsey needs >= 8 samples");
    }
    const double y_std = sample_std(y);
    const double noise = diff_noise_estimate(y);
    const double y_scale = std::abs(std::accumulate(y.begin(), y.end(), 0.0)) /
                               static_cast<double>(y.size()) +
                           1.0;
    if (y_std < std::max(1.2 * noise, 1e-12 * y_scale)) {
        throw Error(ErrorKind::DegenerateData,
                    "signal variance is at the noise floor; nothing to fit");
    }

    double guess_amp = 0.0, guess_phase = 0.0;
    const double spectral_f = estimate_dominant_frequency(t, y, &guess_amp, &guess_phase);
    const double f0 = options.detuning_guess_mhz.value_or(spectral_f);
    const double span = t.back() - t.front();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    RamseyModel model{t, y, options.fit_background};
    Eigen::VectorXd x0(model.n_params());
    x0(0) = std::abs(f0);
    x0(1) = 2.0 / span;  // T2 guess: half the record
    x0(2) = std::max(guess_amp, 1e-6);
    x0(3) = guess_phase;
    x0(4) = mean;
    if (options.fit_background) {
        // Slow component: head-tail imbalance of the signal.
        const std::size_t head = std::max<std::size_t>(1, t.size() / 8);
        double head_mean = 0.0, tail_mean = 0.0;
        for (std::size_t i = 0; i < head; ++i) {
            head_mean += y[i];
            tail_mean += y[y.size() - 1 - i];
        }
        x0(5) = (head_mean - tail_mean) / static_cast<double>(head);
        x0(6) = 3.0 / span;
    }

    const LmOutcome lm = levenberg_marquardt(model, x0, options.lm);

    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    const Eigen::Index p = model.n_params();
    const double dof = static_cast<double>(n - p);
    const double scale = dof > 0.0 ? lm.rss / dof : 0.0;
    Eigen::MatrixXd cov_internal = lm.normal_matrix.fullPivLu().inverse() * scale;

    // Map the internal (rate) parameterization to reported values; flip to a
    // non-negative detuning and propagate sigmas by the delta method.
    Eigen::VectorXd v = lm.x;
    if (v(0) < 0.0) {
        v(0) = -v(0);
        v(3) = -v(3);
    }
    auto rate_to_time = [](double lambda, double var,
                           double& time_out, double& sigma_out) {
        if (lambda <= 0.0) {
            time_out = std::numeric_limits<double>::infinity();
            sigma_out = std::numeric_limits<double>::infinity();
        } else {
            time_out = 1.0 / lambda;
            sigma_out = std::sqrt(std::max(var, 0.0)) / (lambda * lambda);
        }
    };

    RamseyFitResult out;
    out.params.detuning_mhz = v(0);
    out.params.amplitude = v(2);
    out.params.phase_rad = v(3);
    out.params.offset = v(4);
    out.sigmas.detuning_mhz = std::sqrt(std::max(cov_internal(0, 0), 0.0));
    out.sigmas.amplitude = std::sqrt(std::max(cov_internal(2, 2), 0.0));
    out.sigmas.phase_rad = std::sqrt(std::max(cov_internal(3, 3), 0.0));
    out.sigmas.offset = std::sqrt(std::max(cov_internal(4, 4), 0.0));
    rate_to_time(v(1), cov_internal(1, 1), out.params.t2_ns, out.sigmas.t2_ns);
    if (options.fit_background) {
        out.params.bg_amplitude = v(5);
        out.sigmas.bg_amplitude = std::sqrt(std::max(cov_internal(5, 5), 0.0));
        rate_to_time(v(6), cov_internal(6, 6), out.params.bg_decay_ns, out.sigmas.bg_decay_ns);
    } else {
        out.params.bg_decay_ns = std::numeric_limits<double>::infinity();
    }
    out.covariance = cov_internal;
    out.chi2_reduced = scale;
    out.n_iterations = lm.iterations;
    out.converged = lm.converged;
    return out;
}

TransitionEstimate transition_from_fit(double drive_frequency_mhz, const RamseyFitResult& fit,
                                       DriveSide side) {
    if (!fit.converged) {
        throw Error(ErrorKind::InvalidArgument, "fit did not converge");
    }
    const double detuning = std::abs(fit.params.detuning_mhz);
    TransitionEstimate est;
    est.frequency_mhz =
        side == DriveSide::Above ? drive_frequency_mhz + detuning : drive_frequency_mhz - detuning;
    est.sigma_mhz = fit.sigmas.detuning_mhz;
    return est;
}

namespace {

struct RabiModel {
    const std::vector<double>& t;
    const std::vector<double>& y;

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const auto n = static_cast<Eigen::Index>(t.size());
        r.resize(n);
        if (jac != nullptr) jac->resize(n, 5);
        const double f = x(0), lambda = x(1), a = x(2), phi = x(3), c0 = x(4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ti = t[static_cast<std::size_t>(i)];
            const double env = safe_exp(-lambda * ti);
            const double arg = kTwoPi * f * ti * 1e-3 + phi;
            const double c = std::cos(arg), s = std::sin(arg);
            r(i) = c0 + a * env * c - y[static_cast<std::size_t>(i)];
            if (jac != nullptr) {
                (*jac)(i, 0) = -a * env * s * kTwoPi * ti * 1e-3;
                (*jac)(i, 1) = -a * ti * env * c;
                (*jac)(i, 2) = env * c;
                (*jac)(i, 3) = -a * env * s;
                (*jac)(i, 4) = 1.0;
            }
        }
    }
};

}  // namespace

RabiFitResult fit_rabi(const RabiTrace& trace) {
    const std::vector<double>& t = trace.durations_ns;
    const std::vector<double>& y = trace.signal;
    if (t.size() < 8 || y.size() != t.size()) {
        throw Error(ErrorKind::InvalidArgument, "fit_rabi needs >= 8 samples");
    }
    const double y_std = sample_std(y);
    const double noise = diff_noise_estimate(y);
    if (y_std < std::max(1.2 * noise, 1e-12)) {
        throw Error(ErrorKind::DegenerateData, "flat Rabi trace");
    }
    double amp = 0.0, phase = 0.0;
    const double f0 = estimate_dominant_frequency(t, y, &amp, &phase);
    const double span = t.back() - t.front();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    RabiModel model{t, y};
    Eigen::VectorXd x0(5);
    x0 << f0, 0.5 / span, std::max(amp, 1e-6), phase, mean;
    const LmOutcome lm = levenberg_marquardt(model, x0);

    const double dof = static_cast<double>(t.size()) - 5.0;
    const double scale = dof > 0.0 ? lm.rss / dof : 0.0;
    const Eigen::MatrixXd cov = lm.normal_matrix.fullPivLu().inverse() * scale;

    Eigen::VectorXd v = lm.x;
    if (v(0) < 0.0) {
        v(0) = -v(0);
        v(3) = -v(3);
    }
    RabiFitResult out;
    out.params.frequency_mhz = v(0);
    out.params.amplitude = v(2);
    out.params.phase_rad = v(3);
    out.params.offset = v(4);
    out.sigmas.frequency_mhz = std::sqrt(std::max(cov(0, 0), 0.0));
    out.sigmas.amplitude = std::sqrt(std::max(cov(2, 2), 0.0));
    out.sigmas.phase_rad = std::sqrt(std::max(cov(3, 3), 0.0));
    out.sigmas.offset = std::sqrt(std::max(cov(4, 4), 0.0));
    if (v(1) > 0.0) {
        out.params.decay_ns = 1.0 / v(1);
        out.sigmas.decay_ns = std::sqrt(std::max(cov(1, 1), 0.0)) / (v(1) * v(1));
    } else {
        out.params.decay_ns = std::numeric_limits<double>::infinity();
        out.sigmas.decay_ns = std::numeric_limits<double>::infinity();
    }
    out.chi2_reduced = scale;
    out.n_iterations = lm.iterations;
    out.converged = lm.converged;
    return out;
}

PhotonOrder classify_photon_order(double rabi_freq_at_amp, double rabi_freq_at_double_amp,
                                  double tolerance) {
    if (!(rabi_freq_at_amp > 0.0) || !(rabi_freq_at_double_amp > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "Rabi frequencies must be positive");
    }
    const double ratio = rabi_freq_at_double_amp / rabi_freq_at_amp;
    if (std::abs(ratio - 2.0) < tolerance) return PhotonOrder::One;
    if (std::abs(ratio - 4.0) < tolerance) return PhotonOrder::Two;
    return PhotonOrder::Ambiguous;
}

FluxNoiseFit fit_flux_noise(const std::vector<DephasingPoint>& points) {
    if (points.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "need at least 2 dephasing points");
    }
    for (const auto& p : points) {
        if (p.flux_slope_rad_per_s < 0.0 || p.gamma_phi_per_s < 0.0) {
            throw Error(ErrorKind::InvalidArgument,
                        "dephasing points are magnitudes and must be >= 0");
        }
    }
    const double first = points.front().flux_slope_rad_per_s;
    bool distinct = false;
    for (const auto& p : points) {
        if (p.flux_slope_rad_per_s != first) distinct = true;
    }
    if (!distinct) {
        throw Error(ErrorKind::DegenerateData, "all flux slopes are equal");
    }

    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : points) {
        sxy += p.flux_slope_rad_per_s * p.gamma_phi_per_s;
        sxx += p.flux_slope_rad_per_s * p.flux_slope_rad_per_s;
    }
    const double m = sxy / sxx;
    double rss = 0.0;
    for (const auto& p : points) {
        const double r = p.gamma_phi_per_s - m * p.flux_slope_rad_per_s;
        rss += r * r;
    }
    const double dof = static_cast<double>(points.size()) - 1.0;
    const double m_sigma = std::sqrt((rss / dof) / sxx);

    FluxNoiseFit out;
    out.slope = m;
    out.slope_sigma = m_sigma;
    out.sqrt_a_phi = m / std::sqrt(kLn2);
    out.sqrt_a_phi_sigma = m_sigma / std::sqrt(kLn2);
    return out;
}

std::vector<double> reconstruct_dispersion(const std::vector<double>& flux_grid,
                                           const std::vector<double>& slope_samples) {
    if (flux_grid.size() != slope_samples.size() || flux_grid.size() < 2) {
        throw Error(ErrorKind::GridError, "flux grid and slopes must have equal size >= 2");
    }
    for (std::size_t i = 1; i < flux_grid.size(); ++i) {
        if (!(flux_grid[i] > flux_grid[i - 1])) {
            throw Error(ErrorKind::GridError, "flux grid must be strictly increasing");
        }
    }
    std::vector<double> curve(flux_grid.size(), 0.0);
    for (std::size_t i = 1; i < flux_grid.size(); ++i) {
        const double h = flux_grid[i] - flux_grid[i - 1];
        curve[i] = curve[i - 1] + 0.5 * h * (slope_samples[i] + slope_samples[i - 1]);
    }
    return curve;
}

}  // namespace triham
