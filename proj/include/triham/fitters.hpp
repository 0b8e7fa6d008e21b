#ifndef TRIHAM_FITTERS_HPP
#define TRIHAM_FITTERS_HPP

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "triham/pulse_sim.hpp"

namespace triham {

/// Damped (Levenberg-Marquardt) nonlinear least squares with analytic
/// Jacobians. Options mirror the library-wide fitting contract: at most
/// `max_iterations` iterations, relative step tolerance `step_tolerance`.
struct LmOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;
};

struct LmOutcome {
    Eigen::VectorXd x;
    Eigen::MatrixXd normal_matrix;  // J^T J at the solution
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// `eval(x, r, J)` must fill residuals r (model - data) and, when J is not
/// null, the analytic Jacobian dr/dx. Throws NonConvergence when the
/// iteration budget is exhausted before the step tolerance is met.
LmOutcome levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*)>& eval,
    Eigen::VectorXd x0, const LmOptions& options = {});

/// Ramsey fringe model parameters, the same shape pulse-sim generates:
///   y(t) = offset + bg_amplitude exp(-t/bg_decay)
///        + amplitude exp(-t/t2) cos(2 pi detuning t + phase).
struct RamseyFitParams {
    double detuning_mhz = 0.0;
    double t2_ns = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;
    double offset = 0.0;
    double bg_amplitude = 0.0;
    double bg_decay_ns = 0.0;
};

struct RamseyFitResult {
    RamseyFitParams params;
    RamseyFitParams sigmas;      // one-sigma errors (scaled inverse normal matrix)
    // Covariance in the internal fitting parameterization: (detuning_mhz,
    // 1/t2 [1/ns], amplitude, phase_rad, offset[, bg_amplitude, 1/bg_decay]).
    Eigen::MatrixXd covariance;
    double chi2_reduced = 0.0;   // RSS / (n - p), signal units squared
    int n_iterations = 0;
    bool converged = false;
};

struct RamseyFitOptions {
    std::optional<double> detuning_guess_mhz;  // spectral peak when absent
    bool fit_background = true;                // fix bg terms to zero when false
    LmOptions lm;
};

/// Fits the fringe model to a trace. Requires >= 8 samples; throws
/// DegenerateData when the signal variance is indistinguishable from the
/// noise floor, NonConvergence after the iteration budget. The reported
/// detuning is non-negative (the model is even in detuning).
RamseyFitResult fit_ramsey(const RamseyTrace& trace, const RamseyFitOptions& options = {});

/// Dominant-peak frequency (MHz) of a mean-removed discrete spectrum over a
/// zero-padded grid; ties break toward lower frequency. Also the initial
/// guess used by fit_ramsey. Optionally reports the complex amplitude's
/// magnitude and phase at the peak.
double estimate_dominant_frequency(const std::vector<double>& times_ns,
                                   const std::vector<double>& signal,
                                   double* amplitude = nullptr, double* phase = nullptr);

enum class DriveSide { Above, Below };

struct TransitionEstimate {
    double frequency_mhz = 0.0;
    double sigma_mhz = 0.0;
};

/// Transition frequency as drive +/- fitted |detuning| with the detuning's
/// sigma propagated (the drive is treated as exact).
TransitionEstimate transition_from_fit(double drive_frequency_mhz,
                                       const RamseyFitResult& fit, DriveSide side);

struct RabiFitParams {
    double frequency_mhz = 0.0;
    double decay_ns = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;
    double offset = 0.0;
};

struct RabiFitResult {
    RabiFitParams params;
    RabiFitParams sigmas;
    double chi2_reduced = 0.0;
    int n_iterations = 0;
    bool converged = false;
};

/// Decaying-cosine fit for Rabi traces:
///   y(tau) = offset + amplitude cos(2 pi f tau + phase) exp(-tau/decay).
RabiFitResult fit_rabi(const RabiTrace& trace);

enum class PhotonOrder { One, Two, Ambiguous };

/// Classifies a transition from the Rabi frequencies at drive amplitude A
/// and 2A: ratio near 2 -> single photon, near 4 -> two photon.
PhotonOrder classify_photon_order(double rabi_freq_at_amp, double rabi_freq_at_double_amp,
                                  double tolerance = 0.5);

/// Dephasing rate vs. flux-dispersion slope, for 1/f flux-noise amplitude
/// regression: gamma = sqrt(A ln2) |slope|.
struct DephasingPoint {
    double flux_slope_rad_per_s;  // |domega/dPhi|, rad/s per flux quantum
    double gamma_phi_per_s;       // pure dephasing rate, 1/s
};

/// Converts a linear-frequency slope (Hz per flux quantum) to the angular
/// units DephasingPoint expects.
inline double angular_slope_from_linear(double hz_per_phi0) {
    return 6.283185307179586476925286766559 * hz_per_phi0;
}

struct FluxNoiseFit {
    double sqrt_a_phi = 0.0;        // flux quanta
    double sqrt_a_phi_sigma = 0.0;  // one sigma
    double slope = 0.0;             // fitted sqrt(A ln2)
    double slope_sigma = 0.0;
};

/// Zero-intercept regression of gamma vs |slope|. Needs >= 2 points with
/// distinct slopes (DegenerateData otherwise).
FluxNoiseFit fit_flux_noise(const std::vector<DephasingPoint>& points);

/// Cumulative trapezoidal integral of slope samples over a strictly
/// increasing flux grid, anchored to zero at the first point. The result is
/// only defined up to an additive linear function of flux.
std::vector<double> reconstruct_dispersion(const std::vector<double>& flux_grid,
                                           const std::vector<double>& slope_samples);

}  // namespace triham

#endif
