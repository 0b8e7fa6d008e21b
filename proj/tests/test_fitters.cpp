#include "triham/fitters.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "triham/rng.hpp"

using namespace triham;
using namespace triham::testing;

namespace {

std::vector<double> grid(double start, double step, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = start + step * i;
    return g;
}

RamseyTrace si_like_trace(double detuning_mhz, double noise_sigma, std::uint64_t seed,
                          double t2_ns = 150.0) {
    HamiltonianParams truth;
    truth.omega = {5415.0, 4888.0, 2879.0};
    const TransitionId t = TransitionId::parse("000-100");
    DecoherenceConfig dec = DecoherenceConfig::ideal();
    dec.t2_ns[0] = t2_ns;
    dec.background_decay_ns = 365.0;
    const double drive = transition_frequency(truth, t) - detuning_mhz;
    return simulate_ramsey_trace(truth, t, drive, dec, noise_sigma, seed, grid(0, 2, 200));
}

}  // namespace

TEST_CASE("LM engine: exponential model with analytic Jacobian") {
    // y = a exp(-b t); recover from clean data far from the initial guess.
    const std::vector<double> t = grid(0, 0.25, 40);
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = 3.7 * std::exp(-0.43 * t[i]);
    auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        r.resize(static_cast<Eigen::Index>(t.size()));
        if (jac != nullptr) jac->resize(static_cast<Eigen::Index>(t.size()), 2);
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const double ti = t[static_cast<std::size_t>(i)];
            const double e = std::exp(-x(1) * ti);
            r(i) = x(0) * e - y[static_cast<std::size_t>(i)];
            if (jac != nullptr) {
                (*jac)(i, 0) = e;
                (*jac)(i, 1) = -x(0) * ti * e;
            }
        }
    };
    Eigen::VectorXd x0(2);
    x0 << 1.0, 1.0;
    const LmOutcome out = levenberg_marquardt(eval, x0);
    CHECK(out.converged);
    CHECK(out.x(0) == doctest::Approx(3.7).epsilon(1e-8));
    CHECK(out.x(1) == doctest::Approx(0.43).epsilon(1e-8));
    CHECK(out.rss < 1e-16);
}

TEST_CASE("noiseless Ramsey fit recovers the detuning to 1e-6 relative") {
    const RamseyTrace trace = si_like_trace(17.0, 0.0, 1);
    const RamseyFitResult fit = fit_ramsey(trace);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.detuning_mhz - 17.0) <= 17.0 * 1e-6);
    CHECK(fit.params.t2_ns == doctest::Approx(150.0).epsilon(1e-4));
    CHECK(fit.params.amplitude == doctest::Approx(0.40).epsilon(1e-4));
    CHECK(fit.params.offset == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(fit.params.bg_amplitude == doctest::Approx(0.30).epsilon(1e-4));
}

TEST_CASE("Monte Carlo: detuning within 3 reported sigmas in >= 99% of 500 seeds") {
    int within3 = 0;
    int within1 = 0;
    int usable = 0;
    const int n_seeds = 500;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const RamseyTrace trace =
            si_like_trace(17.0, 0.05, derive_seed(0x5eed0301, static_cast<std::uint64_t>(seed)));
        RamseyFitResult fit;
        try {
            fit = fit_ramsey(trace);
        } catch (const Error&) {
            continue;
        }
        ++usable;
        const double err = std::abs(fit.params.detuning_mhz - 17.0);
        within3 += err <= 3.0 * fit.sigmas.detuning_mhz;
        within1 += err <= 1.0 * fit.sigmas.detuning_mhz;
        // Fit errors at SI-like settings sit in the tens of kHz.
        CHECK(fit.sigmas.detuning_mhz > 0.002);
        CHECK(fit.sigmas.detuning_mhz < 0.2);
    }
    CHECK(usable >= static_cast<int>(0.99 * n_seeds));
    CHECK(within3 >= static_cast<int>(0.99 * usable));
    // One-sigma coverage validates the confidence-interval machinery.
    const double coverage = static_cast<double>(within1) / usable;
    CHECK(coverage > 0.63);
    CHECK(coverage < 0.73);
}

TEST_CASE("fit is scale covariant") {
    const RamseyTrace base = si_like_trace(17.0, 0.02, 99);
    RamseyTrace scaled = base;
    for (double& s : scaled.signal) s *= 4.0;
    const RamseyFitResult f1 = fit_ramsey(base);
    const RamseyFitResult f2 = fit_ramsey(scaled);
    CHECK(std::abs(f2.params.detuning_mhz - f1.params.detuning_mhz) <= 1e-8 * f1.params.detuning_mhz);
    CHECK(std::abs(f2.params.t2_ns - f1.params.t2_ns) <= 1e-6 * f1.params.t2_ns);
    CHECK(f2.params.amplitude == doctest::Approx(4.0 * f1.params.amplitude).epsilon(1e-6));
    CHECK(f2.params.offset == doctest::Approx(4.0 * f1.params.offset).epsilon(1e-6));
}

TEST_CASE("degenerate traces are rejected") {
    RamseyTrace flat;
    flat.delays_ns = grid(0, 2, 50);
    flat.signal.assign(50, 0.37);
    CHECK_THROWS_AS(fit_ramsey(flat), Error);
    try {
        fit_ramsey(flat);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateData);
    }

    RamseyTrace tiny;
    tiny.delays_ns = grid(0, 2, 4);
    tiny.signal.assign(4, 0.0);
    CHECK_THROWS_AS(fit_ramsey(tiny), Error);
}

TEST_CASE("iteration budget exhaustion raises NonConvergence") {
    const RamseyTrace trace = si_like_trace(17.0, 0.05, 123);
    RamseyFitOptions options;
    options.lm.max_iterations = 1;
    CHECK_THROWS_AS(fit_ramsey(trace, options), Error);
    try {
        fit_ramsey(trace, options);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonConvergence);
    }
}

TEST_CASE("transition frequency from fit: drive plus detuning") {
    RamseyFitResult fit;
    fit.converged = true;
    fit.params.detuning_mhz = 17.69;
    fit.sigmas.detuning_mhz = 0.02;
    const TransitionEstimate above = transition_from_fit(5163.0, fit, DriveSide::Above);
    CHECK(above.frequency_mhz == doctest::Approx(5180.69).epsilon(1e-12));
    CHECK(above.sigma_mhz == 0.02);
    const TransitionEstimate below = transition_from_fit(5163.0, fit, DriveSide::Below);
    CHECK(below.frequency_mhz == doctest::Approx(5145.31).epsilon(1e-12));

    fit.params.detuning_mhz = 0.0;
    CHECK(transition_from_fit(5163.0, fit, DriveSide::Above).frequency_mhz == 5163.0);
}

TEST_CASE("photon order classification") {
    CHECK(classify_photon_order(5.0, 10.0) == PhotonOrder::One);
    CHECK(classify_photon_order(5.0, 20.0) == PhotonOrder::Two);
    CHECK(classify_photon_order(5.0, 15.0) == PhotonOrder::Ambiguous);
    CHECK_THROWS_AS(classify_photon_order(0.0, 10.0), Error);
}

TEST_CASE("flux noise regression recovers synthetic amplitudes") {
    for (double sqrt_a : {27.2e-6, 5.0e-6}) {
        std::vector<DephasingPoint> points;
        SplitMix64 rng(0x5eed0302);
        for (int i = 1; i <= 8; ++i) {
            const double slope = 1e6 * i;  // rad/s per flux quantum
            const double gamma = sqrt_a * std::sqrt(std::log(2.0)) * slope;
            points.push_back({slope, gamma * (1.0 + 0.005 * rng.next_gaussian())});
        }
        const FluxNoiseFit fit = fit_flux_noise(points);
        CHECK(fit.sqrt_a_phi == doctest::Approx(sqrt_a).epsilon(0.02));
        CHECK(fit.sqrt_a_phi_sigma > 0.0);
    }
}

TEST_CASE("flux noise: noiseless round trip is exact, zero slope predicts zero") {
    const double sqrt_a = 27.2e-6;
    std::vector<DephasingPoint> points;
    points.push_back({0.0, 0.0});  // sweet spot: no dephasing from flux noise
    for (int i = 1; i <= 4; ++i) {
        const double slope = 2e6 * i;
        points.push_back({slope, sqrt_a * std::sqrt(std::log(2.0)) * slope});
    }
    const FluxNoiseFit fit = fit_flux_noise(points);
    CHECK(fit.sqrt_a_phi == doctest::Approx(sqrt_a).epsilon(1e-12));
    // Zero-intercept model: predicted dephasing at zero slope is exactly 0.
    CHECK(fit.slope * 0.0 == 0.0);

    std::vector<DephasingPoint> degenerate = {{1e6, 3.0}, {1e6, 3.1}};
    CHECK_THROWS_AS(fit_flux_noise(degenerate), Error);
    CHECK_THROWS_AS(fit_flux_noise({{1e6, 3.0}}), Error);
    CHECK_THROWS_AS(fit_flux_noise({{-1e6, 3.0}, {1e6, 3.0}}), Error);
}

TEST_CASE("angular slope conversion") {
    CHECK(angular_slope_from_linear(1.0) == doctest::Approx(6.283185307179586).epsilon(1e-15));
}

TEST_CASE("dispersion reconstruction: constant and zero slopes") {
    const std::vector<double> flux = {0.0, 0.1, 0.2, 0.35, 0.5};
    const std::vector<double> slope(flux.size(), 3.0);
    const auto curve = reconstruct_dispersion(flux, slope);
    for (std::size_t i = 0; i < flux.size(); ++i) {
        CHECK(curve[i] == doctest::Approx(3.0 * flux[i]).epsilon(1e-12));
    }
    const auto zero = reconstruct_dispersion(flux, std::vector<double>(flux.size(), 0.0));
    for (double v : zero) CHECK(v == 0.0);

    CHECK_THROWS_AS(reconstruct_dispersion({0.0, 0.1, 0.1}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(reconstruct_dispersion({0.0}, {1}), Error);
}

TEST_CASE("dispersion reconstruction converges at O(h^2) on a double well") {
    // V(x) = x^4 - 2 a^2 x^2 with a = 0.3: the derivative is sampled and the
    // cumulative integral must match V - V(x0).
    const double a = 0.3;
    auto v = [&](double x) { return x * x * x * x - 2.0 * a * a * x * x; };
    auto dv = [&](double x) { return 4.0 * x * x * x - 4.0 * a * a * x; };
    auto max_err = [&](int n) {
        std::vector<double> flux(static_cast<std::size_t>(n));
        std::vector<double> slope(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            flux[static_cast<std::size_t>(i)] = -0.5 + 1.0 * i / (n - 1);
            slope[static_cast<std::size_t>(i)] = dv(flux[static_cast<std::size_t>(i)]);
        }
        const auto curve = reconstruct_dispersion(flux, slope);
        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            err = std::max(err, std::abs(curve[static_cast<std::size_t>(i)] -
                                         (v(flux[static_cast<std::size_t>(i)]) - v(flux[0]))));
        }
        return err;
    };
    const double e1 = max_err(101);
    const double e2 = max_err(201);
    CHECK(e1 < 1e-3);
    // Halving the step shrinks the error by ~4x.
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.0);
}
