#include "triham/pipeline.hpp"

#include <cmath>

#include "triham/rng.hpp"

namespace triham {

EndToEndReport run_end_to_end(const EndToEndConfig& config) {
    if (config.delay_count < 8 || config.delay_step_ns <= 0.0) {
        throw Error(ErrorKind::InvalidArgument, "bad delay grid");
    }
    std::vector<double> delays(static_cast<std::size_t>(config.delay_count));
    for (int i = 0; i < config.delay_count; ++i) {
        delays[static_cast<std::size_t>(i)] =
            config.delay_start_ns + config.delay_step_ns * i;
    }

    EndToEndReport report;
    report.seed = config.seed;
    const auto& transitions = enumerate_transitions();
    std::vector<FrequencyMeasurement> usable;
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        TransitionRun run(transitions[i]);
        run.true_frequency_mhz = transition_frequency(config.truth, transitions[i]);
        run.drive_frequency_mhz = run.true_frequency_mhz - config.detuning_mhz;
        try {
            const RamseyTrace trace = simulate_ramsey_trace(
                config.truth, transitions[i], run.drive_frequency_mhz, config.decoherence,
                config.noise_sigma, derive_seed(config.seed, i), delays, config.shape);
            run.fit = fit_ramsey(trace);
            const TransitionEstimate est =
                transition_from_fit(run.drive_frequency_mhz, run.fit, DriveSide::Above);
            run.measured_mhz = est.frequency_mhz;
            // Guard the weighted solve against an exactly-zero fit error on
            // noiseless traces.
            run.sigma_mhz = std::max(est.sigma_mhz, 1e-9);
            run.usable = true;
            usable.emplace_back(run.transition, run.measured_mhz, run.sigma_mhz);
        } catch (const Error& e) {
            run.failure = e.what();
        }
        report.transitions.push_back(std::move(run));
    }

    report.estimation = solve_least_squares(usable);  // throws SingularDesign if incomplete
    const auto got = report.estimation.params.to_vector();
    const auto want = config.truth.to_vector();
    report.all_within_3sigma = true;
    for (int p = 0; p < kNumParams; ++p) {
        report.truth_delta[static_cast<std::size_t>(p)] =
            got[static_cast<std::size_t>(p)] - want[static_cast<std::size_t>(p)];
        report.sigma[static_cast<std::size_t>(p)] =
            std::sqrt(std::max(report.estimation.covariance(p, p), 0.0));
        if (std::abs(report.truth_delta[static_cast<std::size_t>(p)]) >
            3.0 * report.sigma[static_cast<std::size_t>(p)]) {
            report.all_within_3sigma = false;
        }
    }
    return report;
}

}  // namespace triham
