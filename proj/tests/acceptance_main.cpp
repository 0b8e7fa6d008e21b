// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Every tolerance is pinned here, in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracle_helpers.hpp"
#include "triham/crosstalk.hpp"
#include "triham/estimator.hpp"
#include "triham/fitters.hpp"
#include "triham/multimode.hpp"
#include "triham/pipeline.hpp"
#include "triham/pulse_sim.hpp"
#include "triham/rng.hpp"

using namespace triham;
using namespace triham::testing;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& summary, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.2f s)\n", pass ? "PASS" : "FAIL", criterion,
                summary.c_str(), seconds);
    if (!pass) ++g_failures;
}

void run(int criterion, const std::function<std::pair<bool, std::string>()>& body) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string summary;
    try {
        std::tie(pass, summary) = body();
    } catch (const std::exception& e) {
        pass = false;
        summary = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(criterion, pass, summary, seconds);
}

std::vector<FrequencyMeasurement> table_measurements() {
    const auto& ts = reference_seven_transitions();
    const auto f = table_frequencies_mhz();
    const auto s = table_sigmas_mhz();
    std::vector<FrequencyMeasurement> out;
    for (std::size_t i = 0; i < ts.size(); ++i) out.emplace_back(ts[i], f[i], s[i]);
    return out;
}

// Per-transition one-sigma noise: published sigmas for the published seven,
// 30 kHz for the remaining five.
double transition_sigma(const TransitionId& t) {
    const auto& ref = reference_seven_transitions();
    const auto f = table_sigmas_mhz();
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (ref[i] == t) return f[i];
    }
    return 0.030;
}

std::vector<FrequencyMeasurement> noisy_twelve(const HamiltonianParams& truth,
                                               std::uint64_t seed) {
    std::vector<FrequencyMeasurement> out;
    std::size_t i = 0;
    for (const auto& t : enumerate_transitions()) {
        const double sigma = transition_sigma(t);
        SplitMix64 rng(derive_seed(seed, i++));
        out.emplace_back(t, transition_frequency(truth, t) + sigma * rng.next_gaussian(),
                         sigma);
    }
    return out;
}

std::pair<bool, std::string> criterion_1() {
    const EstimationResult r = solve_exact(table_measurements());
    const double printed[kNumParams] = {5415.38, 4888.21, 2879.44, -6.55, 6.16, 144.196, -4.51};
    const double tol[kNumParams] = {0.010, 0.010, 0.010, 0.010, 0.010, 0.200, 0.010};
    const auto got = r.params.to_vector();
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < kNumParams; ++i) {
        const double err = std::abs(got[static_cast<std::size_t>(i)] - printed[i]);
        worst = std::max(worst, err / tol[i]);
        pass = pass && err <= tol[i];
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "published seven-frequency inversion matches printed parameters "
                  "(worst error %.1f%% of tolerance)",
                  100.0 * worst);
    return {pass, buf};
}

std::pair<bool, std::string> criterion_2() {
    const auto survey = subset_survey();
    int complete = 0;
    for (const auto& row : survey) complete += row.invertible;
    const bool pass = survey.size() == 792 && complete == 384;
    return {pass, "complete seven-transition subsets: " + std::to_string(complete) +
                      " of " + std::to_string(survey.size()) + " (expected 384 of 792)"};
}

std::pair<bool, std::string> criterion_3() {
    const auto subsets = complete_subsets();
    SplitMix64 rng(0xacce001);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const HamiltonianParams truth = random_params(rng);
        const auto want = truth.to_vector();
        for (const auto& subset : subsets) {
            std::vector<FrequencyMeasurement> m;
            for (const auto& t : subset) {
                m.emplace_back(t, transition_frequency(truth, t), 0.03);
            }
            const auto got = solve_exact(m).params.to_vector();
            for (int i = 0; i < kNumParams; ++i) {
                const double rel =
                    std::abs(got[static_cast<std::size_t>(i)] - want[static_cast<std::size_t>(i)]) /
                    std::max(1.0, std::abs(want[static_cast<std::size_t>(i)]));
                worst = std::max(worst, rel);
            }
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "forward-then-invert identity over 100 draws x 384 subsets "
                  "(worst relative error %.2e, limit 1e-9)",
                  worst);
    return {worst <= 1e-9, buf};
}

std::pair<bool, std::string> criterion_4() {
    // As specified: Gaussian noise at the published sigmas, selection error
    // as the standard deviation across all complete subsets, median over
    // 200 seeds within a factor of 3 of the published row. This criterion
    // is not attainable from the published sigmas alone (see the decisions
    // ledger): the published selection errors imply an inconsistency in the
    // raw 12 frequencies roughly 12x larger than the quoted fit errors.
    const HamiltonianParams truth = table_params();
    const double table_row[kNumParams] = {0.330, 0.310, 0.290, 0.110, 0.100, 0.100, 0.080};
    std::array<std::vector<double>, kNumParams> samples;
    for (int seed = 0; seed < 200; ++seed) {
        const ParamVector err =
            selection_error(noisy_twelve(truth, static_cast<std::uint64_t>(seed)));
        for (int p = 0; p < kNumParams; ++p) {
            samples[static_cast<std::size_t>(p)].push_back(err(p));
        }
    }
    bool pass = true;
    double worst_ratio = 1.0;
    std::string detail;
    for (int p = 0; p < kNumParams; ++p) {
        auto& v = samples[static_cast<std::size_t>(p)];
        std::nth_element(v.begin(), v.begin() + 100, v.end());
        const double median = v[100];
        const double ratio = median / table_row[p];
        if (ratio < 1.0 / 3.0 || ratio > 3.0) pass = false;
        worst_ratio = std::min(worst_ratio, ratio);
        if (p == 0) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "omega1 median %.1f kHz vs 330 kHz", 1e3 * median);
            detail = buf;
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "median selection error vs published row, factor-3 window (%s; "
                  "smallest ratio %.3f, needs >= 0.333)",
                  detail.c_str(), worst_ratio);
    return {pass, buf};
}

std::pair<bool, std::string> criterion_5() {
    EndToEndConfig cfg;
    cfg.truth = table_params();
    DecoherenceConfig dec = DecoherenceConfig::device_preset();
    for (auto& t2 : dec.t2_ns) t2 = 150.0;  // SI-like T2
    cfg.decoherence = dec;
    int all_within = 0;
    int fit_sigma_in_range = 0;
    int fits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        cfg.seed = static_cast<std::uint64_t>(seed);
        const EndToEndReport report = run_end_to_end(cfg);
        all_within += report.all_within_3sigma;
        for (const auto& run : report.transitions) {
            if (!run.usable) continue;
            ++fits;
            // Tens-of-kHz fit errors, consistent with the published 20-40 kHz.
            fit_sigma_in_range += run.sigma_mhz >= 0.005 && run.sigma_mhz <= 0.100;
        }
    }
    const bool pass = all_within >= 95 && fit_sigma_in_range == fits && fits >= 1100;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "end-to-end protocol: %d/100 seeds with all parameters within 3 sigma; "
                  "%d/%d fit errors in the tens-of-kHz range",
                  all_within, fit_sigma_in_range, fits);
    return {pass, buf};
}

std::pair<bool, std::string> criterion_6() {
    SplitMix64 rng(0xacce006);
    std::vector<double> delays;
    for (int i = 0; i < 220; ++i) delays.push_back(2.0 * i);
    const double resolution = 1e3 / (delays.back() - delays.front());
    double worst_freq = 0.0;
    double worst_prob = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const HamiltonianParams truth = random_params(rng);
        for (const auto& t : enumerate_transitions()) {
            const double f_true = transition_frequency(truth, t);
            const double drive = f_true - 17.0;
            const PulseSequence seq = ramsey_sequence(truth, t, drive);
            const auto pop = simulate_sequence_population(truth, seq, delays);
            const double fringe = estimate_dominant_frequency(delays, pop);
            worst_freq = std::max(worst_freq, std::abs(fringe - 17.0));
            // Probability conservation across the full register.
            double total = 0.0;
            for (BasisState s : BasisState::all()) {
                PulseSequence probe = seq;
                probe.readout_state = s;
                total += simulate_sequence_population(truth, probe, {delays[101]}).front();
            }
            worst_prob = std::max(worst_prob, std::abs(total - 1.0));
        }
    }
    char buf[180];
    std::snprintf(buf, sizeof buf,
                  "unitary fringe vs eigenvalue difference: worst %.3f MHz (limit %.3f); "
                  "probability deviation %.1e (limit 1e-10)",
                  worst_freq, resolution, worst_prob);
    return {worst_freq < resolution && worst_prob <= 1e-10, buf};
}

std::pair<bool, std::string> criterion_7() {
    // Noiseless: < 0.1% within 3 iterations.
    auto truth_for = [](std::uint64_t seed) {
        SplitMix64 rng(seed);
        CrosstalkModel m = CrosstalkModel::identity(5);
        for (int i = 0; i < 5; ++i) {
            m.c(i, i) = 0.8 + 0.45 * rng.next_double();
            for (int j = 0; j < 5; ++j) {
                if (i != j) m.c(i, j) = 0.10 * m.c(j, j) * (2.0 * rng.next_double() - 1.0);
            }
            m.f0(i) = rng.next_double();
        }
        return m;
    };
    double noiseless_mean = 0.0;
    {
        VirtualDeviceConfig cfg;
        cfg.truth = truth_for(21);
        VirtualDevice dev(cfg);
        CalibrationConfig cal;
        cal.iterations = 3;
        const CalibrationState state = calibrate(dev, cal);
        noiseless_mean = residual_metrics(cfg.truth, state.correction).mean_offdiag_pct;
    }
    // Realistic noise preset: mean <= 0.5%, max <= 3.4% within 6 iterations.
    double noisy_mean = 0.0, noisy_max = 0.0;
    {
        const VirtualDeviceConfig cfg =
            VirtualDeviceConfig::realistic_noise_preset(truth_for(22), 22);
        VirtualDevice dev(cfg);
        CalibrationConfig cal;
        cal.iterations = 6;
        const CalibrationState state = calibrate(dev, cal);
        const ResidualMetrics m = residual_metrics(cfg.truth, state.correction);
        noisy_mean = m.mean_offdiag_pct;
        noisy_max = m.max_offdiag_pct;
    }
    const bool pass = noiseless_mean < 0.1 && noisy_mean <= 0.5 && noisy_max <= 3.4;
    char buf[180];
    std::snprintf(buf, sizeof buf,
                  "crosstalk calibration: noiseless mean %.4f%% (limit 0.1); noisy mean "
                  "%.4f%% (limit 0.5), max %.4f%% (limit 3.4)",
                  noiseless_mean, noisy_mean, noisy_max);
    return {pass, buf};
}

std::pair<bool, std::string> criterion_8() {
    SplitMix64 rng(0xacce008);
    double worst_full = 0.0;
    bool monotone = true;
    for (int rep = 0; rep < 20; ++rep) {
        // Seeded two-subsystem template: coupled anharmonic ladders.
        auto ladder = [&](int levels) {
            SubsystemSpec s;
            s.name = "ladder";
            const double omega = 60.0 + 60.0 * rng.next_double();
            const double stretch = 3.0 * rng.next_double();
            s.h0 = Eigen::MatrixXcd::Zero(levels, levels);
            for (int n = 0; n < levels; ++n) s.h0(n, n) = omega * n + stretch * n * n;
            Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(levels, levels);
            for (int n = 0; n + 1 < levels; ++n) {
                x(n, n + 1) = x(n + 1, n) = std::sqrt(static_cast<double>(n + 1));
            }
            s.ops["x"] = x;
            return s;
        };
        CompositeSystem sys;
        sys.subsystems.push_back(ladder(10));
        sys.subsystems.push_back(ladder(10));
        sys.couplings.push_back({5.0 + 10.0 * rng.next_double(), {{0, "x"}, {1, "x"}}});

        const Spectrum exact = exact_diagonalize(sys);
        const HierarchicalResult full = hierarchical_diagonalize(sys, {10, 10});
        for (Eigen::Index i = 0; i < exact.eigenvalues.size(); ++i) {
            worst_full = std::max(worst_full, std::abs(full.eigenvalues(i) -
                                                       exact.eigenvalues(i)));
        }
        double previous = std::numeric_limits<double>::infinity();
        for (int keep = 3; keep <= 8; ++keep) {
            const HierarchicalResult r = hierarchical_diagonalize(sys, {keep, keep});
            double err = 0.0;
            for (int i = 0; i < 8; ++i) {
                err = std::max(err, std::abs(r.eigenvalues(i) - exact.eigenvalues(i)));
            }
            if (err > previous + 1e-9) monotone = false;
            previous = err;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "hierarchical diagonalization: full-retention error %.1e (limit 1e-8); "
                  "truncation error monotone on 20 templates: %s",
                  worst_full, monotone ? "yes" : "no");
    return {worst_full <= 1e-8 && monotone, buf};
}

std::pair<bool, std::string> criterion_9() {
    const CouplerTemplateConfig config;
    const auto rows = coupler_gap_sweep(config, {50000.0, 9000.0});
    const double k_off = std::abs(rows[0].params.k123);
    const double k_on = std::abs(rows[1].params.k123);
    const double min_overlap = std::min(rows[0].min_overlap, rows[1].min_overlap);
    const bool pass = k_on > k_off && min_overlap > 0.5;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "|K123| at 9 GHz gap %.4f MHz > %.4f MHz at 50 GHz; min overlap %.3f "
                  "(limit 0.5)",
                  k_on, k_off, min_overlap);
    return {pass, buf};
}

std::pair<bool, std::string> criterion_10() {
    bool pass = true;
    std::string detail;
    for (double sqrt_a : {27.2e-6, 5.0e-6}) {
        std::vector<DephasingPoint> points;
        SplitMix64 rng(0xacce010);
        for (int i = 1; i <= 10; ++i) {
            const double slope = 0.8e6 * i;
            const double gamma = sqrt_a * std::sqrt(std::log(2.0)) * slope;
            points.push_back({slope, gamma * (1.0 + 0.01 * rng.next_gaussian())});
        }
        const FluxNoiseFit fit = fit_flux_noise(points);
        const double rel = std::abs(fit.sqrt_a_phi - sqrt_a) / sqrt_a;
        if (rel > 0.02) pass = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.1f uPhi0: %.2f%% error", detail.empty() ? "" : "; ",
                      1e6 * sqrt_a, 100.0 * rel);
        detail += buf;
    }
    // Zero slope predicts zero dephasing exactly (zero-intercept model).
    std::vector<DephasingPoint> with_sweet_spot = {{0.0, 0.0}, {1e6, 22.65}, {2e6, 45.3}};
    const FluxNoiseFit fit = fit_flux_noise(with_sweet_spot);
    const double predicted_at_zero = fit.slope * 0.0;
    if (predicted_at_zero != 0.0) pass = false;
    return {pass, "flux-noise amplitude recovery within 2% (" + detail +
                      "); zero slope predicts exactly zero"};
}

}  // namespace

int main() {
    run(1, criterion_1);
    run(2, criterion_2);
    run(3, criterion_3);
    run(4, criterion_4);
    run(5, criterion_5);
    run(6, criterion_6);
    run(7, criterion_7);
    run(8, criterion_8);
    run(9, criterion_9);
    run(10, criterion_10);
    if (g_failures > 0) {
        std::printf("%d of 10 criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
