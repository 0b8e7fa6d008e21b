#include "triham/pulse_sim.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "triham/rng.hpp"

namespace triham {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// MHz * ns -> radians.
inline double phase_rad(double f_mhz, double t_ns) { return kTwoPi * f_mhz * t_ns * 1e-3; }

void check_delays(const std::vector<double>& delays_ns) {
    if (delays_ns.empty()) {
        throw Error(ErrorKind::InvalidArgument, "delay grid is empty");
    }
    for (std::size_t i = 1; i < delays_ns.size(); ++i) {
        if (!(delays_ns[i] > delays_ns[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "delays must be strictly increasing");
        }
    }
}

double min_step(const std::vector<double>& grid) {
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < grid.size(); ++i) step = std::min(step, grid[i] - grid[i - 1]);
    return step;
}

}  // namespace

void DecoherenceConfig::validate() const {
    for (int q = 0; q < 3; ++q) {
        const double t1 = t1_ns[static_cast<std::size_t>(q)];
        const double t2 = t2_ns[static_cast<std::size_t>(q)];
        if (!(t1 > 0.0) || !(t2 > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "decay times must be positive");
        }
        if (t2 > 2.0 * t1) {
            throw Error(ErrorKind::InvalidArgument,
                        "T2 must not exceed 2*T1 (qubit " + std::to_string(q + 1) + ")");
        }
    }
    if (!(background_decay_ns > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "background decay must be positive");
    }
}

DecoherenceConfig DecoherenceConfig::device_preset() {
    DecoherenceConfig c;
    c.t1_ns = {467.0, 338.0, 289.0};
    c.t2_ns = {142.0, 95.0, 146.0};
    c.background_decay_ns = 365.0;
    return c;
}

DecoherenceConfig DecoherenceConfig::ideal() {
    const double inf = std::numeric_limits<double>::infinity();
    DecoherenceConfig c;
    c.t1_ns = {inf, inf, inf};
    c.t2_ns = {inf, inf, inf};
    c.background_decay_ns = inf;
    return c;
}

RamseyTrace simulate_ramsey_trace(const HamiltonianParams& truth, const TransitionId& t,
                                  double drive_frequency_mhz,
                                  const DecoherenceConfig& decoherence, double noise_sigma,
                                  std::uint64_t seed, const std::vector<double>& delays_ns,
                                  const RamseySignalShape& shape) {
    check_delays(delays_ns);
    decoherence.validate();
    const double detuning = transition_frequency(truth, t) - drive_frequency_mhz;
    const double nyquist_mhz = 1e3 / (2.0 * min_step(delays_ns));
    if (std::abs(detuning) >= nyquist_mhz) {
        std::ostringstream os;
        os << "detuning " << detuning << " MHz is at or above the Nyquist limit "
           << nyquist_mhz << " MHz of the delay grid";
        throw Error(ErrorKind::NyquistViolation, os.str());
    }

    const double t2 = decoherence.t2_ns[static_cast<std::size_t>(t.flipped_qubit() - 1)];
    const double t_bg = decoherence.background_decay_ns;

    RamseyTrace trace;
    trace.delays_ns = delays_ns;
    trace.signal.resize(delays_ns.size());
    for (std::size_t i = 0; i < delays_ns.size(); ++i) {
        const double d = delays_ns[i];
        double s = shape.offset + shape.bg_amplitude * std::exp(-d / t_bg) +
                   shape.amplitude * std::exp(-d / t2) *
                       std::cos(phase_rad(detuning, d) + shape.phase_rad);
        if (noise_sigma > 0.0) {
            SplitMix64 rng(derive_seed(seed, i));
            s += noise_sigma * rng.next_gaussian();
        }
        trace.signal[i] = s;
    }
    trace.metadata.transition_label = t.label();
    trace.metadata.drive_frequency_mhz = drive_frequency_mhz;
    trace.metadata.noise_sigma = noise_sigma;
    trace.metadata.seed = seed;
    trace.metadata.t2_ns = t2;
    trace.metadata.background_decay_ns = t_bg;
    return trace;
}

RabiTrace simulate_rabi(double drive_amplitude, int photon_order,
                        const std::vector<double>& durations_ns, double noise_sigma,
                        std::uint64_t seed, const RabiConfig& config) {
    if (photon_order != 1 && photon_order != 2) {
        throw Error(ErrorKind::InvalidArgument, "photon order must be 1 or 2");
    }
    check_delays(durations_ns);
    const double rabi_mhz =
        config.rate_scale_mhz * std::pow(drive_amplitude, photon_order);

    RabiTrace trace;
    trace.durations_ns = durations_ns;
    trace.signal.resize(durations_ns.size());
    // Envelope decay is drive-induced: the rate scales with the Rabi
    // frequency, so an undriven qubit stays put and the trace is flat.
    const double decay_rate = rabi_mhz / (config.rate_scale_mhz * config.decay_ns);
    for (std::size_t i = 0; i < durations_ns.size(); ++i) {
        const double tau = durations_ns[i];
        double s = config.offset - 0.5 * config.contrast * std::cos(phase_rad(rabi_mhz, tau)) *
                                       std::exp(-tau * decay_rate);
        if (noise_sigma > 0.0) {
            SplitMix64 rng(derive_seed(seed, i));
            s += noise_sigma * rng.next_gaussian();
        }
        trace.signal[i] = s;
    }
    trace.metadata = {drive_amplitude, photon_order, rabi_mhz, noise_sigma, seed};
    return trace;
}

void PulseSequence::validate() const {
    if (delay_position && *delay_position > pulses.size()) {
        throw Error(ErrorKind::InvalidSequence, "delay placeholder position out of range");
    }
    for (const auto& p : pulses) {
        if (!(p.duration_ns > 0.0)) {
            throw Error(ErrorKind::InvalidSequence, "pulse durations must be positive");
        }
    }
}

PulseSequence ramsey_sequence(const HamiltonianParams& truth, const TransitionId& target,
                              double drive_frequency_mhz, double pulse_duration_ns) {
    constexpr double kPi = 3.14159265358979323846;
    PulseSequence seq;
    // Preparation: resonant pi pulses from |000> to the target's lower state,
    // flipping set bits in qubit order.
    BasisState current(0);
    for (int q = 1; q <= kNumQubits; ++q) {
        if (target.lower().bit(q) == 1) {
            TransitionId step(current, q);
            seq.pulses.push_back(Pulse{step, transition_frequency(truth, step), 0.0, kPi,
                                       pulse_duration_ns});
            current = step.upper();
        }
    }
    seq.pulses.push_back(
        Pulse{target, drive_frequency_mhz, 0.0, kPi / 2.0, pulse_duration_ns});
    seq.delay_position = seq.pulses.size();
    seq.pulses.push_back(
        Pulse{target, drive_frequency_mhz, 0.0, kPi / 2.0, pulse_duration_ns});
    seq.readout_state = target.upper();
    return seq;
}

namespace {

using Cx = std::complex<double>;

struct StepContext {
    std::array<double, kNumBasisStates> omega_rad_ns;  // 2 pi E / 1000 per state
};

void apply_free_evolution(std::array<Cx, kNumBasisStates>& psi, const StepContext& ctx,
                          double duration_ns) {
    for (int s = 0; s < kNumBasisStates; ++s) {
        psi[static_cast<std::size_t>(s)] *=
            std::polar(1.0, -ctx.omega_rad_ns[static_cast<std::size_t>(s)] * duration_ns);
    }
}

// Exact propagator for one rectangular RWA pulse on the addressed two-level
// block; all other states accumulate free phase.
void apply_pulse(std::array<Cx, kNumBasisStates>& psi, const StepContext& ctx,
                 const Pulse& p, double start_time_ns) {
    const unsigned l = p.transition.lower().index();
    const unsigned u = p.transition.upper().index();
    const double tau = p.duration_ns;
    const double omega_l = ctx.omega_rad_ns[l];
    const double omega_u = ctx.omega_rad_ns[u];
    const double omega_d = kTwoPi * p.drive_frequency_mhz * 1e-3;  // rad/ns
    const double rabi = p.angle_rad / tau;                          // rad/ns
    const double delta = (omega_u - omega_l) - omega_d;

    // Rotating frame a~ = e^{i w_l t} a, b~ = e^{i (w_l + w_d) t} b gives the
    // constant block Hamiltonian [[0, r/2 e^{i phi}], [r/2 e^{-i phi}, delta]].
    const Cx a_in = std::polar(1.0, omega_l * start_time_ns) * psi[l];
    const Cx b_in = std::polar(1.0, (omega_l + omega_d) * start_time_ns) * psi[u];

    const double w = std::sqrt(delta * delta + rabi * rabi);  // generalized Rabi
    const double half_angle = 0.5 * w * tau;
    const double c = std::cos(half_angle);
    // sin(x)/x stays finite as w -> 0.
    const double sinc = w * tau < 1e-12 ? tau * 0.5 : std::sin(half_angle) / w;
    const Cx phase_mid = std::polar(1.0, -0.5 * delta * tau);
    const Cx off_lu = std::polar(1.0, p.phase_rad) * Cx(0.0, -rabi * sinc);
    const Cx off_ul = std::polar(1.0, -p.phase_rad) * Cx(0.0, -rabi * sinc);

    const Cx a_out = phase_mid * ((c + Cx(0.0, delta * sinc)) * a_in + off_lu * b_in);
    const Cx b_out = phase_mid * (off_ul * a_in + (c - Cx(0.0, delta * sinc)) * b_in);

    const double end_time = start_time_ns + tau;
    for (int s = 0; s < kNumBasisStates; ++s) {
        const auto us = static_cast<unsigned>(s);
        if (us == l || us == u) continue;
        psi[us] *= std::polar(1.0, -ctx.omega_rad_ns[us] * tau);
    }
    psi[l] = std::polar(1.0, -omega_l * end_time) * a_out;
    psi[u] = std::polar(1.0, -(omega_l + omega_d) * end_time) * b_out;
}

}  // namespace

std::vector<double> simulate_sequence_population(const HamiltonianParams& truth,
                                                 const PulseSequence& sequence,
                                                 const std::vector<double>& delays_ns,
                                                 std::vector<std::string>* warnings) {
    sequence.validate();
    if (delays_ns.empty()) {
        throw Error(ErrorKind::InvalidArgument, "delay grid is empty");
    }

    StepContext ctx;
    for (int s = 0; s < kNumBasisStates; ++s) {
        ctx.omega_rad_ns[static_cast<std::size_t>(s)] =
            kTwoPi * energy(truth, BasisState(static_cast<unsigned>(s))) * 1e-3;
    }

    if (warnings != nullptr) {
        for (std::size_t i = 0; i < sequence.pulses.size(); ++i) {
            const Pulse& p = sequence.pulses[i];
            const double rabi_mhz = p.angle_rad / p.duration_ns * 1e3 / kTwoPi;
            double spacing = std::numeric_limits<double>::infinity();
            for (const auto& other : enumerate_transitions()) {
                if (other == p.transition) continue;
                spacing = std::min(spacing, std::abs(transition_frequency(truth, other) -
                                                     p.drive_frequency_mhz));
            }
            if (rabi_mhz * 10.0 > spacing) {
                std::ostringstream os;
                os << "pulse " << i << " (" << p.transition.label() << "): Rabi rate "
                   << rabi_mhz << " MHz is not small against the " << spacing
                   << " MHz spacing to the nearest other transition";
                warnings->push_back(os.str());
            }
        }
    }

    std::vector<double> populations;
    populations.reserve(delays_ns.size());
    const std::size_t delay_pos =
        sequence.delay_position.value_or(sequence.pulses.size() + 1);
    for (const double delay : delays_ns) {
        std::array<Cx, kNumBasisStates> psi{};
        psi[0] = Cx(1.0, 0.0);
        double t_now = 0.0;
        for (std::size_t i = 0; i <= sequence.pulses.size(); ++i) {
            if (i == delay_pos && delay > 0.0) {
                apply_free_evolution(psi, ctx, delay);
                t_now += delay;
            }
            if (i == sequence.pulses.size()) break;
            apply_pulse(psi, ctx, sequence.pulses[i], t_now);
            t_now += sequence.pulses[i].duration_ns;
        }
        populations.push_back(std::norm(psi[sequence.readout_state.index()]));
    }
    return populations;
}

}  // namespace triham
