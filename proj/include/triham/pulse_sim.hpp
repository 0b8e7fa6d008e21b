#ifndef TRIHAM_PULSE_SIM_HPP
#define TRIHAM_PULSE_SIM_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "triham/spin_model.hpp"

namespace triham {

/// Per-qubit decay times plus the background decay constant used for
/// spectator qubits in the closed-form Ramsey signal. All in ns.
struct DecoherenceConfig {
    std::array<double, 3> t1_ns{};
    std::array<double, 3> t2_ns{};
    double background_decay_ns = 0.0;

    /// Throws InvalidArgument unless all times are positive and
    /// T2 <= 2 T1 per qubit.
    void validate() const;

    /// Coupled-operating-point preset (T1/T2 per qubit: 467/142, 338/95,
    /// 289/146 ns; background 365 ns).
    static DecoherenceConfig device_preset();
    /// No decay (all constants infinite).
    static DecoherenceConfig ideal();
};

/// Amplitudes and offsets of the synthetic Ramsey signal
///   s(t) = offset + bg_amplitude exp(-t/T_bg)
///          + amplitude exp(-t/T2) cos(2 pi df t + phase).
struct RamseySignalShape {
    double offset = 0.25;
    double bg_amplitude = 0.30;
    double amplitude = 0.40;
    double phase_rad = 0.0;
};

struct RamseyMetadata {
    std::string transition_label;  // empty when unknown
    double drive_frequency_mhz = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    double t2_ns = std::numeric_limits<double>::infinity();
    double background_decay_ns = std::numeric_limits<double>::infinity();
};

struct RamseyTrace {
    std::vector<double> delays_ns;  // strictly increasing
    std::vector<double> signal;     // dimensionless readout values
    RamseyMetadata metadata;
};

/// Synthesizes a Ramsey trace for transition `t` driven at
/// `drive_frequency_mhz`. The fringe oscillates at the detuning
/// df = f_true - f_drive; decay constants come from the flipped qubit's T2
/// and the config background. Throws NyquistViolation when |df| is at or
/// above the Nyquist limit of the delay grid. Deterministic per seed: point
/// i draws its noise from a stream derived as derive_seed(seed, i).
RamseyTrace simulate_ramsey_trace(const HamiltonianParams& truth, const TransitionId& t,
                                  double drive_frequency_mhz,
                                  const DecoherenceConfig& decoherence, double noise_sigma,
                                  std::uint64_t seed, const std::vector<double>& delays_ns,
                                  const RamseySignalShape& shape = {});

struct RabiMetadata {
    double drive_amplitude = 0.0;
    int photon_order = 1;
    double rabi_frequency_mhz = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct RabiTrace {
    std::vector<double> durations_ns;
    std::vector<double> signal;
    RabiMetadata metadata;
};

struct RabiConfig {
    double rate_scale_mhz = 5.0;  // Rabi frequency at unit amplitude, order 1
    double decay_ns = 600.0;      // envelope time constant at unit amplitude
    double offset = 0.5;
    double contrast = 0.8;
};

/// Rabi oscillation with frequency f = rate_scale * amplitude^n for an
/// n-photon transition (n in {1, 2}):
///   s(tau) = offset - contrast/2 cos(2 pi f tau) exp(-tau r) + noise,
/// with a drive-induced envelope rate r = (f / rate_scale) / decay so that
/// zero drive gives a flat trace.
RabiTrace simulate_rabi(double drive_amplitude, int photon_order,
                        const std::vector<double>& durations_ns, double noise_sigma,
                        std::uint64_t seed, const RabiConfig& config = {});

/// One rectangular drive pulse addressing a single-photon transition. The
/// drive only couples the two states of the addressed transition
/// (rotating-wave two-level reduction); the resonant Rabi rate is
/// angle_rad / duration_ns.
struct Pulse {
    TransitionId transition;
    double drive_frequency_mhz = 0.0;
    double phase_rad = 0.0;
    double angle_rad = 0.0;
    double duration_ns = 0.0;
};

/// Pulse train with at most one variable-delay placeholder. The delay is
/// inserted before pulses[delay_position] (== pulses.size() puts it at the
/// end). Readout measures the population of readout_state.
struct PulseSequence {
    std::vector<Pulse> pulses;
    std::optional<std::size_t> delay_position;
    BasisState readout_state{0};

    void validate() const;  // throws InvalidSequence
};

/// Convenience builder for the Ramsey protocol on transition `target`:
/// resonant pi pulses walk the system from |000> to the lower state of the
/// target (flipping set bits in qubit order), then pi/2 - delay - pi/2 at
/// `drive_frequency_mhz`; readout on the target's upper state.
PulseSequence ramsey_sequence(const HamiltonianParams& truth, const TransitionId& target,
                              double drive_frequency_mhz, double pulse_duration_ns = 10.0);

/// Evolves |000> through the sequence for each delay value by exact
/// two-level block exponentials (free phase accumulation during delays) and
/// returns the readout-state population per delay. Optionally collects
/// warnings about pulses whose Rabi rate is not small against the spacing
/// to neighboring transitions.
std::vector<double> simulate_sequence_population(const HamiltonianParams& truth,
                                                 const PulseSequence& sequence,
                                                 const std::vector<double>& delays_ns,
                                                 std::vector<std::string>* warnings = nullptr);

}  // namespace triham

#endif
