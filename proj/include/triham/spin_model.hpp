#ifndef TRIHAM_SPIN_MODEL_HPP
#define TRIHAM_SPIN_MODEL_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "triham/errors.hpp"

namespace triham {

inline constexpr int kNumQubits = 3;
inline constexpr int kNumBasisStates = 8;
inline constexpr int kNumTransitions = 12;
inline constexpr int kNumParams = 7;  // omega1..3, J12, J13, J23, K123

/// One of the 8 computational basis states of the 3-qubit system.
///
/// Bits are ordered (q1, q2, q3) with q1 rendered leftmost, so index 4 is
/// "100" (qubit 1 excited). Spin convention: s_i = +1 for bit 0 (ground),
/// s_i = -1 for bit 1 (excited).
class BasisState {
public:
    constexpr explicit BasisState(unsigned index) : index_(index & 0x7u) {}

    constexpr unsigned index() const { return index_; }

    /// Bit of qubit q (1..3): 0 ground, 1 excited.
    constexpr int bit(int qubit) const {
        return static_cast<int>((index_ >> (kNumQubits - qubit)) & 1u);
    }

    /// Spin value of qubit q: +1 for bit 0, -1 for bit 1.
    constexpr int spin(int qubit) const { return 1 - 2 * bit(qubit); }

    /// Returns the state with qubit q's bit flipped.
    constexpr BasisState flipped(int qubit) const {
        return BasisState(index_ ^ (1u << (kNumQubits - qubit)));
    }

    std::string label() const;
    static BasisState parse(std::string_view label);

    static std::array<BasisState, kNumBasisStates> all();

    friend constexpr bool operator==(BasisState a, BasisState b) {
        return a.index_ == b.index_;
    }
    friend constexpr auto operator<=>(BasisState a, BasisState b) {
        return a.index_ <=> b.index_;
    }

private:
    unsigned index_;
};

/// The 7 parameters of the diagonal 3-qubit Hamiltonian
///   E(s) = -1/2 sum_i omega_i s_i + sum_{i<j} J_ij s_i s_j + K s1 s2 s3.
/// All values in MHz (linear frequency). No sign or magnitude restriction.
struct HamiltonianParams {
    std::array<double, 3> omega{};  // MHz
    std::array<double, 3> j{};      // (J12, J13, J23), MHz
    double k123 = 0.0;              // MHz

    /// Flat view in design-matrix column order (omega1..3, J12, J13, J23, K).
    std::array<double, kNumParams> to_vector() const {
        return {omega[0], omega[1], omega[2], j[0], j[1], j[2], k123};
    }
    static HamiltonianParams from_vector(const std::array<double, kNumParams>& v) {
        HamiltonianParams p;
        p.omega = {v[0], v[1], v[2]};
        p.j = {v[3], v[4], v[5]};
        p.k123 = v[6];
        return p;
    }

    /// J coupling for the qubit pair {a, b}, a != b, 1-based.
    double j_pair(int a, int b) const;
};

/// A single-photon transition: an edge of the 3-cube. `lower` has bit 0 and
/// `upper` bit 1 at the flipped qubit; the other two bits agree.
class TransitionId {
public:
    TransitionId(BasisState lower, int flipped_qubit);

    /// Builds a TransitionId from two states differing in exactly one bit
    /// (in either order). Throws InvalidArgument otherwise.
    static TransitionId between(BasisState a, BasisState b);

    BasisState lower() const { return lower_; }
    BasisState upper() const { return lower_.flipped(flipped_); }
    int flipped_qubit() const { return flipped_; }

    /// "000-100" style label; parse accepts the same format.
    std::string label() const;
    static TransitionId parse(std::string_view label);

    friend bool operator==(const TransitionId& a, const TransitionId& b) {
        return a.lower_ == b.lower_ && a.flipped_ == b.flipped_;
    }
    friend auto operator<=>(const TransitionId& a, const TransitionId& b) {
        if (auto c = a.lower_ <=> b.lower_; c != 0) return c;
        return a.flipped_ <=> b.flipped_;
    }

private:
    BasisState lower_;
    int flipped_;
};

/// Eigenenergy of a basis state in MHz. The Hamiltonian is diagonal, so
/// these are the exact eigenenergies.
double energy(const HamiltonianParams& params, BasisState state);

/// f = E(upper) - E(lower). Closed form when flipping qubit k with lower
/// state spins s: omega_k - 2 sum_{j!=k} J_kj s_j - 2 K s_a s_b, where a, b
/// are the non-flipped qubits. May be negative for pathological parameters;
/// no clamping here.
double transition_frequency(const HamiltonianParams& params, const TransitionId& t);

/// All 12 single-photon transitions in canonical order: sorted by lower
/// state label, then flipped qubit index.
const std::vector<TransitionId>& enumerate_transitions();

}  // namespace triham

#endif
