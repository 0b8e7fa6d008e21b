#include "triham/spin_model.hpp"

#include <algorithm>

namespace triham {

std::string BasisState::label() const {
    std::string s(3, '0');
    for (int q = 1; q <= kNumQubits; ++q) {
        s[static_cast<std::size_t>(q - 1)] = static_cast<char>('0' + bit(q));
    }
    return s;
}

BasisState BasisState::parse(std::string_view label) {
    if (label.size() != 3) {
        throw Error(ErrorKind::Schema,
                    "basis state label must have 3 bits, got '" + std::string(label) + "'");
    }
    unsigned idx = 0;
    for (char c : label) {
        if (c != '0' && c != '1') {
            throw Error(ErrorKind::Schema,
                        "basis state label must be binary, got '" + std::string(label) + "'");
        }
        idx = (idx << 1) | static_cast<unsigned>(c - '0');
    }
    return BasisState(idx);
}

std::array<BasisState, kNumBasisStates> BasisState::all() {
    return {BasisState(0), BasisState(1), BasisState(2), BasisState(3),
            BasisState(4), BasisState(5), BasisState(6), BasisState(7)};
}

double HamiltonianParams::j_pair(int a, int b) const {
    if (a > b) std::swap(a, b);
    if (a == 1 && b == 2) return j[0];
    if (a == 1 && b == 3) return j[1];
    if (a == 2 && b == 3) return j[2];
    throw Error(ErrorKind::InvalidArgument, "invalid qubit pair");
}

TransitionId::TransitionId(BasisState lower, int flipped_qubit)
    : lower_(lower), flipped_(flipped_qubit) {
    if (flipped_qubit < 1 || flipped_qubit > kNumQubits) {
        throw Error(ErrorKind::InvalidArgument, "flipped qubit index out of range");
    }
    if (lower.bit(flipped_qubit) != 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "lower state must have bit 0 at the flipped qubit");
    }
}

TransitionId TransitionId::between(BasisState a, BasisState b) {
    unsigned diff = a.index() ^ b.index();
    if (diff == 0 || (diff & (diff - 1)) != 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "states " + a.label() + " and " + b.label() +
                        " do not differ in exactly one bit");
    }
    int qubit = diff == 4 ? 1 : (diff == 2 ? 2 : 3);
    BasisState lower = a.bit(qubit) == 0 ? a : b;
    return TransitionId(lower, qubit);
}

std::string TransitionId::label() const {
    return lower().label() + "-" + upper().label();
}

TransitionId TransitionId::parse(std::string_view label) {
    auto dash = label.find('-');
    if (dash == std::string_view::npos) {
        throw Error(ErrorKind::Schema,
                    "transition label must be 'lll-uuu', got '" + std::string(label) + "'");
    }
    BasisState a = BasisState::parse(label.substr(0, dash));
    BasisState b = BasisState::parse(label.substr(dash + 1));
    TransitionId t = between(a, b);
    if (t.lower() != a) {
        throw Error(ErrorKind::Schema,
                    "transition '" + std::string(label) + "' lists the upper state first");
    }
    return t;
}

double energy(const HamiltonianParams& params, BasisState state) {
    const double s1 = state.spin(1);
    const double s2 = state.spin(2);
    const double s3 = state.spin(3);
    return -0.5 * (params.omega[0] * s1 + params.omega[1] * s2 + params.omega[2] * s3) +
           params.j[0] * s1 * s2 + params.j[1] * s1 * s3 + params.j[2] * s2 * s3 +
           params.k123 * s1 * s2 * s3;
}

double transition_frequency(const HamiltonianParams& params, const TransitionId& t) {
    const int k = t.flipped_qubit();
    const BasisState lo = t.lower();
    double f = params.omega[static_cast<std::size_t>(k - 1)];
    double spin_product = 1.0;
    for (int q = 1; q <= kNumQubits; ++q) {
        if (q == k) continue;
        f -= 2.0 * params.j_pair(k, q) * lo.spin(q);
        spin_product *= lo.spin(q);
    }
    f -= 2.0 * params.k123 * spin_product;
    return f;
}

const std::vector<TransitionId>& enumerate_transitions() {
    static const std::vector<TransitionId> transitions = [] {
        std::vector<TransitionId> out;
        out.reserve(kNumTransitions);
        for (BasisState s : BasisState::all()) {
            for (int q = 1; q <= kNumQubits; ++q) {
                if (s.bit(q) == 0) out.emplace_back(s, q);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }();
    return transitions;
}

}  // namespace triham
