#include "triham/spin_model.hpp"

#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"

using namespace triham;
using namespace triham::testing;

TEST_CASE("basis states: labels, bits, spins") {
    CHECK(BasisState(4).label() == "100");
    CHECK(BasisState(1).label() == "001");
    CHECK(BasisState(4).bit(1) == 1);
    CHECK(BasisState(4).bit(3) == 0);
    CHECK(BasisState(4).spin(1) == -1);
    CHECK(BasisState(0).spin(2) == 1);

    int count = 0;
    for (BasisState s : BasisState::all()) {
        CHECK(BasisState::parse(s.label()) == s);
        ++count;
    }
    CHECK(count == 8);
    CHECK_THROWS_AS(BasisState::parse("10"), Error);
    CHECK_THROWS_AS(BasisState::parse("102"), Error);
}

TEST_CASE("transitions: construction and labels") {
    TransitionId t(BasisState::parse("000"), 1);
    CHECK(t.upper() == BasisState::parse("100"));
    CHECK(t.label() == "000-100");
    CHECK(TransitionId::parse("110-111").flipped_qubit() == 3);
    CHECK(TransitionId::between(BasisState::parse("101"), BasisState::parse("001")).label() ==
          "001-101");
    CHECK_THROWS_AS(TransitionId::between(BasisState::parse("000"), BasisState::parse("011")),
                    Error);
    CHECK_THROWS_AS(TransitionId::parse("100-000"), Error);
    CHECK_THROWS_AS(TransitionId(BasisState::parse("100"), 1), Error);
}

TEST_CASE("energy: zero Hamiltonian and single free spin") {
    HamiltonianParams zero;
    for (BasisState s : BasisState::all()) CHECK(energy(zero, s) == 0.0);

    HamiltonianParams p;
    p.omega = {2000.0, 0.0, 0.0};
    CHECK(energy(p, BasisState::parse("000")) == doctest::Approx(-1000.0));
    CHECK(energy(p, BasisState::parse("100")) == doctest::Approx(1000.0));
}

TEST_CASE("energy: published full-precision parameter set") {
    // Frozen from a hand evaluation of the diagonal Hamiltonian.
    CHECK(energy(table_params(), BasisState::parse("000")) ==
          doctest::Approx(-6452.22125).epsilon(1e-12));
}

TEST_CASE("energy matches the Kronecker-product oracle") {
    SplitMix64 rng(0x5eed0001);
    for (int rep = 0; rep < 200; ++rep) {
        const HamiltonianParams p = random_params(rng);
        const Eigen::VectorXd diag = kron_energy_oracle(p);
        for (BasisState s : BasisState::all()) {
            CHECK(energy(p, s) ==
                  doctest::Approx(diag(static_cast<int>(s.index()))).epsilon(1e-12));
        }
    }
}

TEST_CASE("transition frequencies of the published parameter set") {
    const HamiltonianParams p = table_params();
    CHECK(transition_frequency(p, TransitionId::parse("000-001")) ==
          doctest::Approx(2587.74).epsilon(1e-12));
    CHECK(transition_frequency(p, TransitionId::parse("001-011")) ==
          doctest::Approx(5180.69).epsilon(1e-12));
    // A transition outside the published seven-set, frozen from a direct
    // energy-difference evaluation.
    CHECK(transition_frequency(p, TransitionId::parse("010-011")) ==
          doctest::Approx(3146.49).epsilon(1e-12));
}

TEST_CASE("transition frequency equals energy difference") {
    SplitMix64 rng(0x5eed0002);
    for (int rep = 0; rep < 500; ++rep) {
        const HamiltonianParams p = random_params(rng);
        for (const auto& t : enumerate_transitions()) {
            const double diff = energy(p, t.upper()) - energy(p, t.lower());
            const double f = transition_frequency(p, t);
            CHECK(std::abs(f - diff) <= 1e-12 * std::max(1.0, std::abs(diff)));
        }
    }
}

TEST_CASE("all-zero params give zero frequency for every transition") {
    HamiltonianParams zero;
    for (const auto& t : enumerate_transitions()) {
        CHECK(transition_frequency(zero, t) == 0.0);
    }
}

TEST_CASE("enumeration: canonical order, 12 entries") {
    const auto& ts = enumerate_transitions();
    REQUIRE(ts.size() == 12);
    // Sorted by lower label, then flipped qubit.
    for (std::size_t i = 1; i < ts.size(); ++i) {
        CHECK(ts[i - 1] < ts[i]);
    }
    bool has_000_100 = false;
    bool has_110_111 = false;
    for (const auto& t : ts) {
        if (t.label() == "000-100") {
            has_000_100 = true;
            CHECK(t.flipped_qubit() == 1);
        }
        if (t.label() == "110-111") {
            has_110_111 = true;
            CHECK(t.flipped_qubit() == 3);
        }
    }
    CHECK(has_000_100);
    CHECK(has_110_111);
}

TEST_CASE("sum rule: path independence around every face of the 3-cube") {
    SplitMix64 rng(0x5eed0003);
    for (int rep = 0; rep < 1000; ++rep) {
        const HamiltonianParams p = random_params(rng);
        // A face is fixed by the spectator qubit and its bit value.
        for (int spectator = 1; spectator <= 3; ++spectator) {
            int a = 0, b = 0;
            for (int q = 1; q <= 3; ++q) {
                if (q == spectator) continue;
                (a == 0 ? a : b) = q;
            }
            for (int spectator_bit = 0; spectator_bit <= 1; ++spectator_bit) {
                unsigned base = spectator_bit == 1 ? (1u << (3 - spectator)) : 0u;
                const BasisState s00(base);
                const TransitionId up_b_first(s00, b);
                const TransitionId then_a(up_b_first.upper(), a);
                const TransitionId up_a_first(s00, a);
                const TransitionId then_b(up_a_first.upper(), b);
                const double path1 =
                    transition_frequency(p, up_b_first) + transition_frequency(p, then_a);
                const double path2 =
                    transition_frequency(p, up_a_first) + transition_frequency(p, then_b);
                CHECK(std::abs(path1 - path2) <= 1e-9 * std::max(1.0, std::abs(path1)));
            }
        }
    }
}

TEST_CASE("omega sign flip negates only the omega contribution") {
    SplitMix64 rng(0x5eed0004);
    for (int rep = 0; rep < 100; ++rep) {
        const HamiltonianParams p = random_params(rng);
        HamiltonianParams flipped = p;
        for (auto& w : flipped.omega) w = -w;
        HamiltonianParams couplings_only = p;
        couplings_only.omega = {0.0, 0.0, 0.0};
        for (const auto& t : enumerate_transitions()) {
            const double f = transition_frequency(p, t);
            const double f_flipped = transition_frequency(flipped, t);
            const double f_couplings = transition_frequency(couplings_only, t);
            // f = omega_part + coupling_part; flipping omega negates only
            // the first term.
            CHECK(f_flipped ==
                  doctest::Approx(2.0 * f_couplings - f).epsilon(1e-9));
        }
    }
}
