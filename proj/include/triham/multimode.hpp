#ifndef TRIHAM_MULTIMODE_HPP
#define TRIHAM_MULTIMODE_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "triham/estimator.hpp"
#include "triham/spin_model.hpp"

namespace triham {

/// One circuit mode: a bare Hermitian Hamiltonian (MHz) plus named Hermitian
/// coupling operators, all in the same basis.
struct SubsystemSpec {
    std::string name;
    Eigen::MatrixXcd h0;
    std::map<std::string, Eigen::MatrixXcd> ops;

    int dimension() const { return static_cast<int>(h0.rows()); }
    void validate() const;  // dimension >= 2, Hermiticity to 1e-10
};

/// Two-level flux qubit in the persistent-current basis:
/// H = epsilon z + delta x, operators "z" and "x". The eigengap is
/// 2 sqrt(epsilon^2 + delta^2); the flux-insensitive point is epsilon = 0.
SubsystemSpec build_flux_qubit(double epsilon_mhz, double delta_mhz);

/// Qubit mode in its eigenbasis with `levels` retained states (2 or 3):
/// energies (0, gap, 2 gap + anharmonicity). Operators: "current" (the
/// persistent-current operator at the sweet spot: fully off-diagonal, with
/// declared higher-level matrix elements) and "z" (computational-basis
/// diag(+1, -1, -1)).
SubsystemSpec build_qubit_mode(double gap_mhz, double anharmonicity_mhz = 3000.0,
                               int levels = 3, double current_12 = 1.3,
                               double current_02 = 0.12);

/// Two-level coupler with a flux-parameterized gap. Its "current" operator
/// x + asymmetry*z carries both off-diagonal and diagonal weight; the
/// diagonal part is what lets the coupler excited state mediate odd-order
/// (3-local) interactions.
SubsystemSpec build_coupler(double gap_mhz, double asymmetry = 0.4);

/// Product term coupling distinct subsystems: strength * op_1 * op_2 * ...
struct CouplingTerm {
    double strength_mhz = 0.0;
    std::vector<std::pair<std::size_t, std::string>> factors;
};

struct CompositeSystem {
    std::vector<SubsystemSpec> subsystems;
    std::vector<CouplingTerm> couplings;

    long total_dimension() const;
    void validate() const;  // operator names resolve, factors distinct
};

struct Spectrum {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd eigenvectors; // columns, raw product basis
};

/// Dense eigendecomposition of the full composite Hamiltonian in the raw
/// product basis. Reference oracle for the hierarchical method; throws
/// DimensionCap above the cap.
Spectrum exact_diagonalize(const CompositeSystem& system, long dimension_cap = 4096);

struct HierarchicalResult {
    Eigen::VectorXd eigenvalues;              // ascending
    Eigen::MatrixXcd eigenvectors;            // in the truncated product eigenbasis
    std::vector<int> keep;
    std::vector<Eigen::VectorXd> subsystem_energies;  // kept levels
    std::vector<Eigen::MatrixXcd> subsystem_bases;    // d_i x keep_i maps to raw basis
};

/// Hierarchical diagonalization: each subsystem is diagonalized first and
/// truncated to its lowest keep_i eigenstates, coupling operators are
/// rotated into the truncated eigenbases, then the coupled composite is
/// diagonalized in the truncated product space. keep_i = d_i reproduces
/// exact_diagonalize; keep_i < 2 throws TruncationError.
HierarchicalResult hierarchical_diagonalize(const CompositeSystem& system,
                                            std::vector<int> keep);

/// Assignment of the 8 computational labels (qubit-product states with every
/// other subsystem in its ground state) to composite eigenstates by maximal
/// squared overlap; greedy in descending overlap, conflicts resolved by the
/// next-best unassigned state.
struct StateAssignment {
    std::array<int, kNumBasisStates> eigenstate_index{};
    std::array<double, kNumBasisStates> overlap{};
    double min_overlap = 0.0;
};

/// Throws AmbiguousStates when the minimum overlap falls below the
/// threshold, signaling breakdown of the qubit picture.
StateAssignment identify_computational_states(const HierarchicalResult& result,
                                              const std::array<std::size_t, 3>& qubit_subsystems,
                                              double overlap_threshold = 0.5);

struct EffectiveExtraction {
    StateAssignment assignment;
    std::array<double, kNumBasisStates> energies_mhz{};  // per computational label
    std::vector<FrequencyMeasurement> transitions;       // all 12, sigma = 1
    EstimationResult estimation;                         // least-squares over the 12
};

/// Identifies the computational states, forms the 12 transition frequencies,
/// and inverts them to effective (omega, J, K) parameters. The residuals
/// quantify how well the diagonal 7-parameter model closes on the 12
/// differences.
EffectiveExtraction extract_effective_params(const HierarchicalResult& result,
                                             const std::array<std::size_t, 3>& qubit_subsystems,
                                             double overlap_threshold = 0.5);

/// Default multimode template: three qubit modes and one coupler. The
/// qubit-coupler coupling has a z-type channel (z_i * current_c, the
/// mechanism that turns the coupler's excited-state repulsion into 2- and
/// 3-local terms) and an exchange channel (current_i * current_c), plus
/// direct qubit-qubit zz and current-current (xx-like) terms. All strengths
/// are declared free parameters of the template, not device values.
struct CouplerTemplateConfig {
    std::array<double, 3> qubit_gap_mhz{5415.4, 4888.2, 2879.4};
    double anharmonicity_mhz = 3000.0;
    int qubit_levels = 3;
    double coupler_asymmetry = 0.4;
    std::array<double, 3> qubit_coupler_z_mhz{160.0, 150.0, 140.0};
    std::array<double, 3> qubit_coupler_exchange_mhz{150.0, 140.0, 130.0};
    std::array<double, 3> qubit_qubit_zz_mhz{-6.0, 6.0, 40.0};   // pairs 12, 13, 23
    std::array<double, 3> qubit_qubit_xx_mhz{30.0, 30.0, 30.0};  // pairs 12, 13, 23
};

/// Subsystem order: QB1, QB2, QB3, coupler.
CompositeSystem build_coupler_template(const CouplerTemplateConfig& config,
                                       double coupler_gap_mhz);

struct GapSweepRow {
    double gap_mhz = 0.0;
    HamiltonianParams params;
    double min_overlap = 0.0;
    bool flagged = false;  // identification fell below the overlap threshold
};

/// Extraction across coupler gaps (sorted descending from far-detuned toward
/// the coupled regime). Ambiguous rows are flagged, not dropped.
std::vector<GapSweepRow> coupler_gap_sweep(const CouplerTemplateConfig& config,
                                           const std::vector<double>& gaps_mhz,
                                           double overlap_threshold = 0.5);

}  // namespace triham

#endif
