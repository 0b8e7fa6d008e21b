#include "triham/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace triham {

namespace {

constexpr double kHermitianTolerance = 1e-10;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// Embeds per-subsystem operators (identity where absent) into the product
// space defined by `dims`.
Eigen::MatrixXcd embed(const std::vector<Eigen::MatrixXcd>& factors,
                       const std::vector<Eigen::Index>& dims) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (factors[k].size() == 0) {
            out = kron(out, Eigen::MatrixXcd::Identity(dims[k], dims[k]));
        } else {
            out = kron(out, factors[k]);
        }
    }
    return out;
}

void check_hermitian(const Eigen::MatrixXcd& m, const std::string& what) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::InvalidArgument, what + " must be square");
    }
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTolerance) {
        throw Error(ErrorKind::InvalidArgument,
                    what + " is not Hermitian (max deviation " + std::to_string(dev) + ")");
    }
}

}  // namespace

void SubsystemSpec::validate() const {
    if (dimension() < 2) {
        throw Error(ErrorKind::InvalidArgument, "subsystem dimension must be >= 2");
    }
    check_hermitian(h0, "subsystem '" + name + "' Hamiltonian");
    for (const auto& [op_name, op] : ops) {
        if (op.rows() != h0.rows()) {
            throw Error(ErrorKind::InvalidArgument,
                        "operator '" + op_name + "' dimension mismatch in '" + name + "'");
        }
        check_hermitian(op, "operator '" + op_name + "'");
    }
}

SubsystemSpec build_flux_qubit(double epsilon_mhz, double delta_mhz) {
    SubsystemSpec s;
    s.name = "flux_qubit";
    Eigen::Matrix2cd z, x;
    z << 1, 0, 0, -1;
    x << 0, 1, 1, 0;
    s.h0 = epsilon_mhz * z + delta_mhz * x;
    s.ops["z"] = z;
    s.ops["x"] = x;
    return s;
}

SubsystemSpec build_qubit_mode(double gap_mhz, double anharmonicity_mhz, int levels,
                               double current_12, double current_02) {
    if (levels != 2 && levels != 3) {
        throw Error(ErrorKind::InvalidArgument, "qubit mode supports 2 or 3 levels");
    }
    SubsystemSpec s;
    s.name = "qubit_mode";
    s.h0 = Eigen::MatrixXcd::Zero(levels, levels);
    s.h0(1, 1) = gap_mhz;
    Eigen::MatrixXcd current = Eigen::MatrixXcd::Zero(levels, levels);
    current(0, 1) = current(1, 0) = 1.0;
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(levels, levels);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    if (levels == 3) {
        s.h0(2, 2) = 2.0 * gap_mhz + anharmonicity_mhz;
        current(1, 2) = current(2, 1) = current_12;
        current(0, 2) = current(2, 0) = current_02;
        z(2, 2) = -1.0;
    }
    s.ops["current"] = current;
    s.ops["z"] = z;
    return s;
}

SubsystemSpec build_coupler(double gap_mhz, double asymmetry) {
    SubsystemSpec s;
    s.name = "coupler";
    s.h0 = Eigen::MatrixXcd::Zero(2, 2);
    s.h0(1, 1) = gap_mhz;
    Eigen::Matrix2cd current;
    current << asymmetry, 1.0, 1.0, -asymmetry;
    s.ops["current"] = current;
    return s;
}

long CompositeSystem::total_dimension() const {
    long dim = 1;
    for (const auto& s : subsystems) dim *= s.dimension();
    return dim;
}

void CompositeSystem::validate() const {
    if (subsystems.empty()) {
        throw Error(ErrorKind::InvalidArgument, "composite system has no subsystems");
    }
    for (const auto& s : subsystems) s.validate();
    for (const auto& term : couplings) {
        std::vector<bool> used(subsystems.size(), false);
        if (term.factors.empty()) {
            throw Error(ErrorKind::InvalidArgument, "coupling term has no factors");
        }
        for (const auto& [idx, op] : term.factors) {
            if (idx >= subsystems.size()) {
                throw Error(ErrorKind::InvalidArgument, "coupling factor subsystem out of range");
            }
            if (used[idx]) {
                throw Error(ErrorKind::InvalidArgument,
                            "coupling term uses one subsystem twice");
            }
            used[idx] = true;
            if (subsystems[idx].ops.find(op) == subsystems[idx].ops.end()) {
                throw Error(ErrorKind::InvalidArgument,
                            "unknown operator '" + op + "' on subsystem " + std::to_string(idx));
            }
        }
    }
}

Spectrum exact_diagonalize(const CompositeSystem& system, long dimension_cap) {
    system.validate();
    const long dim = system.total_dimension();
    if (dim > dimension_cap) {
        throw Error(ErrorKind::DimensionCap,
                    "composite dimension " + std::to_string(dim) + " exceeds the cap " +
                        std::to_string(dimension_cap));
    }
    std::vector<Eigen::Index> dims;
    for (const auto& s : system.subsystems) dims.push_back(s.dimension());

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 0; k < system.subsystems.size(); ++k) {
        std::vector<Eigen::MatrixXcd> factors(system.subsystems.size());
        factors[k] = system.subsystems[k].h0;
        h += embed(factors, dims);
    }
    for (const auto& term : system.couplings) {
        std::vector<Eigen::MatrixXcd> factors(system.subsystems.size());
        for (const auto& [idx, op] : term.factors) {
            factors[idx] = system.subsystems[idx].ops.at(op);
        }
        h += term.strength_mhz * embed(factors, dims);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    Spectrum out;
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    return out;
}

HierarchicalResult hierarchical_diagonalize(const CompositeSystem& system,
                                            std::vector<int> keep) {
    system.validate();
    if (keep.size() != system.subsystems.size()) {
        throw Error(ErrorKind::InvalidArgument, "keep list length mismatch");
    }
    HierarchicalResult out;
    out.keep = keep;
    std::vector<Eigen::Index> dims;
    std::vector<std::map<std::string, Eigen::MatrixXcd>> rotated_ops(system.subsystems.size());
    for (std::size_t k = 0; k < system.subsystems.size(); ++k) {
        const SubsystemSpec& s = system.subsystems[k];
        const int d = s.dimension();
        const int kk = keep[k];
        if (kk < 2 || kk > d) {
            throw Error(ErrorKind::TruncationError,
                        "keep must be in [2, " + std::to_string(d) + "] for subsystem " +
                            std::to_string(k));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(s.h0);
        const Eigen::MatrixXcd basis = solver.eigenvectors().leftCols(kk);
        out.subsystem_energies.push_back(solver.eigenvalues().head(kk));
        out.subsystem_bases.push_back(basis);
        for (const auto& [name, op] : s.ops) {
            rotated_ops[k][name] = basis.adjoint() * op * basis;
        }
        dims.push_back(kk);
    }

    long dim = 1;
    for (Eigen::Index d : dims) dim *= d;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 0; k < system.subsystems.size(); ++k) {
        std::vector<Eigen::MatrixXcd> factors(system.subsystems.size());
        factors[k] = out.subsystem_energies[k].cast<std::complex<double>>().asDiagonal();
        h += embed(factors, dims);
    }
    for (const auto& term : system.couplings) {
        std::vector<Eigen::MatrixXcd> factors(system.subsystems.size());
        for (const auto& [idx, op] : term.factors) {
            factors[idx] = rotated_ops[idx].at(op);
        }
        h += term.strength_mhz * embed(factors, dims);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    return out;
}

StateAssignment identify_computational_states(const HierarchicalResult& result,
                                              const std::array<std::size_t, 3>& qubit_subsystems,
                                              double overlap_threshold) {
    const std::size_t n_subsystems = result.keep.size();
    for (std::size_t q : qubit_subsystems) {
        if (q >= n_subsystems) {
            throw Error(ErrorKind::InvalidArgument, "qubit subsystem index out of range");
        }
    }
    const Eigen::Index n_states = result.eigenvalues.size();

    // Flat index of a bare product label in the truncated product basis.
    auto flat_index = [&](BasisState label) {
        Eigen::Index idx = 0;
        for (std::size_t k = 0; k < n_subsystems; ++k) {
            int level = 0;
            for (int q = 0; q < kNumQubits; ++q) {
                if (qubit_subsystems[static_cast<std::size_t>(q)] == k) {
                    level = label.bit(q + 1);
                }
            }
            idx = idx * result.keep[k] + level;
        }
        return idx;
    };

    // Squared overlaps of each label's bare product vector with every
    // eigenstate, then greedy assignment in descending overlap.
    Eigen::MatrixXd overlaps(kNumBasisStates, n_states);
    for (unsigned label = 0; label < kNumBasisStates; ++label) {
        overlaps.row(label) =
            result.eigenvectors.row(flat_index(BasisState(label))).cwiseAbs2();
    }

    StateAssignment assignment;
    assignment.eigenstate_index.fill(-1);
    std::vector<bool> label_done(kNumBasisStates, false);
    std::vector<bool> eigen_used(static_cast<std::size_t>(n_states), false);
    for (int round = 0; round < kNumBasisStates; ++round) {
        int best_label = -1;
        Eigen::Index best_state = -1;
        double best = -1.0;
        for (int label = 0; label < kNumBasisStates; ++label) {
            if (label_done[static_cast<std::size_t>(label)]) continue;
            for (Eigen::Index s = 0; s < n_states; ++s) {
                if (eigen_used[static_cast<std::size_t>(s)]) continue;
                if (overlaps(label, s) > best) {
                    best = overlaps(label, s);
                    best_label = label;
                    best_state = s;
                }
            }
        }
        label_done[static_cast<std::size_t>(best_label)] = true;
        eigen_used[static_cast<std::size_t>(best_state)] = true;
        assignment.eigenstate_index[static_cast<std::size_t>(best_label)] =
            static_cast<int>(best_state);
        assignment.overlap[static_cast<std::size_t>(best_label)] = best;
    }
    assignment.min_overlap =
        *std::min_element(assignment.overlap.begin(), assignment.overlap.end());
    if (assignment.min_overlap < overlap_threshold) {
        throw Error(ErrorKind::AmbiguousStates,
                    "minimum computational-state overlap " +
                        std::to_string(assignment.min_overlap) + " is below the threshold " +
                        std::to_string(overlap_threshold) +
                        "; the qubit picture has broken down");
    }
    return assignment;
}

EffectiveExtraction extract_effective_params(const HierarchicalResult& result,
                                             const std::array<std::size_t, 3>& qubit_subsystems,
                                             double overlap_threshold) {
    EffectiveExtraction out;
    out.assignment =
        identify_computational_states(result, qubit_subsystems, overlap_threshold);
    for (unsigned label = 0; label < kNumBasisStates; ++label) {
        out.energies_mhz[label] =
            result.eigenvalues(out.assignment.eigenstate_index[label]);
    }
    for (const auto& t : enumerate_transitions()) {
        const double f = out.energies_mhz[t.upper().index()] -
                         out.energies_mhz[t.lower().index()];
        out.transitions.emplace_back(t, f, 1.0);
    }
    out.estimation = solve_least_squares(out.transitions);
    return out;
}

CompositeSystem build_coupler_template(const CouplerTemplateConfig& config,
                                       double coupler_gap_mhz) {
    CompositeSystem sys;
    for (int q = 0; q < 3; ++q) {
        SubsystemSpec s = build_qubit_mode(config.qubit_gap_mhz[static_cast<std::size_t>(q)],
                                           config.anharmonicity_mhz, config.qubit_levels);
        s.name = "QB" + std::to_string(q + 1);
        sys.subsystems.push_back(std::move(s));
    }
    SubsystemSpec coupler = build_coupler(coupler_gap_mhz, config.coupler_asymmetry);
    coupler.name = "C";
    sys.subsystems.push_back(std::move(coupler));

    for (std::size_t q = 0; q < 3; ++q) {
        sys.couplings.push_back(
            {config.qubit_coupler_z_mhz[q], {{q, "z"}, {3, "current"}}});
        sys.couplings.push_back(
            {config.qubit_coupler_exchange_mhz[q], {{q, "current"}, {3, "current"}}});
    }
    const std::array<std::pair<std::size_t, std::size_t>, 3> pairs = {
        {{0, 1}, {0, 2}, {1, 2}}};
    for (std::size_t p = 0; p < 3; ++p) {
        const auto [a, b] = pairs[p];
        sys.couplings.push_back({config.qubit_qubit_zz_mhz[p], {{a, "z"}, {b, "z"}}});
        sys.couplings.push_back(
            {config.qubit_qubit_xx_mhz[p], {{a, "current"}, {b, "current"}}});
    }
    return sys;
}

std::vector<GapSweepRow> coupler_gap_sweep(const CouplerTemplateConfig& config,
                                           const std::vector<double>& gaps_mhz,
                                           double overlap_threshold) {
    std::vector<GapSweepRow> rows;
    rows.reserve(gaps_mhz.size());
    for (double gap : gaps_mhz) {
        const CompositeSystem sys = build_coupler_template(config, gap);
        std::vector<int> keep;
        for (const auto& s : sys.subsystems) keep.push_back(s.dimension());
        const HierarchicalResult result = hierarchical_diagonalize(sys, keep);
        GapSweepRow row;
        row.gap_mhz = gap;
        try {
            const EffectiveExtraction ext =
                extract_effective_params(result, {0, 1, 2}, overlap_threshold);
            row.params = ext.estimation.params;
            row.min_overlap = ext.assignment.min_overlap;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::AmbiguousStates) throw;
            // Keep the row, flag it, and extract with the threshold disabled.
            const EffectiveExtraction ext = extract_effective_params(result, {0, 1, 2}, 0.0);
            row.params = ext.estimation.params;
            row.min_overlap = ext.assignment.min_overlap;
            row.flagged = true;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace triham
