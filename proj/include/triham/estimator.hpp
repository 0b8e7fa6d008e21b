#ifndef TRIHAM_ESTIMATOR_HPP
#define TRIHAM_ESTIMATOR_HPP

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "triham/spin_model.hpp"

namespace triham {

/// A measured transition frequency with its one-sigma uncertainty.
struct FrequencyMeasurement {
    TransitionId transition;
    double value_mhz = 0.0;
    double sigma_mhz = 0.0;  // >= 0

    FrequencyMeasurement(TransitionId t, double value, double sigma);
};

using ParamVector = Eigen::Matrix<double, kNumParams, 1>;
using ParamMatrix = Eigen::Matrix<double, kNumParams, kNumParams>;

/// Linear map from the 7 Hamiltonian parameters to a set of transition
/// frequencies. Column order (omega1, omega2, omega3, J12, J13, J23, K123).
/// Row coefficients: 1 on omega_k for the flipped qubit k, -2 s_j on J_kj
/// for each non-flipped qubit j (lower-state spin s_j), -2 s_a s_b on K.
/// All entries are integers in {-2, -1, 0, 1, 2}.
class DesignMatrix {
public:
    static ParamVector row(const TransitionId& t);

    /// Same row with exact integer coefficients (for rank tests).
    static std::array<std::int64_t, kNumParams> integer_row(const TransitionId& t);

    explicit DesignMatrix(std::vector<TransitionId> transitions);

    const std::vector<TransitionId>& transitions() const { return transitions_; }
    const Eigen::MatrixXd& matrix() const { return rows_; }

    /// Exact rank over the integers via fraction-free (Bareiss) elimination.
    /// No floating tolerance is involved.
    int integer_rank() const;

    /// 2-norm condition number (largest/smallest singular value); +inf when
    /// rank deficient.
    double condition_number() const;

private:
    std::vector<TransitionId> transitions_;
    Eigen::MatrixXd rows_;
};

/// The seven transitions used in the reference experiment, in the order the
/// published linear system lists them.
const std::array<TransitionId, kNumParams>& reference_seven_transitions();

/// The published 7x7 coefficient matrix. The printed version of row 6
/// ([0 1 0 2 -2 2 0]) is inconsistent with the published parameter/frequency
/// table; by default the corrected row [0 1 0 2 0 -2 2] (a re-derivation from
/// the Hamiltonian) is returned. Pass `as_printed = true` to obtain the
/// literal printed matrix for documentation and comparison.
Eigen::Matrix<double, kNumParams, kNumParams> published_seven_matrix(bool as_printed = false);

enum class EstimationMethod { ExactSeven, LeastSquares };

struct EstimationResult {
    HamiltonianParams params;
    ParamMatrix covariance;           // MHz^2
    std::vector<double> residuals_mhz;  // per input measurement; zero for exact-7
    EstimationMethod method = EstimationMethod::ExactSeven;
    double condition_number = 0.0;    // of the (unweighted) design matrix
};

/// Inverts a complete set of exactly 7 measurements. Throws SingularDesign
/// (with the condition number in the message) when the design matrix has
/// integer rank < 7. Covariance is A^-1 diag(sigma^2) A^-T.
EstimationResult solve_exact(const std::vector<FrequencyMeasurement>& measurements);

/// Weighted least squares over >= 7 measurements (weights 1/sigma^2; all
/// sigmas must be > 0). Reduces to solve_exact on 7 rows. Covariance is
/// (A^T W A)^-1.
EstimationResult solve_least_squares(const std::vector<FrequencyMeasurement>& measurements);

/// One row of the subset survey over all C(12,7) = 792 seven-transition
/// subsets of the canonical transition list.
struct SubsetSurveyRow {
    std::array<TransitionId, kNumParams> transitions;
    bool invertible = false;        // integer design rank == 7
    bool covers_all_states = false; // every basis state appears in some transition
};

/// Deterministic enumeration of all 792 subsets with both completeness
/// criteria evaluated. Subsets appear in lexicographic order of their index
/// set within the canonical 12-transition ordering.
std::vector<SubsetSurveyRow> subset_survey();

/// The subsets whose design matrix is invertible (384 of 792).
std::vector<std::array<TransitionId, kNumParams>> complete_subsets();

/// Standard deviation of each parameter across solve_exact over all
/// complete 7-subsets of the 12 given measurements (all 12 transitions must
/// be present). Also exposes the per-subset parameter draws.
struct SelectionScan {
    std::vector<std::array<TransitionId, kNumParams>> subsets;
    Eigen::MatrixXd draws;       // n_subsets x 7 parameter draws
    ParamVector mean;            // across subsets
    ParamVector std_dev;         // the selection error, MHz
};

SelectionScan selection_scan(const std::vector<FrequencyMeasurement>& measurements);
ParamVector selection_error(const std::vector<FrequencyMeasurement>& measurements);

struct PredictedFrequency {
    TransitionId transition;
    double value_mhz = 0.0;
    double sigma_mhz = 0.0;
};

/// Predicted frequencies (design_row . params) with sigmas from the
/// covariance sandwich sqrt(row Cov row^T).
std::vector<PredictedFrequency> predict_remaining(const EstimationResult& result,
                                                  const std::vector<TransitionId>& held_out);

}  // namespace triham

#endif
