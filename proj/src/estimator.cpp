#include "triham/estimator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace triham {

namespace {

std::string describe_transitions(const std::vector<TransitionId>& ts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) os << ", ";
        os << ts[i].label();
    }
    return os.str();
}

}  // namespace

FrequencyMeasurement::FrequencyMeasurement(TransitionId t, double value, double sigma)
    : transition(t), value_mhz(value), sigma_mhz(sigma) {
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::InvalidArgument,
                    "measurement value for " + t.label() + " is not finite");
    }
    if (!(sigma >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    "measurement sigma for " + t.label() + " must be >= 0");
    }
}

ParamVector DesignMatrix::row(const TransitionId& t) {
    ParamVector r = ParamVector::Zero();
    const auto ints = integer_row(t);
    for (int i = 0; i < kNumParams; ++i) r(i) = static_cast<double>(ints[static_cast<std::size_t>(i)]);
    return r;
}

std::array<std::int64_t, kNumParams> DesignMatrix::integer_row(const TransitionId& t) {
    std::array<std::int64_t, kNumParams> r{};
    const int k = t.flipped_qubit();
    const BasisState lo = t.lower();
    r[static_cast<std::size_t>(k - 1)] = 1;
    auto j_column = [](int a, int b) {
        if (a > b) std::swap(a, b);
        if (a == 1 && b == 2) return 3;
        if (a == 1 && b == 3) return 4;
        return 5;  // {2,3}
    };
    std::int64_t spin_product = 1;
    for (int q = 1; q <= kNumQubits; ++q) {
        if (q == k) continue;
        r[static_cast<std::size_t>(j_column(k, q))] = -2 * lo.spin(q);
        spin_product *= lo.spin(q);
    }
    r[6] = -2 * spin_product;
    return r;
}

DesignMatrix::DesignMatrix(std::vector<TransitionId> transitions)
    : transitions_(std::move(transitions)),
      rows_(static_cast<Eigen::Index>(transitions_.size()), kNumParams) {
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        rows_.row(static_cast<Eigen::Index>(i)) = row(transitions_[i]).transpose();
    }
}

int DesignMatrix::integer_rank() const {
    // Bareiss fraction-free elimination; entries stay tiny for these
    // {-2..2} matrices, far from int64 overflow.
    const std::size_t n = transitions_.size();
    std::vector<std::array<std::int64_t, kNumParams>> m;
    m.reserve(n);
    for (const auto& t : transitions_) m.push_back(integer_row(t));

    int rank = 0;
    std::int64_t prev_pivot = 1;
    std::size_t pivot_row = 0;
    for (int col = 0; col < kNumParams && pivot_row < n; ++col) {
        std::size_t sel = pivot_row;
        while (sel < n && m[sel][static_cast<std::size_t>(col)] == 0) ++sel;
        if (sel == n) continue;
        std::swap(m[pivot_row], m[sel]);
        const std::int64_t pivot = m[pivot_row][static_cast<std::size_t>(col)];
        for (std::size_t r = pivot_row + 1; r < n; ++r) {
            for (int c = col + 1; c < kNumParams; ++c) {
                m[r][static_cast<std::size_t>(c)] =
                    (pivot * m[r][static_cast<std::size_t>(c)] -
                     m[r][static_cast<std::size_t>(col)] * m[pivot_row][static_cast<std::size_t>(c)]) /
                    prev_pivot;
            }
            m[r][static_cast<std::size_t>(col)] = 0;
        }
        prev_pivot = pivot;
        ++pivot_row;
        ++rank;
    }
    return rank;
}

double DesignMatrix::condition_number() const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows_);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

const std::array<TransitionId, kNumParams>& reference_seven_transitions() {
    static const std::array<TransitionId, kNumParams> set = {
        TransitionId::parse("000-001"), TransitionId::parse("000-010"),
        TransitionId::parse("000-100"), TransitionId::parse("001-011"),
        TransitionId::parse("100-101"), TransitionId::parse("100-110"),
        TransitionId::parse("110-111"),
    };
    return set;
}

Eigen::Matrix<double, kNumParams, kNumParams> published_seven_matrix(bool as_printed) {
    Eigen::Matrix<double, kNumParams, kNumParams> m;
    const auto& ts = reference_seven_transitions();
    for (int i = 0; i < kNumParams; ++i) {
        m.row(i) = DesignMatrix::row(ts[static_cast<std::size_t>(i)]).transpose();
    }
    if (as_printed) {
        // The row the published matrix prints for 100-110.
        m.row(5) << 0, 1, 0, 2, -2, 2, 0;
    }
    return m;
}

namespace {

EstimationResult finish_result(const DesignMatrix& design, const Eigen::VectorXd& values,
                               const ParamVector& theta, const ParamMatrix& covariance,
                               EstimationMethod method) {
    EstimationResult out;
    out.params = HamiltonianParams::from_vector(
        {theta(0), theta(1), theta(2), theta(3), theta(4), theta(5), theta(6)});
    out.covariance = covariance;
    const Eigen::VectorXd fitted = design.matrix() * theta;
    out.residuals_mhz.resize(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out.residuals_mhz[static_cast<std::size_t>(i)] = values(i) - fitted(i);
    }
    out.method = method;
    out.condition_number = design.condition_number();
    return out;
}

void require_rank_seven(const DesignMatrix& design) {
    if (design.integer_rank() < kNumParams) {
        std::ostringstream os;
        os << "design matrix for transitions {" << describe_transitions(design.transitions())
           << "} has rank " << design.integer_rank() << " < 7 (condition number "
           << design.condition_number() << "); the transition set is incomplete";
        throw Error(ErrorKind::SingularDesign, os.str());
    }
}

}  // namespace

EstimationResult solve_exact(const std::vector<FrequencyMeasurement>& measurements) {
    if (measurements.size() != kNumParams) {
        throw Error(ErrorKind::SingularDesign,
                    "solve_exact needs exactly 7 measurements, got " +
                        std::to_string(measurements.size()));
    }
    std::vector<TransitionId> ts;
    ts.reserve(measurements.size());
    for (const auto& m : measurements) ts.push_back(m.transition);
    DesignMatrix design(std::move(ts));
    require_rank_seven(design);

    Eigen::Matrix<double, kNumParams, kNumParams> a = design.matrix();
    Eigen::Matrix<double, kNumParams, 1> f;
    Eigen::Matrix<double, kNumParams, 1> sigma2;
    for (int i = 0; i < kNumParams; ++i) {
        f(i) = measurements[static_cast<std::size_t>(i)].value_mhz;
        sigma2(i) = measurements[static_cast<std::size_t>(i)].sigma_mhz *
                    measurements[static_cast<std::size_t>(i)].sigma_mhz;
    }
    const Eigen::Matrix<double, kNumParams, kNumParams> a_inv = a.fullPivLu().inverse();
    const ParamVector theta = a_inv * f;
    const ParamMatrix cov = a_inv * sigma2.asDiagonal() * a_inv.transpose();

    EstimationResult out =
        finish_result(design, f, theta, cov, EstimationMethod::ExactSeven);
    // The solve is exact; clear float dust so the exact-7 invariant
    // (residuals identically zero) holds.
    for (auto& r : out.residuals_mhz) r = 0.0;
    return out;
}

EstimationResult solve_least_squares(const std::vector<FrequencyMeasurement>& measurements) {
    if (measurements.size() < kNumParams) {
        throw Error(ErrorKind::SingularDesign,
                    "least squares needs at least 7 measurements, got " +
                        std::to_string(measurements.size()));
    }
    std::vector<TransitionId> ts;
    ts.reserve(measurements.size());
    for (const auto& m : measurements) {
        if (!(m.sigma_mhz > 0.0)) {
            throw Error(ErrorKind::InvalidArgument,
                        "least squares requires sigma > 0 for " + m.transition.label());
        }
        ts.push_back(m.transition);
    }
    DesignMatrix design(std::move(ts));
    require_rank_seven(design);

    const Eigen::Index n = static_cast<Eigen::Index>(measurements.size());
    Eigen::VectorXd f(n);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& m = measurements[static_cast<std::size_t>(i)];
        f(i) = m.value_mhz;
        w(i) = 1.0 / (m.sigma_mhz * m.sigma_mhz);
    }
    const Eigen::MatrixXd& a = design.matrix();
    const ParamMatrix normal = a.transpose() * w.asDiagonal() * a;
    const ParamMatrix cov = normal.fullPivLu().inverse();
    const ParamVector theta = cov * (a.transpose() * (w.asDiagonal() * f));
    return finish_result(design, f, theta, cov, EstimationMethod::LeastSquares);
}

std::vector<SubsetSurveyRow> subset_survey() {
    const auto& all = enumerate_transitions();
    std::vector<SubsetSurveyRow> out;
    std::array<int, kNumParams> idx{};
    for (int i = 0; i < kNumParams; ++i) idx[static_cast<std::size_t>(i)] = i;
    const int n = kNumTransitions;
    const int k = kNumParams;
    while (true) {
        SubsetSurveyRow row{
            {all[static_cast<std::size_t>(idx[0])], all[static_cast<std::size_t>(idx[1])],
             all[static_cast<std::size_t>(idx[2])], all[static_cast<std::size_t>(idx[3])],
             all[static_cast<std::size_t>(idx[4])], all[static_cast<std::size_t>(idx[5])],
             all[static_cast<std::size_t>(idx[6])]},
            false,
            false};
        DesignMatrix design(std::vector<TransitionId>(row.transitions.begin(),
                                                      row.transitions.end()));
        row.invertible = design.integer_rank() == kNumParams;
        unsigned touched = 0;
        for (const auto& t : row.transitions) {
            touched |= 1u << t.lower().index();
            touched |= 1u << t.upper().index();
        }
        row.covers_all_states = touched == 0xffu;
        out.push_back(std::move(row));

        // Next k-combination in lexicographic order.
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

std::vector<std::array<TransitionId, kNumParams>> complete_subsets() {
    std::vector<std::array<TransitionId, kNumParams>> out;
    for (const auto& row : subset_survey()) {
        if (row.invertible) out.push_back(row.transitions);
    }
    return out;
}

SelectionScan selection_scan(const std::vector<FrequencyMeasurement>& measurements) {
    const auto& all = enumerate_transitions();
    if (measurements.size() != all.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    "selection scan needs all 12 transitions, got " +
                        std::to_string(measurements.size()));
    }
    // Index measurements by canonical transition position.
    std::array<const FrequencyMeasurement*, kNumTransitions> by_transition{};
    for (const auto& m : measurements) {
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i] == m.transition) {
                if (by_transition[i] != nullptr) {
                    throw Error(ErrorKind::InvalidArgument,
                                "duplicate measurement for " + m.transition.label());
                }
                by_transition[i] = &m;
            }
        }
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (by_transition[i] == nullptr) {
            throw Error(ErrorKind::InvalidArgument,
                        "selection scan is missing transition " + all[i].label());
        }
    }

    SelectionScan scan;
    scan.subsets = complete_subsets();
    if (scan.subsets.empty()) {
        throw Error(ErrorKind::SingularDesign, "no complete subsets found");
    }
    scan.draws.resize(static_cast<Eigen::Index>(scan.subsets.size()), kNumParams);
    for (std::size_t s = 0; s < scan.subsets.size(); ++s) {
        std::vector<FrequencyMeasurement> subset_measurements;
        subset_measurements.reserve(kNumParams);
        for (const auto& t : scan.subsets[s]) {
            for (std::size_t i = 0; i < all.size(); ++i) {
                if (all[i] == t) subset_measurements.push_back(*by_transition[i]);
            }
        }
        const EstimationResult r = solve_exact(subset_measurements);
        const auto v = r.params.to_vector();
        for (int p = 0; p < kNumParams; ++p) {
            scan.draws(static_cast<Eigen::Index>(s), p) = v[static_cast<std::size_t>(p)];
        }
    }
    scan.mean = scan.draws.colwise().mean().transpose();
    const Eigen::MatrixXd centered = scan.draws.rowwise() - scan.mean.transpose();
    scan.std_dev =
        (centered.array().square().colwise().sum() / static_cast<double>(scan.subsets.size()))
            .sqrt()
            .matrix()
            .transpose();
    return scan;
}

ParamVector selection_error(const std::vector<FrequencyMeasurement>& measurements) {
    return selection_scan(measurements).std_dev;
}

std::vector<PredictedFrequency> predict_remaining(const EstimationResult& result,
                                                  const std::vector<TransitionId>& held_out) {
    std::vector<PredictedFrequency> out;
    out.reserve(held_out.size());
    const auto v = result.params.to_vector();
    ParamVector theta;
    for (int i = 0; i < kNumParams; ++i) theta(i) = v[static_cast<std::size_t>(i)];
    for (const auto& t : held_out) {
        const ParamVector row = DesignMatrix::row(t);
        const double value = row.dot(theta);
        const double sigma =
            std::sqrt(std::max(0.0, (row.transpose() * result.covariance * row)(0)));
        out.push_back(PredictedFrequency{t, value, sigma});
    }
    return out;
}

}  // namespace triham
