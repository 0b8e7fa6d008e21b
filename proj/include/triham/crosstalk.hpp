#ifndef TRIHAM_CROSSTALK_HPP
#define TRIHAM_CROSSTALK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "triham/errors.hpp"

namespace triham {

/// Linear flux model f = C V + f0: C in flux quanta per volt, f0 in flux
/// quanta. Loops are ordered qubits first, then the two coupler loops.
struct CrosstalkModel {
    Eigen::MatrixXd c;
    Eigen::VectorXd f0;
    std::vector<std::string> labels;

    int size() const { return static_cast<int>(c.rows()); }
    int qubit_loops() const { return size() - 2; }

    /// Square, invertible, nonzero diagonal, >= 3 loops, matching labels.
    void validate() const;

    static std::vector<std::string> default_labels(int n);
    static CrosstalkModel identity(int n = 5);
};

/// Feature geometry and noise of the synthetic flux-tunable device. The
/// device is feature-level-faithful: resonator dips are Lorentzian, the
/// coupler map is an analytic stripe/blob pattern, and the calibration
/// consumes feature positions only.
struct VirtualDeviceConfig {
    CrosstalkModel truth;
    double dip_width_phi0 = 0.02;     // Lorentzian half width of resonator dips
    double dip_depth = 0.7;
    double blob_sigma_phi0 = 0.035;   // Gaussian width of 2D symmetry points
    double blob_depth = 0.6;
    double stripe_width_phi0 = 0.02;  // Lorentzian half width of the diagonal feature
    double stripe_depth = 0.35;
    double stripe_half_extent = 0.25; // segment edge at |f1 - f2| = this (mod 1)
    double edge_softness_phi0 = 0.01;
    double noise_sigma = 0.0;
    double hysteresis_offset_phi0 = 0.0;  // edge shift times sweep direction
    std::uint64_t seed = 0;

    static VirtualDeviceConfig realistic_noise_preset(CrosstalkModel truth,
                                                      std::uint64_t seed = 1);
};

/// Stateful synthetic device: every measurement increments an interior
/// counter that also seeds its noise stream, so a fixed call sequence is
/// bit-reproducible.
class VirtualDevice {
public:
    explicit VirtualDevice(VirtualDeviceConfig config);

    int n_loops() const { return config_.truth.size(); }
    const VirtualDeviceConfig& config() const { return config_; }
    long measurement_count() const { return measurement_count_; }

    /// Exact model consistency: true loop fluxes for raw source voltages.
    Eigen::VectorXd loop_fluxes(const Eigen::VectorXd& volts) const;

    /// Resonator transmission of `loop` (a qubit loop) while `sweep_antenna`
    /// is swept; all other antennas stay at base_volts. Dips where the loop
    /// flux is half-integer.
    std::vector<double> measure_qubit_trace(int loop, int sweep_antenna,
                                            const std::vector<double>& sweep_volts,
                                            const Eigen::VectorXd& base_volts);

    /// Same trace along an arbitrary voltage-space line
    /// volts(s) = base + s*direction (what a crosstalk-corrected sweep
    /// commands).
    std::vector<double> measure_qubit_trace_line(int loop, const Eigen::VectorXd& base_volts,
                                                 const Eigen::VectorXd& direction_volts,
                                                 const std::vector<double>& s_grid);

    /// Coupler resonator transmission on a 2D grid over the two coupler
    /// antennas. sweep_direction (+1/-1) selects the hysteresis branch of
    /// the diagonal feature's edge.
    Eigen::MatrixXd measure_coupler_map(const std::vector<double>& v1_grid,
                                        const std::vector<double>& v2_grid,
                                        const Eigen::VectorXd& base_volts,
                                        int sweep_direction = +1);

    /// Coupler map over an arbitrary voltage-space plane
    /// volts(s1, s2) = base + s1*dir1 + s2*dir2.
    Eigen::MatrixXd measure_coupler_plane(const Eigen::VectorXd& base_volts,
                                          const Eigen::VectorXd& dir1_volts,
                                          const Eigen::VectorXd& dir2_volts,
                                          const std::vector<double>& s1_grid,
                                          const std::vector<double>& s2_grid,
                                          int sweep_direction = +1);

    /// 1D cut through the coupler image along volts(s) = base + s*direction.
    std::vector<double> measure_coupler_cut(const Eigen::VectorXd& base_volts,
                                            const Eigen::VectorXd& direction_volts,
                                            const std::vector<double>& s_grid,
                                            int sweep_direction = +1);

private:
    double qubit_response(double flux) const;
    double coupler_image(double f1, double f2, int sweep_direction) const;
    double noise(std::uint64_t point_index);

    VirtualDeviceConfig config_;
    long measurement_count_ = 0;
};

/// --- feature extraction -------------------------------------------------

/// Positions of resonator dips with sub-grid precision (reciprocal-parabola
/// refinement around each local minimum). Throws NoFeatureFound when no dip
/// clears the prominence threshold.
std::vector<double> extract_dip_positions(const std::vector<double>& x,
                                          const std::vector<double>& y,
                                          double min_prominence = 0.15);

/// Half-depth crossing of a dark-to-bright edge along aline cut; `s` must
/// be increasing. Throws NoFeatureFound when the trace never crosses.
double extract_edge_position(const std::vector<double>& s, const std::vector<double>& y);

struct LatticePoint {
    double x1 = 0.0;
    double x2 = 0.0;
};

struct LatticeFit {
    Eigen::Matrix2d basis;    // columns: lattice vectors in sweep coordinates
    Eigen::Vector2d anchor;   // one lattice point
    std::vector<LatticePoint> points;
};

/// Extracts the symmetry-point lattice of a 2D coupler map: local-extremum
/// clustering, per-axis refinement, then a nearest-neighbor lattice fit.
LatticeFit fit_feature_lattice(const std::vector<double>& x1_grid,
                               const std::vector<double>& x2_grid,
                               const Eigen::MatrixXd& image, double min_prominence = 0.15);

/// --- calibration loop ----------------------------------------------------

struct CalibrationConfig {
    int iterations = 6;
    double initial_span_volts = 3.0;  // first diagonal sweep, before any estimate
    int trace_points = 601;
    int step_trace_points = 361;
    int map_points = 181;             // per axis
    int cut_points = 301;
    double step_window_quanta = 0.6;  // step-2 sweep span around a dip
};

/// One calibration iteration: the effective model measured in requested-flux
/// coordinates and the correction after composing its inverse.
struct CalibrationIteration {
    Eigen::MatrixXd measured_effective;   // G-hat
    Eigen::VectorXd measured_offset;      // g-hat, wrapped to [-0.5, 0.5)
    Eigen::MatrixXd correction_after;     // P
    Eigen::VectorXd offset_volts_after;   // q
    double measured_mean_offdiag_pct = 0.0;
    double measured_max_offdiag_pct = 0.0;
};

/// Controller state: commanded volts = correction * requested_flux + offset.
struct CalibrationState {
    Eigen::MatrixXd correction;
    Eigen::VectorXd offset_volts;
    std::vector<CalibrationIteration> history;
};

/// Runs the iterative crosstalk calibration: per iteration (1) diagonal
/// periodicities from resonator dips, (2) off-diagonal qubit-row elements
/// from dip shifts under one-flux-quantum steps of every other antenna,
/// (3) the coupler block from the symmetry-point lattice of a 2D map,
/// (4) coupler-row/qubit-column elements from shifts of the diagonal
/// feature's edge, (5) inversion and composition into the correction.
/// Throws SingularCorrection when an intermediate estimate is not
/// invertible.
CalibrationState calibrate(VirtualDevice& device, const CalibrationConfig& config = {});

struct ResidualMetrics {
    Eigen::MatrixXd effective;  // C_true * correction
    double mean_offdiag_pct = 0.0;
    double max_offdiag_pct = 0.0;
};

/// Off-diagonal residuals |M_ij / M_jj| (in percent flux quantum per flux
/// quantum) of M = C_true * correction.
ResidualMetrics residual_metrics(const CrosstalkModel& truth,
                                 const Eigen::MatrixXd& correction);

}  // namespace triham

#endif
