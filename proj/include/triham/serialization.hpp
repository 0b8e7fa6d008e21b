#ifndef TRIHAM_SERIALIZATION_HPP
#define TRIHAM_SERIALIZATION_HPP

#include <string>
#include <vector>

#include "json.hpp"
#include "triham/crosstalk.hpp"
#include "triham/estimator.hpp"
#include "triham/fitters.hpp"
#include "triham/multimode.hpp"
#include "triham/pipeline.hpp"
#include "triham/pulse_sim.hpp"

// JSON / CSV forms of the file-facing types. Parse failures throw
// Error(Schema); all frequency fields carry explicit unit suffixes except
// the HamiltonianParams object, whose flat schema (omega1..omega3, j12,
// j13, j23, k123 in MHz) is fixed. Parsers accept _mhz/_ghz variants where
// noted.

namespace triham {

using Json = nlohmann::json;

Json params_to_json(const HamiltonianParams& params);
HamiltonianParams params_from_json(const Json& j);

Json measurements_to_json(const std::vector<FrequencyMeasurement>& measurements);
std::vector<FrequencyMeasurement> measurements_from_json(const Json& j);

Json estimation_to_json(const EstimationResult& result,
                        const std::vector<TransitionId>& transitions);

std::string selection_draws_csv(const SelectionScan& scan);
Json selection_summary_json(const SelectionScan& scan);

std::string subset_survey_csv(const std::vector<SubsetSurveyRow>& survey);

std::string ramsey_trace_csv(const RamseyTrace& trace);
Json ramsey_metadata_json(const RamseyMetadata& metadata);
RamseyTrace ramsey_trace_from_csv(const std::string& csv, const Json& metadata);

Json ramsey_fit_json(const RamseyFitResult& fit);

struct RamseySimConfig {
    HamiltonianParams truth;
    TransitionId transition{BasisState(0), 3};
    double drive_frequency_mhz = 0.0;
    DecoherenceConfig decoherence = DecoherenceConfig::device_preset();
    RamseySignalShape shape;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> delays_ns;
};
RamseySimConfig ramsey_sim_config_from_json(const Json& j);

EndToEndConfig end_to_end_config_from_json(const Json& j);
Json end_to_end_report_json(const EndToEndReport& report);

Json crosstalk_model_to_json(const CrosstalkModel& model);
CrosstalkModel crosstalk_model_from_json(const Json& j);
VirtualDeviceConfig device_config_from_json(const Json& j);
CalibrationConfig calibration_config_from_json(const Json& j);
std::string calibration_residual_csv(const CrosstalkModel& truth, const CalibrationState& state);
Json correction_json(const CrosstalkModel& truth, const CalibrationState& state);

CouplerTemplateConfig template_config_from_json(const Json& j);
std::string gap_sweep_csv(const std::vector<GapSweepRow>& rows);
CompositeSystem composite_from_json(const Json& j);

std::vector<DephasingPoint> dephasing_points_from_json(const Json& j);
Json flux_noise_fit_json(const FluxNoiseFit& fit);

struct DispersionInput {
    std::vector<double> flux_phi0;
    std::vector<double> slope;
};
DispersionInput dispersion_input_from_json(const Json& j);
std::string dispersion_csv(const std::vector<double>& flux, const std::vector<double>& energy);

/// Parses text as JSON; wraps parse failures in Error(Schema).
Json parse_json(const std::string& text);

/// CSV table -> JSON array of row objects (numeric cells become numbers).
/// Used by the CLI's --format json mode.
Json csv_to_json_rows(const std::string& csv);

}  // namespace triham

#endif
