#include "triham/serialization.hpp"

#include <cmath>
#include <sstream>

namespace triham {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
    throw Error(ErrorKind::Schema, what);
}

double finite_number(const Json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        schema_error("missing or non-numeric field '" + key + "'");
    }
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) schema_error("field '" + key + "' is not finite");
    return v;
}

double number_or(const Json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    return finite_number(j, key);
}

// Reads `name` (MHz) with optional _mhz/_ghz suffixed variants.
double frequency_mhz(const Json& j, const std::string& name, bool bare_allowed = true) {
    if (j.contains(name + "_mhz")) return finite_number(j, name + "_mhz");
    if (j.contains(name + "_ghz")) return 1e3 * finite_number(j, name + "_ghz");
    if (bare_allowed && j.contains(name)) return finite_number(j, name);
    schema_error("missing frequency field '" + name + "_mhz'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.at(0).is_array()) {
        schema_error(what + " must be an array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(r)).size()) != cols) {
            schema_error(what + " rows have unequal lengths");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
            if (!cell.is_number()) schema_error(what + " has a non-numeric cell");
            m(r, c) = cell.get<double>();
        }
    }
    return m;
}

}  // namespace

Json parse_json(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) schema_error("malformed JSON");
    return j;
}

Json params_to_json(const HamiltonianParams& params) {
    return Json{{"omega1", params.omega[0]}, {"omega2", params.omega[1]},
                {"omega3", params.omega[2]}, {"j12", params.j[0]},
                {"j13", params.j[1]},        {"j23", params.j[2]},
                {"k123", params.k123}};
}

HamiltonianParams params_from_json(const Json& j) {
    if (!j.is_object()) schema_error("parameters must be a JSON object");
    HamiltonianParams p;
    p.omega = {frequency_mhz(j, "omega1"), frequency_mhz(j, "omega2"),
               frequency_mhz(j, "omega3")};
    p.j = {frequency_mhz(j, "j12"), frequency_mhz(j, "j13"), frequency_mhz(j, "j23")};
    p.k123 = frequency_mhz(j, "k123");
    return p;
}

Json measurements_to_json(const std::vector<FrequencyMeasurement>& measurements) {
    Json out = Json::array();
    for (const auto& m : measurements) {
        out.push_back(Json{{"lower", m.transition.lower().label()},
                           {"upper", m.transition.upper().label()},
                           {"value_mhz", m.value_mhz},
                           {"sigma_mhz", m.sigma_mhz}});
    }
    return out;
}

std::vector<FrequencyMeasurement> measurements_from_json(const Json& j) {
    if (!j.is_array()) schema_error("measurements must be a JSON array");
    std::vector<FrequencyMeasurement> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("lower") || !item.contains("upper") ||
            !item.at("lower").is_string() || !item.at("upper").is_string()) {
            schema_error("each measurement needs string fields 'lower' and 'upper'");
        }
        const TransitionId t =
            TransitionId::between(BasisState::parse(item.at("lower").get<std::string>()),
                                  BasisState::parse(item.at("upper").get<std::string>()));
        const double value = frequency_mhz(item, "value", false);
        double sigma = 0.0;
        if (item.contains("sigma_khz")) {
            sigma = 1e-3 * finite_number(item, "sigma_khz");
        } else {
            sigma = frequency_mhz(item, "sigma", false);
        }
        out.emplace_back(t, value, sigma);
    }
    return out;
}

Json estimation_to_json(const EstimationResult& result,
                        const std::vector<TransitionId>& transitions) {
    Json j;
    j["method"] = result.method == EstimationMethod::ExactSeven ? "exact-7" : "least-squares";
    j["params"] = params_to_json(result.params);
    Json sigmas;
    const char* names[kNumParams] = {"omega1", "omega2", "omega3", "j12", "j13", "j23", "k123"};
    for (int i = 0; i < kNumParams; ++i) {
        sigmas[names[i]] = std::sqrt(std::max(result.covariance(i, i), 0.0));
    }
    j["sigmas_mhz"] = std::move(sigmas);
    Eigen::MatrixXd cov = result.covariance;
    j["covariance_mhz2"] = matrix_to_json(cov);
    Json residuals = Json::array();
    for (std::size_t i = 0; i < result.residuals_mhz.size(); ++i) {
        residuals.push_back(Json{{"transition", transitions[i].label()},
                                 {"residual_mhz", result.residuals_mhz[i]}});
    }
    j["residuals"] = std::move(residuals);
    j["condition_number"] = result.condition_number;
    return j;
}

std::string selection_draws_csv(const SelectionScan& scan) {
    std::ostringstream os;
    os << "subset,transitions,omega1_mhz,omega2_mhz,omega3_mhz,j12_mhz,j13_mhz,j23_mhz,"
          "k123_mhz\n";
    for (std::size_t s = 0; s < scan.subsets.size(); ++s) {
        os << s << ",";
        for (std::size_t t = 0; t < scan.subsets[s].size(); ++t) {
            os << (t ? "|" : "") << scan.subsets[s][t].label();
        }
        for (int p = 0; p < kNumParams; ++p) {
            os << "," << format_double(scan.draws(static_cast<Eigen::Index>(s), p));
        }
        os << "\n";
    }
    return os.str();
}

Json selection_summary_json(const SelectionScan& scan) {
    const char* names[kNumParams] = {"omega1", "omega2", "omega3", "j12", "j13", "j23", "k123"};
    Json mean, err;
    for (int i = 0; i < kNumParams; ++i) {
        mean[names[i]] = scan.mean(i);
        err[names[i]] = scan.std_dev(i);
    }
    return Json{{"subsets", scan.subsets.size()},
                {"mean_mhz", std::move(mean)},
                {"selection_error_mhz", std::move(err)}};
}

std::string subset_survey_csv(const std::vector<SubsetSurveyRow>& survey) {
    std::ostringstream os;
    os << "subset,transitions,invertible,covers_all_states\n";
    for (std::size_t s = 0; s < survey.size(); ++s) {
        os << s << ",";
        for (std::size_t t = 0; t < survey[s].transitions.size(); ++t) {
            os << (t ? "|" : "") << survey[s].transitions[t].label();
        }
        os << "," << (survey[s].invertible ? 1 : 0) << ","
           << (survey[s].covers_all_states ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string ramsey_trace_csv(const RamseyTrace& trace) {
    std::ostringstream os;
    os << "delay_ns,signal\n";
    for (std::size_t i = 0; i < trace.delays_ns.size(); ++i) {
        os << format_double(trace.delays_ns[i]) << "," << format_double(trace.signal[i]) << "\n";
    }
    return os.str();
}

namespace {

Json optional_time(double t) {
    if (std::isinf(t)) return nullptr;
    return t;
}

double time_or_inf(const Json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::numeric_limits<double>::infinity();
    }
    return finite_number(j, key);
}

}  // namespace

Json ramsey_metadata_json(const RamseyMetadata& metadata) {
    return Json{{"transition", metadata.transition_label},
                {"drive_frequency_mhz", metadata.drive_frequency_mhz},
                {"noise_sigma", metadata.noise_sigma},
                {"seed", metadata.seed},
                {"t2_ns", optional_time(metadata.t2_ns)},
                {"background_decay_ns", optional_time(metadata.background_decay_ns)}};
}

RamseyTrace ramsey_trace_from_csv(const std::string& csv, const Json& metadata) {
    RamseyTrace trace;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) schema_error("empty trace CSV");
    bool header = line.find("delay_ns") != std::string::npos;
    auto parse_line = [&](const std::string& text) {
        const auto comma = text.find(',');
        if (comma == std::string::npos) schema_error("trace CSV row needs two columns");
        try {
            trace.delays_ns.push_back(std::stod(text.substr(0, comma)));
            trace.signal.push_back(std::stod(text.substr(comma + 1)));
        } catch (const std::exception&) {
            schema_error("non-numeric trace CSV cell in '" + text + "'");
        }
    };
    if (!header) parse_line(line);
    while (std::getline(in, line)) {
        if (!line.empty()) parse_line(line);
    }
    if (metadata.is_object()) {
        if (metadata.contains("transition") && metadata.at("transition").is_string()) {
            trace.metadata.transition_label = metadata.at("transition").get<std::string>();
        }
        trace.metadata.drive_frequency_mhz = number_or(metadata, "drive_frequency_mhz", 0.0);
        trace.metadata.noise_sigma = number_or(metadata, "noise_sigma", 0.0);
        if (metadata.contains("seed")) {
            trace.metadata.seed = metadata.at("seed").get<std::uint64_t>();
        }
        trace.metadata.t2_ns = time_or_inf(metadata, "t2_ns");
        trace.metadata.background_decay_ns = time_or_inf(metadata, "background_decay_ns");
    }
    return trace;
}

Json ramsey_fit_json(const RamseyFitResult& fit) {
    auto pack = [](const RamseyFitParams& p) {
        return Json{{"detuning_mhz", p.detuning_mhz},
                    {"t2_ns", optional_time(p.t2_ns)},
                    {"amplitude", p.amplitude},
                    {"phase_rad", p.phase_rad},
                    {"offset", p.offset},
                    {"bg_amplitude", p.bg_amplitude},
                    {"bg_decay_ns", optional_time(p.bg_decay_ns)}};
    };
    Json j;
    j["params"] = pack(fit.params);
    j["sigmas"] = pack(fit.sigmas);
    j["covariance"] = matrix_to_json(fit.covariance);
    Json order = Json::array({"detuning_mhz", "t2_rate_per_ns", "amplitude", "phase_rad",
                              "offset", "bg_amplitude", "bg_rate_per_ns"});
    while (static_cast<Eigen::Index>(order.size()) > fit.covariance.rows()) {
        order.erase(order.size() - 1);
    }
    j["covariance_order"] = std::move(order);
    j["chi2_reduced"] = fit.chi2_reduced;
    j["n_iter"] = fit.n_iterations;
    j["converged"] = fit.converged;
    return j;
}

namespace {

DecoherenceConfig decoherence_from_json(const Json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "device") return DecoherenceConfig::device_preset();
        if (name == "ideal") return DecoherenceConfig::ideal();
        schema_error("unknown decoherence preset '" + name + "'");
    }
    if (!j.is_object()) schema_error("decoherence must be an object or preset name");
    DecoherenceConfig c = DecoherenceConfig::device_preset();
    if (j.contains("t1_ns")) {
        const auto& a = j.at("t1_ns");
        if (!a.is_array() || a.size() != 3) schema_error("t1_ns must have 3 entries");
        for (int q = 0; q < 3; ++q) c.t1_ns[static_cast<std::size_t>(q)] = a.at(static_cast<std::size_t>(q)).get<double>();
    }
    if (j.contains("t2_ns")) {
        const auto& a = j.at("t2_ns");
        if (!a.is_array() || a.size() != 3) schema_error("t2_ns must have 3 entries");
        for (int q = 0; q < 3; ++q) c.t2_ns[static_cast<std::size_t>(q)] = a.at(static_cast<std::size_t>(q)).get<double>();
    }
    c.background_decay_ns = number_or(j, "background_decay_ns", c.background_decay_ns);
    c.validate();
    return c;
}

RamseySignalShape shape_from_json(const Json& j) {
    RamseySignalShape s;
    if (!j.is_object()) return s;
    s.offset = number_or(j, "offset", s.offset);
    s.bg_amplitude = number_or(j, "bg_amplitude", s.bg_amplitude);
    s.amplitude = number_or(j, "amplitude", s.amplitude);
    s.phase_rad = number_or(j, "phase_rad", s.phase_rad);
    return s;
}

TransitionId transition_from_json(const Json& j) {
    if (j.is_string()) return TransitionId::parse(j.get<std::string>());
    if (j.is_object() && j.contains("lower") && j.contains("upper")) {
        return TransitionId::between(BasisState::parse(j.at("lower").get<std::string>()),
                                     BasisState::parse(j.at("upper").get<std::string>()));
    }
    schema_error("transition must be 'lll-uuu' or {lower, upper}");
}

}  // namespace

RamseySimConfig ramsey_sim_config_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("truth")) {
        schema_error("simulation config needs a 'truth' parameter object");
    }
    RamseySimConfig cfg;
    cfg.truth = params_from_json(j.at("truth"));
    if (!j.contains("transition")) schema_error("simulation config needs 'transition'");
    cfg.transition = transition_from_json(j.at("transition"));
    const double f_true = transition_frequency(cfg.truth, cfg.transition);
    if (j.contains("drive_frequency_mhz")) {
        cfg.drive_frequency_mhz = finite_number(j, "drive_frequency_mhz");
    } else {
        cfg.drive_frequency_mhz = f_true - number_or(j, "detuning_mhz", 17.0);
    }
    if (j.contains("decoherence")) cfg.decoherence = decoherence_from_json(j.at("decoherence"));
    if (j.contains("shape")) cfg.shape = shape_from_json(j.at("shape"));
    cfg.noise_sigma = number_or(j, "noise_sigma", 0.0);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    const double start = number_or(j, "delay_start_ns", 0.0);
    const double step = number_or(j, "delay_step_ns", 2.0);
    const int count = j.contains("delay_count") ? j.at("delay_count").get<int>() : 200;
    if (count < 2 || step <= 0.0) schema_error("bad delay grid");
    for (int i = 0; i < count; ++i) cfg.delays_ns.push_back(start + step * i);
    return cfg;
}

EndToEndConfig end_to_end_config_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("truth")) {
        schema_error("end-to-end config needs a 'truth' parameter object");
    }
    EndToEndConfig cfg;
    cfg.truth = params_from_json(j.at("truth"));
    cfg.detuning_mhz = number_or(j, "detuning_mhz", cfg.detuning_mhz);
    cfg.delay_start_ns = number_or(j, "delay_start_ns", cfg.delay_start_ns);
    cfg.delay_step_ns = number_or(j, "delay_step_ns", cfg.delay_step_ns);
    if (j.contains("delay_count")) cfg.delay_count = j.at("delay_count").get<int>();
    cfg.noise_sigma = number_or(j, "noise_sigma", cfg.noise_sigma);
    if (j.contains("decoherence")) cfg.decoherence = decoherence_from_json(j.at("decoherence"));
    if (j.contains("shape")) cfg.shape = shape_from_json(j.at("shape"));
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

Json end_to_end_report_json(const EndToEndReport& report) {
    Json j;
    j["seed"] = report.seed;
    Json runs = Json::array();
    for (const auto& run : report.transitions) {
        Json r{{"transition", run.transition.label()},
               {"true_frequency_mhz", run.true_frequency_mhz},
               {"drive_frequency_mhz", run.drive_frequency_mhz},
               {"usable", run.usable}};
        if (run.usable) {
            r["fit"] = ramsey_fit_json(run.fit);
            r["measured_mhz"] = run.measured_mhz;
            r["sigma_mhz"] = run.sigma_mhz;
        } else {
            r["failure"] = run.failure;
        }
        runs.push_back(std::move(r));
    }
    j["transitions"] = std::move(runs);
    std::vector<TransitionId> used;
    for (const auto& run : report.transitions) {
        if (run.usable) used.push_back(run.transition);
    }
    j["estimation"] = estimation_to_json(report.estimation, used);
    const char* names[kNumParams] = {"omega1", "omega2", "omega3", "j12", "j13", "j23", "k123"};
    Json delta, sigma;
    for (int i = 0; i < kNumParams; ++i) {
        delta[names[i]] = report.truth_delta[static_cast<std::size_t>(i)];
        sigma[names[i]] = report.sigma[static_cast<std::size_t>(i)];
    }
    j["truth_delta_mhz"] = std::move(delta);
    j["sigma_mhz"] = std::move(sigma);
    j["all_within_3sigma"] = report.all_within_3sigma;
    return j;
}

Json crosstalk_model_to_json(const CrosstalkModel& model) {
    Json j;
    j["labels"] = model.labels;
    j["c_phi0_per_volt"] = matrix_to_json(model.c);
    Json f0 = Json::array();
    for (Eigen::Index i = 0; i < model.f0.size(); ++i) f0.push_back(model.f0(i));
    j["f0_phi0"] = std::move(f0);
    return j;
}

CrosstalkModel crosstalk_model_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("c_phi0_per_volt")) {
        schema_error("crosstalk model needs 'c_phi0_per_volt'");
    }
    CrosstalkModel m;
    m.c = matrix_from_json(j.at("c_phi0_per_volt"), "c_phi0_per_volt");
    const int n = static_cast<int>(m.c.rows());
    m.f0 = Eigen::VectorXd::Zero(n);
    if (j.contains("f0_phi0")) {
        const auto& f0 = j.at("f0_phi0");
        if (!f0.is_array() || static_cast<int>(f0.size()) != n) {
            schema_error("f0_phi0 length mismatch");
        }
        for (int i = 0; i < n; ++i) m.f0(i) = f0.at(static_cast<std::size_t>(i)).get<double>();
    }
    if (j.contains("labels")) {
        m.labels = j.at("labels").get<std::vector<std::string>>();
    } else {
        m.labels = CrosstalkModel::default_labels(n);
    }
    m.validate();
    return m;
}

VirtualDeviceConfig device_config_from_json(const Json& j) {
    VirtualDeviceConfig cfg;
    cfg.truth = crosstalk_model_from_json(j);
    cfg.dip_width_phi0 = number_or(j, "dip_width_phi0", cfg.dip_width_phi0);
    cfg.dip_depth = number_or(j, "dip_depth", cfg.dip_depth);
    cfg.blob_sigma_phi0 = number_or(j, "blob_sigma_phi0", cfg.blob_sigma_phi0);
    cfg.blob_depth = number_or(j, "blob_depth", cfg.blob_depth);
    cfg.stripe_width_phi0 = number_or(j, "stripe_width_phi0", cfg.stripe_width_phi0);
    cfg.stripe_depth = number_or(j, "stripe_depth", cfg.stripe_depth);
    cfg.noise_sigma = number_or(j, "noise_sigma", cfg.noise_sigma);
    cfg.hysteresis_offset_phi0 =
        number_or(j, "hysteresis_offset_phi0", cfg.hysteresis_offset_phi0);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

CalibrationConfig calibration_config_from_json(const Json& j) {
    CalibrationConfig cfg;
    if (!j.is_object()) return cfg;
    if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
    if (j.contains("trace_points")) cfg.trace_points = j.at("trace_points").get<int>();
    if (j.contains("map_points")) cfg.map_points = j.at("map_points").get<int>();
    if (j.contains("cut_points")) cfg.cut_points = j.at("cut_points").get<int>();
    cfg.initial_span_volts = number_or(j, "initial_span_volts", cfg.initial_span_volts);
    return cfg;
}

std::string calibration_residual_csv(const CrosstalkModel& truth,
                                     const CalibrationState& state) {
    std::ostringstream os;
    os << "iteration,measured_mean_pct,measured_max_pct,true_mean_pct,true_max_pct\n";
    for (std::size_t i = 0; i < state.history.size(); ++i) {
        const auto& it = state.history[i];
        const ResidualMetrics m = residual_metrics(truth, it.correction_after);
        os << (i + 1) << "," << format_double(it.measured_mean_offdiag_pct) << ","
           << format_double(it.measured_max_offdiag_pct) << ","
           << format_double(m.mean_offdiag_pct) << "," << format_double(m.max_offdiag_pct)
           << "\n";
    }
    return os.str();
}

Json correction_json(const CrosstalkModel& truth, const CalibrationState& state) {
    Json j;
    j["labels"] = truth.labels;
    j["correction_volts_per_phi0"] = matrix_to_json(state.correction);
    Json q = Json::array();
    for (Eigen::Index i = 0; i < state.offset_volts.size(); ++i) {
        q.push_back(state.offset_volts(i));
    }
    j["offset_volts"] = std::move(q);
    j["iterations"] = state.history.size();
    const ResidualMetrics m = residual_metrics(truth, state.correction);
    j["final_residuals"] =
        Json{{"true_mean_pct", m.mean_offdiag_pct}, {"true_max_pct", m.max_offdiag_pct}};
    return j;
}

CouplerTemplateConfig template_config_from_json(const Json& j) {
    CouplerTemplateConfig cfg;
    if (!j.is_object()) return cfg;
    auto triple = [&](const std::string& key, std::array<double, 3>& out) {
        if (!j.contains(key)) return;
        const auto& a = j.at(key);
        if (!a.is_array() || a.size() != 3) schema_error(key + " must have 3 entries");
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = a.at(static_cast<std::size_t>(i)).get<double>();
    };
    triple("qubit_gap_mhz", cfg.qubit_gap_mhz);
    triple("qubit_coupler_z_mhz", cfg.qubit_coupler_z_mhz);
    triple("qubit_coupler_exchange_mhz", cfg.qubit_coupler_exchange_mhz);
    triple("qubit_qubit_zz_mhz", cfg.qubit_qubit_zz_mhz);
    triple("qubit_qubit_xx_mhz", cfg.qubit_qubit_xx_mhz);
    cfg.anharmonicity_mhz = number_or(j, "anharmonicity_mhz", cfg.anharmonicity_mhz);
    cfg.coupler_asymmetry = number_or(j, "coupler_asymmetry", cfg.coupler_asymmetry);
    if (j.contains("qubit_levels")) cfg.qubit_levels = j.at("qubit_levels").get<int>();
    return cfg;
}

std::string gap_sweep_csv(const std::vector<GapSweepRow>& rows) {
    std::ostringstream os;
    os << "gap_mhz,omega1_mhz,omega2_mhz,omega3_mhz,j12_mhz,j13_mhz,j23_mhz,k123_mhz,"
          "min_overlap,flagged\n";
    for (const auto& row : rows) {
        os << format_double(row.gap_mhz);
        for (double v : row.params.to_vector()) os << "," << format_double(v);
        os << "," << format_double(row.min_overlap) << "," << (row.flagged ? 1 : 0) << "\n";
    }
    return os.str();
}

namespace {

Eigen::MatrixXcd complex_matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) schema_error(what + " must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
            if (cell.is_number()) {
                m(r, c) = cell.get<double>();
            } else if (cell.is_array() && cell.size() == 2) {
                m(r, c) = std::complex<double>(cell.at(0).get<double>(),
                                               cell.at(1).get<double>());
            } else {
                schema_error(what + " cells must be numbers or [re, im]");
            }
        }
    }
    return m;
}

}  // namespace

CompositeSystem composite_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("subsystems")) {
        schema_error("composite system needs 'subsystems'");
    }
    CompositeSystem sys;
    for (const auto& s : j.at("subsystems")) {
        if (s.contains("builder")) {
            const std::string b = s.at("builder").get<std::string>();
            SubsystemSpec spec;
            if (b == "flux_qubit") {
                spec = build_flux_qubit(number_or(s, "epsilon_mhz", 0.0),
                                        finite_number(s, "delta_mhz"));
            } else if (b == "qubit_mode") {
                spec = build_qubit_mode(finite_number(s, "gap_mhz"),
                                        number_or(s, "anharmonicity_mhz", 3000.0),
                                        s.contains("levels") ? s.at("levels").get<int>() : 3);
            } else if (b == "coupler") {
                spec = build_coupler(finite_number(s, "gap_mhz"),
                                     number_or(s, "asymmetry", 0.4));
            } else {
                schema_error("unknown builder '" + b + "'");
            }
            if (s.contains("name")) spec.name = s.at("name").get<std::string>();
            sys.subsystems.push_back(std::move(spec));
        } else {
            SubsystemSpec spec;
            spec.name = s.contains("name") ? s.at("name").get<std::string>() : "subsystem";
            if (!s.contains("h0")) schema_error("explicit subsystem needs 'h0'");
            spec.h0 = complex_matrix_from_json(s.at("h0"), "h0");
            if (s.contains("ops")) {
                for (const auto& [name, op] : s.at("ops").items()) {
                    spec.ops[name] = complex_matrix_from_json(op, "operator " + name);
                }
            }
            sys.subsystems.push_back(std::move(spec));
        }
    }
    if (j.contains("couplings")) {
        for (const auto& c : j.at("couplings")) {
            CouplingTerm term;
            term.strength_mhz = finite_number(c, "strength_mhz");
            if (!c.contains("factors")) schema_error("coupling needs 'factors'");
            for (const auto& f : c.at("factors")) {
                term.factors.emplace_back(f.at("subsystem").get<std::size_t>(),
                                          f.at("op").get<std::string>());
            }
            sys.couplings.push_back(std::move(term));
        }
    }
    sys.validate();
    return sys;
}

std::vector<DephasingPoint> dephasing_points_from_json(const Json& j) {
    const Json* points = &j;
    bool linear_units = false;
    if (j.is_object()) {
        if (!j.contains("points")) schema_error("flux-noise input needs 'points'");
        points = &j.at("points");
        if (j.contains("units")) {
            const std::string u = j.at("units").get<std::string>();
            if (u == "linear") {
                linear_units = true;
            } else if (u != "angular") {
                schema_error("units must be 'angular' (rad/s/Phi0) or 'linear' (Hz/Phi0)");
            }
        }
    }
    if (!points->is_array()) schema_error("flux-noise points must be an array");
    std::vector<DephasingPoint> out;
    for (const auto& p : *points) {
        double slope = finite_number(p, "flux_slope");
        if (linear_units) slope = angular_slope_from_linear(slope);
        out.push_back({slope, finite_number(p, "gamma_phi")});
    }
    return out;
}

Json flux_noise_fit_json(const FluxNoiseFit& fit) {
    return Json{{"sqrt_a_phi_phi0", fit.sqrt_a_phi},
                {"sqrt_a_phi_uphi0", 1e6 * fit.sqrt_a_phi},
                {"sigma_phi0", fit.sqrt_a_phi_sigma},
                {"slope", fit.slope},
                {"slope_sigma", fit.slope_sigma}};
}

DispersionInput dispersion_input_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("flux_phi0") || !j.contains("slope")) {
        schema_error("dispersion input needs 'flux_phi0' and 'slope' arrays");
    }
    DispersionInput in;
    in.flux_phi0 = j.at("flux_phi0").get<std::vector<double>>();
    in.slope = j.at("slope").get<std::vector<double>>();
    return in;
}

std::string dispersion_csv(const std::vector<double>& flux, const std::vector<double>& energy) {
    std::ostringstream os;
    os << "flux_phi0,energy\n";
    for (std::size_t i = 0; i < flux.size(); ++i) {
        os << format_double(flux[i]) << "," << format_double(energy[i]) << "\n";
    }
    return os.str();
}

Json csv_to_json_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) return Json::array();
    std::vector<std::string> headers;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) headers.push_back(cell);
    }
    Json rows = Json::array();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        Json row;
        std::size_t col = 0;
        while (std::getline(ls, cell, ',') && col < headers.size()) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                if (pos == cell.size()) {
                    row[headers[col]] = v;
                } else {
                    row[headers[col]] = cell;
                }
            } catch (const std::exception&) {
                row[headers[col]] = cell;
            }
            ++col;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace triham
