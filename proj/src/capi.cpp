#include "triham/triham_c.h"

#include <cstring>
#include <string>

#include "triham/serialization.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs `fn`, mapping exceptions to status codes and stashing the message.
template <typename Fn>
triham_status guarded(Fn&& fn) {
    try {
        fn();
        return TRIHAM_OK;
    } catch (const triham::Error& e) {
        g_last_error = std::string(triham::error_kind_name(e.kind())) + ": " + e.what();
        return e.is_schema() ? TRIHAM_ERR_SCHEMA : TRIHAM_ERR_DOMAIN;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TRIHAM_ERR_SCHEMA;
    }
}

const char* require(const char* ptr, const char* what) {
    if (ptr == nullptr) {
        throw triham::Error(triham::ErrorKind::Schema, std::string(what) + " is null");
    }
    return ptr;
}

char** require_out(char** out) {
    if (out == nullptr) {
        throw triham::Error(triham::ErrorKind::Schema, "output pointer is null");
    }
    return out;
}

}  // namespace

extern "C" {

struct triham_device {
    triham::VirtualDevice device;
};

const char* triham_version(void) { return "0.1.0"; }

const char* triham_last_error(void) { return g_last_error.c_str(); }

void triham_string_free(char* s) { delete[] s; }

triham_status triham_estimate(const char* measurements_json, char** report_json_out) {
    return guarded([&] {
        const auto measurements = triham::measurements_from_json(
            triham::parse_json(require(measurements_json, "measurements_json")));
        std::vector<triham::TransitionId> used;
        for (const auto& m : measurements) used.push_back(m.transition);

        triham::Json report;
        if (measurements.size() == triham::kNumParams) {
            const auto result = triham::solve_exact(measurements);
            report = triham::estimation_to_json(result, used);
            std::vector<triham::TransitionId> held_out;
            for (const auto& t : triham::enumerate_transitions()) {
                bool present = false;
                for (const auto& u : used) present |= u == t;
                if (!present) held_out.push_back(t);
            }
            triham::Json predictions = triham::Json::array();
            for (const auto& p : triham::predict_remaining(result, held_out)) {
                predictions.push_back(triham::Json{{"transition", p.transition.label()},
                                                   {"value_mhz", p.value_mhz},
                                                   {"sigma_mhz", p.sigma_mhz}});
            }
            report["predicted_remaining"] = std::move(predictions);
        } else {
            report = triham::estimation_to_json(triham::solve_least_squares(measurements),
                                                used);
        }
        *require_out(report_json_out) = dup_string(report.dump(2));
    });
}

triham_status triham_subset_survey(char** table_csv_out, char** summary_json_out) {
    return guarded([&] {
        const auto survey = triham::subset_survey();
        int complete = 0;
        for (const auto& row : survey) complete += row.invertible;
        const triham::Json summary{{"subsets", survey.size()}, {"complete", complete}};
        *require_out(table_csv_out) = dup_string(triham::subset_survey_csv(survey));
        *require_out(summary_json_out) = dup_string(summary.dump(2));
    });
}

triham_status triham_selection_scan(const char* measurements_json, char** draws_csv_out,
                                    char** summary_json_out) {
    return guarded([&] {
        const auto measurements = triham::measurements_from_json(
            triham::parse_json(require(measurements_json, "measurements_json")));
        const auto scan = triham::selection_scan(measurements);
        *require_out(draws_csv_out) = dup_string(triham::selection_draws_csv(scan));
        *require_out(summary_json_out) =
            dup_string(triham::selection_summary_json(scan).dump(2));
    });
}

triham_status triham_simulate_ramsey(const char* config_json, char** trace_csv_out,
                                     char** metadata_json_out) {
    return guarded([&] {
        const auto cfg = triham::ramsey_sim_config_from_json(
            triham::parse_json(require(config_json, "config_json")));
        const auto trace = triham::simulate_ramsey_trace(
            cfg.truth, cfg.transition, cfg.drive_frequency_mhz, cfg.decoherence,
            cfg.noise_sigma, cfg.seed, cfg.delays_ns, cfg.shape);
        *require_out(trace_csv_out) = dup_string(triham::ramsey_trace_csv(trace));
        *require_out(metadata_json_out) =
            dup_string(triham::ramsey_metadata_json(trace.metadata).dump(2));
    });
}

triham_status triham_fit_ramsey(const char* trace_csv, const char* metadata_json,
                                char** fit_json_out) {
    return guarded([&] {
        triham::Json metadata = triham::Json::object();
        if (metadata_json != nullptr && metadata_json[0] != '\0') {
            metadata = triham::parse_json(metadata_json);
        }
        const auto trace =
            triham::ramsey_trace_from_csv(require(trace_csv, "trace_csv"), metadata);
        const auto fit = triham::fit_ramsey(trace);
        triham::Json out = triham::ramsey_fit_json(fit);
        if (metadata.contains("drive_frequency_mhz")) {
            triham::DriveSide side = triham::DriveSide::Above;
            if (metadata.contains("side")) {
                const std::string s = metadata.at("side").get<std::string>();
                if (s == "below") {
                    side = triham::DriveSide::Below;
                } else if (s != "above") {
                    throw triham::Error(triham::ErrorKind::Schema,
                                        "side must be 'above' or 'below'");
                }
            }
            const auto est = triham::transition_from_fit(
                metadata.at("drive_frequency_mhz").get<double>(), fit, side);
            out["transition_frequency_mhz"] = est.frequency_mhz;
            out["transition_sigma_mhz"] = est.sigma_mhz;
        }
        *require_out(fit_json_out) = dup_string(out.dump(2));
    });
}

triham_status triham_end_to_end(const char* config_json, char** report_json_out) {
    return guarded([&] {
        const auto cfg = triham::end_to_end_config_from_json(
            triham::parse_json(require(config_json, "config_json")));
        const auto report = triham::run_end_to_end(cfg);
        *require_out(report_json_out) =
            dup_string(triham::end_to_end_report_json(report).dump(2));
    });
}

triham_status triham_fit_flux_noise(const char* points_json, char** fit_json_out) {
    return guarded([&] {
        const auto points = triham::dephasing_points_from_json(
            triham::parse_json(require(points_json, "points_json")));
        const auto fit = triham::fit_flux_noise(points);
        *require_out(fit_json_out) = dup_string(triham::flux_noise_fit_json(fit).dump(2));
    });
}

triham_status triham_reconstruct_dispersion(const char* input_json, char** curve_csv_out) {
    return guarded([&] {
        const auto input = triham::dispersion_input_from_json(
            triham::parse_json(require(input_json, "input_json")));
        const auto curve = triham::reconstruct_dispersion(input.flux_phi0, input.slope);
        *require_out(curve_csv_out) =
            dup_string(triham::dispersion_csv(input.flux_phi0, curve));
    });
}

triham_status triham_coupling_sweep(const char* config_json, char** table_csv_out) {
    return guarded([&] {
        triham::Json cfg = triham::Json::object();
        if (config_json != nullptr && config_json[0] != '\0') {
            cfg = triham::parse_json(config_json);
        }
        triham::CouplerTemplateConfig template_cfg;
        if (cfg.contains("template")) {
            template_cfg = triham::template_config_from_json(cfg.at("template"));
        }
        std::vector<double> gaps = {50000.0, 30000.0, 20000.0, 15000.0, 12000.0,
                                    10000.0, 9500.0,  9000.0,  8500.0,  8000.0};
        if (cfg.contains("gaps_mhz")) {
            gaps = cfg.at("gaps_mhz").get<std::vector<double>>();
        }
        double threshold = 0.5;
        if (cfg.contains("overlap_threshold")) {
            threshold = cfg.at("overlap_threshold").get<double>();
        }
        const auto rows = triham::coupler_gap_sweep(template_cfg, gaps, threshold);
        *require_out(table_csv_out) = dup_string(triham::gap_sweep_csv(rows));
    });
}

triham_status triham_device_create(const char* device_json, triham_device** device_out) {
    return guarded([&] {
        const auto cfg = triham::device_config_from_json(
            triham::parse_json(require(device_json, "device_json")));
        if (device_out == nullptr) {
            throw triham::Error(triham::ErrorKind::Schema, "device_out is null");
        }
        *device_out = new triham_device{triham::VirtualDevice(cfg)};
    });
}

void triham_device_destroy(triham_device* device) { delete device; }

triham_status triham_device_calibrate(triham_device* device, const char* config_json,
                                      char** residual_csv_out, char** correction_json_out) {
    return guarded([&] {
        if (device == nullptr) {
            throw triham::Error(triham::ErrorKind::Schema, "device is null");
        }
        triham::Json cfg = triham::Json::object();
        if (config_json != nullptr && config_json[0] != '\0') {
            cfg = triham::parse_json(config_json);
        }
        const auto calibration_cfg = triham::calibration_config_from_json(cfg);
        const auto state = triham::calibrate(device->device, calibration_cfg);
        const auto& truth = device->device.config().truth;
        *require_out(residual_csv_out) =
            dup_string(triham::calibration_residual_csv(truth, state));
        *require_out(correction_json_out) =
            dup_string(triham::correction_json(truth, state).dump(2));
    });
}

}  // extern "C"
