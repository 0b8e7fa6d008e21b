/*
 * C ABI for the three-qubit Hamiltonian estimation toolkit.
 *
 * Conventions:
 *  - Structured inputs and outputs are JSON strings; tabular outputs are CSV
 *    strings. Frequencies are MHz unless a field name says otherwise.
 *  - Every char** output receives a heap string owned by the caller; release
 *    it with triham_string_free. Outputs are written only on TRIHAM_OK.
 *  - On failure the return value distinguishes malformed input
 *    (TRIHAM_ERR_SCHEMA) from domain failures such as a singular design
 *    matrix or degenerate data (TRIHAM_ERR_DOMAIN); triham_last_error()
 *    returns a thread-local description.
 */
#ifndef TRIHAM_C_H
#define TRIHAM_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t triham_status;

enum {
    TRIHAM_OK = 0,
    TRIHAM_ERR_SCHEMA = 1,
    TRIHAM_ERR_DOMAIN = 2
};

const char* triham_version(void);

/* Thread-local message for the most recent failure in this thread. */
const char* triham_last_error(void);

void triham_string_free(char* s);

/*
 * Inverts measured transition frequencies to Hamiltonian parameters.
 * Input: JSON array of {lower, upper, value_mhz, sigma_mhz}. Exactly 7
 * measurements use the exact solve (and the report includes predictions for
 * the held-out transitions); more use weighted least squares.
 */
triham_status triham_estimate(const char* measurements_json, char** report_json_out);

/* All 792 seven-transition subsets with both completeness criteria. */
triham_status triham_subset_survey(char** table_csv_out, char** summary_json_out);

/*
 * Selection-error scan over all complete subsets of a 12-transition
 * measurement set: per-subset parameter draws (CSV) plus the per-parameter
 * spread (JSON).
 */
triham_status triham_selection_scan(const char* measurements_json, char** draws_csv_out,
                                    char** summary_json_out);

/*
 * Synthesizes one Ramsey trace. Config JSON: {truth, transition,
 * detuning_mhz | drive_frequency_mhz, delay_start_ns, delay_step_ns,
 * delay_count, noise_sigma, seed, decoherence, shape}.
 */
triham_status triham_simulate_ramsey(const char* config_json, char** trace_csv_out,
                                     char** metadata_json_out);

/*
 * Fits the Ramsey fringe model to a trace CSV (delay_ns, signal). The
 * metadata JSON may carry drive_frequency_mhz and side ("above"/"below",
 * default above) to report the transition frequency.
 */
triham_status triham_fit_ramsey(const char* trace_csv, const char* metadata_json,
                                char** fit_json_out);

/*
 * Full protocol on a ground truth: simulate all 12 detuned Ramsey traces,
 * fit each fringe, estimate the parameters, and compare with the truth.
 */
triham_status triham_end_to_end(const char* config_json, char** report_json_out);

/* Zero-intercept dephasing-vs-slope regression for the flux-noise amplitude. */
triham_status triham_fit_flux_noise(const char* points_json, char** fit_json_out);

/* Cumulative integral of slope samples; CSV (flux_phi0, energy). */
triham_status triham_reconstruct_dispersion(const char* input_json, char** curve_csv_out);

/*
 * Effective (omega, J, K) extraction across coupler gaps for the multimode
 * template. Config JSON (all optional): {template: {...}, gaps_mhz: [...],
 * overlap_threshold}.
 */
triham_status triham_coupling_sweep(const char* config_json, char** table_csv_out);

/*
 * Virtual flux-tunable device. Created from a device JSON holding the
 * ground-truth crosstalk model (c_phi0_per_volt, f0_phi0, labels) plus
 * noise/feature settings. A device is stateful (its measurement counter
 * seeds the noise streams); use one device per calibration run.
 */
typedef struct triham_device triham_device;

triham_status triham_device_create(const char* device_json, triham_device** device_out);
void triham_device_destroy(triham_device* device);

/*
 * Runs the iterative crosstalk calibration against the device. Outputs a
 * per-iteration residual CSV (measured proxies plus ground-truth residuals)
 * and the final correction matrix JSON.
 */
triham_status triham_device_calibrate(triham_device* device, const char* config_json,
                                      char** residual_csv_out, char** correction_json_out);

#ifdef __cplusplus
}
#endif

#endif /* TRIHAM_C_H */
