#include "triham/triham_c.h"

#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

// The published seven transition frequencies.
const char* kTableMeasurements = R"([
  {"lower": "000", "upper": "001", "value_mhz": 2587.74, "sigma_mhz": 0.040},
  {"lower": "000", "upper": "010", "value_mhz": 4621.94, "sigma_mhz": 0.040},
  {"lower": "000", "upper": "100", "value_mhz": 5425.18, "sigma_mhz": 0.040},
  {"lower": "001", "upper": "011", "value_mhz": 5180.69, "sigma_mhz": 0.020},
  {"lower": "100", "upper": "101", "value_mhz": 2594.36, "sigma_mhz": 0.040},
  {"lower": "100", "upper": "110", "value_mhz": 4577.70, "sigma_mhz": 0.020},
  {"lower": "110", "upper": "111", "value_mhz": 3189.18, "sigma_mhz": 0.030}
])";

struct Owned {
    char* ptr = nullptr;
    ~Owned() { triham_string_free(ptr); }
};

}  // namespace

TEST_CASE("capi: estimate the published set") {
    Owned report;
    REQUIRE(triham_estimate(kTableMeasurements, &report.ptr) == TRIHAM_OK);
    const json j = json::parse(report.ptr);
    CHECK(j.at("method") == "exact-7");
    CHECK(j.at("params").at("omega1").get<double>() == doctest::Approx(5415.3875).epsilon(1e-9));
    CHECK(j.at("params").at("k123").get<double>() == doctest::Approx(-4.50875).epsilon(1e-9));
    // Held-out predictions ride along for exact-7 inputs.
    REQUIRE(j.contains("predicted_remaining"));
    CHECK(j.at("predicted_remaining").size() == 5);
    bool found = false;
    for (const auto& p : j.at("predicted_remaining")) {
        if (p.at("transition") == "010-011") {
            CHECK(p.at("value_mhz").get<double>() == doctest::Approx(3146.49).epsilon(1e-9));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("capi: error codes distinguish schema from domain failures") {
    Owned out;
    CHECK(triham_estimate("{not json", &out.ptr) == TRIHAM_ERR_SCHEMA);
    CHECK(std::string(triham_last_error()).find("JSON") != std::string::npos);

    // Six transitions: schema is fine, the design matrix is incomplete.
    json six = json::parse(kTableMeasurements);
    six.erase(6);
    CHECK(triham_estimate(six.dump().c_str(), &out.ptr) == TRIHAM_ERR_DOMAIN);
    CHECK(std::string(triham_last_error()).find("SingularDesign") != std::string::npos);

    CHECK(triham_estimate(nullptr, &out.ptr) == TRIHAM_ERR_SCHEMA);
}

TEST_CASE("capi: subset survey counts") {
    Owned table, summary;
    REQUIRE(triham_subset_survey(&table.ptr, &summary.ptr) == TRIHAM_OK);
    const json j = json::parse(summary.ptr);
    CHECK(j.at("subsets").get<int>() == 792);
    CHECK(j.at("complete").get<int>() == 384);
    CHECK(std::string(table.ptr).find("subset,transitions") == 0);
}

TEST_CASE("capi: simulate then fit a Ramsey trace") {
    const json config = {
        {"truth",
         {{"omega1", 5415.3875},
          {"omega2", 4888.2125},
          {"omega3", 2879.4425},
          {"j12", -6.55125},
          {"j13", 6.16375},
          {"j23", 144.19625},
          {"k123", -4.50875}}},
        {"transition", "000-001"},
        {"detuning_mhz", 17.0},
        {"noise_sigma", 0.03},
        {"seed", 7},
        {"delay_count", 220}};
    Owned trace, metadata;
    REQUIRE(triham_simulate_ramsey(config.dump().c_str(), &trace.ptr, &metadata.ptr) ==
            TRIHAM_OK);
    const json meta = json::parse(metadata.ptr);
    CHECK(meta.at("seed").get<int>() == 7);

    Owned fit;
    REQUIRE(triham_fit_ramsey(trace.ptr, metadata.ptr, &fit.ptr) == TRIHAM_OK);
    const json f = json::parse(fit.ptr);
    CHECK(f.at("converged").get<bool>());
    CHECK(f.at("params").at("detuning_mhz").get<double>() == doctest::Approx(17.0).epsilon(5e-3));
    // Drive frequency in the metadata turns the fit into a transition estimate.
    CHECK(f.at("transition_frequency_mhz").get<double>() ==
          doctest::Approx(2587.74).epsilon(1e-4));
}

TEST_CASE("capi: device lifecycle and calibration") {
    const json device = {
        {"labels", {"QB1", "QB2", "QB3", "C1", "C2"}},
        {"c_phi0_per_volt",
         {{1.00, 0.05, 0.00, 0.02, 0.00},
          {0.03, 0.95, 0.04, 0.00, 0.01},
          {0.00, 0.02, 1.10, 0.03, 0.00},
          {0.02, 0.00, 0.01, 0.90, 0.05},
          {0.01, 0.03, 0.00, 0.04, 1.05}}},
        {"f0_phi0", {0.1, 0.2, 0.3, 0.4, 0.5}},
        {"noise_sigma", 0.003},
        {"seed", 3}};
    triham_device* dev = nullptr;
    REQUIRE(triham_device_create(device.dump().c_str(), &dev) == TRIHAM_OK);
    REQUIRE(dev != nullptr);
    Owned residuals, correction;
    REQUIRE(triham_device_calibrate(dev, R"({"iterations": 3})", &residuals.ptr,
                                    &correction.ptr) == TRIHAM_OK);
    triham_device_destroy(dev);

    const json c = json::parse(correction.ptr);
    CHECK(c.at("iterations").get<int>() == 3);
    CHECK(c.at("final_residuals").at("true_mean_pct").get<double>() < 0.5);
    const std::string csv(residuals.ptr);
    CHECK(csv.find("iteration,measured_mean_pct") == 0);

    // Singular device model: schema-level rejection.
    json bad = device;
    bad["c_phi0_per_volt"][0] = {0.0, 0.0, 0.0, 0.0, 0.0};
    triham_device* bad_dev = nullptr;
    CHECK(triham_device_create(bad.dump().c_str(), &bad_dev) == TRIHAM_ERR_DOMAIN);
}

TEST_CASE("capi: flux noise and dispersion") {
    json points = json::array();
    const double sqrt_a = 27.2e-6;
    for (int i = 1; i <= 6; ++i) {
        const double slope = 1e6 * i;
        points.push_back({{"flux_slope", slope},
                          {"gamma_phi", sqrt_a * std::sqrt(std::log(2.0)) * slope}});
    }
    Owned fit;
    REQUIRE(triham_fit_flux_noise(json{{"points", points}}.dump().c_str(), &fit.ptr) ==
            TRIHAM_OK);
    const json f = json::parse(fit.ptr);
    CHECK(f.at("sqrt_a_phi_uphi0").get<double>() == doctest::Approx(27.2).epsilon(1e-9));

    const json input = {{"flux_phi0", {0.0, 0.1, 0.2, 0.3}}, {"slope", {2.0, 2.0, 2.0, 2.0}}};
    Owned curve;
    REQUIRE(triham_reconstruct_dispersion(input.dump().c_str(), &curve.ptr) == TRIHAM_OK);
    CHECK(std::string(curve.ptr).find("flux_phi0,energy") == 0);

    Owned bad;
    CHECK(triham_fit_flux_noise(R"({"points": [{"flux_slope": 1e6, "gamma_phi": 1.0},
                                               {"flux_slope": 1e6, "gamma_phi": 2.0}]})",
                                &bad.ptr) == TRIHAM_ERR_DOMAIN);
}

TEST_CASE("capi: coupling sweep emits the table") {
    Owned table;
    REQUIRE(triham_coupling_sweep(R"({"gaps_mhz": [50000.0, 9000.0]})", &table.ptr) ==
            TRIHAM_OK);
    const std::string csv(table.ptr);
    CHECK(csv.find("gap_mhz,omega1_mhz") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("capi: end-to-end protocol on a noiseless truth") {
    const json config = {{"truth",
                          {{"omega1", 5415.3875},
                           {"omega2", 4888.2125},
                           {"omega3", 2879.4425},
                           {"j12", -6.55125},
                           {"j13", 6.16375},
                           {"j23", 144.19625},
                           {"k123", -4.50875}}},
                         {"noise_sigma", 0.0},
                         {"decoherence", "device"},
                         {"seed", 1}};
    Owned report;
    REQUIRE(triham_end_to_end(config.dump().c_str(), &report.ptr) == TRIHAM_OK);
    const json j = json::parse(report.ptr);
    CHECK(j.at("seed").get<int>() == 1);
    CHECK(j.at("transitions").size() == 12);
    for (const char* name : {"omega1", "omega2", "omega3", "j12", "j13", "j23", "k123"}) {
        CHECK(std::abs(j.at("truth_delta_mhz").at(name).get<double>()) < 1e-6);
    }
}

TEST_CASE("capi: version string") {
    CHECK(std::string(triham_version()).find('.') != std::string::npos);
}
