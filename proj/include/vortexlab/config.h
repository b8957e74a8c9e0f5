/// Flat `[section]` / `key = value` run configuration with a fixed schema:
/// unknown sections or keys are rejected, defaults are explicit in the
/// resolved echo, and the divisor is given as repeated `point` keys in the
/// divisor text format.

#pragma once

#include "vortexlab/higgs.h"

#include <string>

namespace vortexlab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Experiment {
    solve_vortex,
    solve_gravitating,
    solve_twisted,
    ray_slope,
    convexity_scan,
    epsilon_geodesic,
    stability,
    energy_report,
};

const char* experiment_name(Experiment e);

struct RunConfig {
    int genus = 1;
    double volume = 0.0;
    int resolution = 0;  // torus grid n
    int band_limit = 0;  // sphere band limit L
    double modulus_re = 0.0;
    double modulus_im = 1.0;
    Divisor divisor;
    double tau = 1.0;
    double alpha = 0.0;
    double lambda = 0.0;
    double epsilon = 0.05;
    Experiment experiment = Experiment::energy_report;
    std::string output = "out";
    unsigned long long seed = 0;

    std::shared_ptr<const Surface> build_surface() const;
};

RunConfig parse_run_config(const std::string& text);

// Every key with its final value, in schema order.
std::string resolved_config_text(const RunConfig& cfg);

std::string config_schema_text();

}  // namespace vortexlab
