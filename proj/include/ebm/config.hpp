#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ebm/basins.hpp"
#include "ebm/integrator.hpp"
#include "ebm/model.hpp"
#include "ebm/sensitivity.hpp"

namespace ebm {

/// A full scenario: model constants plus per-subcommand settings, parsed from
/// key = value text with one table per concern. Every ModelParams and
/// IntegrationOptions constraint is validated at parse time and unknown keys
/// are rejected.
struct ScenarioConfig {
    ModelParams params{};
    IntegrationOptions integrator{};

    State initial{150.0, 150.0};            // [simulate]

    SweepParam sweep_param = SweepParam::EpsilonA; // [sweep]
    double sweep_from = 0.3;
    double sweep_to = 1.9;
    int sweep_steps = 100;

    double jump_eps_star = 0.62;            // [jump]
    double jump_eps_plus = 0.70;

    std::vector<double> hysteresis_path{};  // [hysteresis]

    int basins_nx = 256;                    // [basins]
    int basins_ny = 256;
    double threshold_tol = 1e-6;
    int separatrix_points = 512;

    State blowup_initial{100.0, 100.0};     // [blowup]

    double convexity_tol = 1e-4;            // [convexity]
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);

} // namespace ebm
