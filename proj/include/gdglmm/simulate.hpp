#pragma once

#include "gdglmm/dataset.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gdglmm {

enum class Scenario { respiratory, caregiver, cancer_sir };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario scenario);

/// Size knobs. Zero means the scenario default (275 children, 483 families,
/// 45 regions).
struct SimulationSize {
    int groups = 0;
    int max_visits = 0;
    double amplitude = 0.0;  // amplitude of the sinusoidal f on the link scale
};

struct SimulatedStudy {
    Scenario scenario;
    Dataset data;
    std::string spec_text;                 // a ready-to-fit spec for the data
    std::map<std::string, double> truth;   // generating parameters, original covariate scale
    std::string smooth_covariate;
    /// True population linear predictor (other covariates at their sample
    /// averages, random effects zero) on a 101-point grid of the covariate.
    std::vector<double> curve_grid;
    std::vector<double> curve_truth;
    std::vector<double> f_truth;
};

SimulatedStudy simulate(Scenario scenario, std::uint64_t seed, const SimulationSize& size = {});

std::string to_csv(const Dataset& data);

}  // namespace gdglmm
