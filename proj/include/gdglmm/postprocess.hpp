#pragma once

#include "gdglmm/diagnostics.hpp"
#include "gdglmm/model_spec.hpp"
#include "gdglmm/sampler.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gdglmm {

struct FitResult {
    ModelSpec spec;
    CompiledModel model;
    ChainStore store;

    const DesignBlocks& blocks() const { return *model.blocks; }
};

/// compile + run_chains. `sampler` replaces spec.sampler when given.
FitResult fit(const ModelSpec& spec, const Dataset& data, const Dataset* centroids = nullptr,
              std::optional<SamplerConfig> sampler = std::nullopt, int threads = 0);

enum class CurveScale { link, response };

struct CurveOptions {
    int grid_size = 101;
    CurveScale scale = CurveScale::link;
    /// Add a fresh group effect drawn from N(0, Sigma^R) to every draw
    /// (a new-group curve) instead of the population curve.
    bool include_group_effect = false;
    std::uint64_t seed = 1;
    bool keep_draws = false;
};

struct CurveSummary {
    std::string term;
    CurveScale scale = CurveScale::link;
    std::vector<std::vector<double>> grid;  // original scale; one or two coordinates per point
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
    Eigen::MatrixXd draws;  // draws x grid points, only with keep_draws
};

/// Pointwise posterior of eta(x) (or b'(eta(x))) along the term's covariate,
/// other covariates at their averages and random effects at zero.
CurveSummary curve_posterior(const FitResult& fit, const std::string& term,
                             const CurveOptions& options = {});

struct RegionSummary {
    std::string region;
    double expected;
    Summary sir;
};

/// Per-region posterior of 100 mu_i / E_i for poisson-log fits with an offset
/// and a CAR term.
std::vector<RegionSummary> sir_hat(const FitResult& fit);

/// Linear predictor draws (draws x n, offset included) pooled over chains.
Eigen::MatrixXd linear_predictor_draws(const FitResult& fit);

struct LabeledPrior {
    std::string label;
    VarCompPrior prior;
};

/// IG(0.01, 0.01), folded-Cauchy s = 25, folded-Cauchy s = 12, Uniform(0, 100).
std::vector<LabeledPrior> default_roster();

struct SensitivityRow {
    std::string parameter;
    std::string prior;
    double pct_delta_mean;
    double pct_delta_width;
};

struct SensitivityTable {
    std::string baseline;
    std::vector<std::string> comparisons;
    std::vector<SensitivityRow> rows;
    std::vector<std::string> failures;  // "label: message" per aborted fit
};

/// Spec with every scalar variance-component prior replaced by `prior`.
ModelSpec with_prior(const ModelSpec& spec, const VarCompPrior& prior);

/// Fits once per roster entry; reports each fixed effect's percent change in
/// posterior mean and 95% interval width against the first entry.
SensitivityTable sensitivity_run(const ModelSpec& spec, const Dataset& data,
                                 const Dataset* centroids,
                                 const std::vector<LabeledPrior>& roster,
                                 std::optional<SamplerConfig> sampler = std::nullopt,
                                 int threads = 0);

}  // namespace gdglmm
