#pragma once

#include "gdglmm/design.hpp"
#include "gdglmm/model_spec.hpp"
#include "gdglmm/priors.hpp"
#include "gdglmm/random.hpp"
#include "gdglmm/slice.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gdglmm {

/// Hierarchical centering of the group block: gamma_i = b^R + u^R_i. In the
/// working parameterization the u^R positions of nu hold gamma and the b^R
/// columns drop out of the linear predictor.
struct Centering {
    bool available = false;
    std::string reason;  // why centering is unavailable

    /// Uncentered nu -> working nu (gamma replaces u^R).
    Eigen::VectorXd to_centered(const DesignBlocks& blocks, const Eigen::VectorXd& nu) const;
    /// Working nu -> uncentered nu (u^R = gamma - b^R).
    Eigen::VectorXd to_uncentered(const DesignBlocks& blocks, const Eigen::VectorXd& gamma) const;
};

/// Checks Z^R (1_m (x) I_q) reproduces X^R, i.e. X^R lies in span(Z^R).
Centering hierarchical_center(const DesignBlocks& blocks);

/// Prior resolved for one variance slot.
struct SlotPrior {
    GroupPrior prior;
    std::optional<double> held;  // sigma^2 (times identity for matrix slots)
};

/// Design plus resolved priors; immutable and shared by every chain.
struct CompiledModel {
    std::shared_ptr<const DesignBlocks> blocks;
    std::vector<SlotPrior> slot_priors;
    double fixed_variance = 1e8;
    bool centered = false;
    Centering centering;
    /// Columns entering eta in the working parameterization (b^R columns are
    /// empty when centered).
    std::vector<SparseColumn> working_columns;
    std::vector<std::string> parameter_names;  // coefficients then variance columns
};

/// Validate, assemble and resolve priors. Throws with the first violation.
CompiledModel compile(const ModelSpec& spec, const Dataset& data,
                      const Dataset* centroids = nullptr);
CompiledModel compile(const ModelSpec& spec, std::shared_ptr<const DesignBlocks> blocks);

struct ChainState {
    Eigen::VectorXd nu;  // working parameterization
    Eigen::MatrixXd group_cov;           // Sigma^R (q x q), empty without a group term
    std::vector<double> slot_variance;   // sigma^2 per slot (group slot mirrors (0,0) when q = 1)
    LinearPredictor eta;
    long iteration = 0;
    RandomStream rng;

    ChainState(std::uint64_t seed, std::uint64_t stream) : rng(seed, stream) {}
};

/// Overdispersed start: coefficients N(0, 4) scaled by column sup-norm, variances from {0.1, 1, 10}
/// rotated by chain index.
ChainState initial_state(const CompiledModel& model, std::uint64_t seed, int chain);

/// One Gibbs sweep: every coefficient by a slice move on its full
/// conditional, then every variance slot, then CAR sum-to-zero recentering.
void gibbs_sweep(ChainState& state, const CompiledModel& model, double width = 1.0);

/// Current state in the reported (uncentered) parameterization.
Eigen::VectorXd reported_row(const ChainState& state, const CompiledModel& model);

struct ChainOutput {
    int chain = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> names;
    Eigen::MatrixXd draws;  // kept x parameters
    double seconds = 0.0;
};

ChainOutput run_chain(const CompiledModel& model, const SamplerConfig& config, int chain);

/// Runs config.chains chains on at most `threads` threads (0 = hardware
/// concurrency). Output is ordered by chain index and does not depend on
/// `threads`.
std::vector<ChainOutput> run_chains(const CompiledModel& model, const SamplerConfig& config,
                                    int threads = 0);

}  // namespace gdglmm
