#pragma once

#include "gdglmm/random.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gdglmm {

/// IG(a, b) on sigma^2, density proportional to (sigma^2)^{-(a+1)} exp(-b / sigma^2).
struct InverseGamma {
    double shape;
    double scale;
    friend bool operator==(const InverseGamma&, const InverseGamma&) = default;
};

/// Folded-t on sigma with scale s and nu degrees of freedom.
struct FoldedT {
    double scale;
    double dof;
    friend bool operator==(const FoldedT&, const FoldedT&) = default;
};

/// Folded-Cauchy on sigma, density proportional to (sigma^2 + s^2)^{-1}.
struct FoldedCauchy {
    double scale;
    friend bool operator==(const FoldedCauchy&, const FoldedCauchy&) = default;
};

/// Uniform(0, U) on sigma.
struct UniformSigma {
    double upper;
    friend bool operator==(const UniformSigma&, const UniformSigma&) = default;
};

using VarCompPrior = std::variant<InverseGamma, FoldedT, FoldedCauchy, UniformSigma>;

/// Inverse-Wishart(dof, scale) on an unstructured covariance matrix.
struct WishartPrior {
    double dof;
    Eigen::MatrixXd scale;
};

/// Throws Error{"priors", "malformed-prior"} when a hyperparameter is not
/// strictly positive (or the Wishart scale is not SPD / dof too small).
void check_prior(const VarCompPrior& prior);
void check_prior(const WishartPrior& prior);

std::string describe(const VarCompPrior& prior);
std::string describe(const WishartPrior& prior);

/// Log prior up to a constant. IG is a density on sigma^2; the others are
/// densities on sigma. Throws for sigma <= 0.
double log_prior(const VarCompPrior& prior, double sigma);

/// Log density of sigma itself (IG picks up the log(2 sigma) Jacobian).
double log_prior_on_sigma(const VarCompPrior& prior, double sigma);

/// Sufficient statistics a variance component sees from its effects:
/// an effective dimension and a quadratic form. For i.i.d. blocks that is
/// (k, |u|^2); for the intrinsic CAR block it is (rank L, u'Lu).
struct EffectSummary {
    double dimension = 0.0;
    double quadratic = 0.0;

    static EffectSummary iid(std::span<const double> u);
};

InverseGamma conjugate_posterior(const InverseGamma& prior, const EffectSummary& effects);

/// Draw sigma^2 from the conjugate IG full conditional.
double conjugate_sigma2_update(const InverseGamma& prior, const EffectSummary& effects,
                               RandomStream& rng);
double conjugate_sigma2_update(const InverseGamma& prior, std::span<const double> u,
                               RandomStream& rng);

/// Draw Sigma from inverse-Wishart(dof + m, scale + sum u_i u_i') using the
/// Bartlett construction on the inverted scale.
Eigen::MatrixXd invwishart_update(const WishartPrior& prior,
                                  const std::vector<Eigen::VectorXd>& effects, RandomStream& rng);

/// One slice move on log sigma targeting
///   log_prior_on_sigma(sigma) - k log sigma - Q / (2 sigma^2) + log sigma.
/// Returns the new sigma.
double slice_update_sigma(const VarCompPrior& prior, const EffectSummary& effects,
                          double sigma_current, RandomStream& rng, double width = 1.0);
double slice_update_sigma(const VarCompPrior& prior, std::span<const double> u,
                          double sigma_current, RandomStream& rng, double width = 1.0);

}  // namespace gdglmm
