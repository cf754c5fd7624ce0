#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gdglmm {

/// Canonical one-parameter exponential families with canonical link.
enum class Family { bernoulli_logit, poisson_log, gaussian_identity };

std::string_view family_name(Family family);
Family parse_family(std::string_view text);  // throws Error{"spec", "unknown-family"}

/// Cumulant b(x). Logistic is evaluated overflow-safely for |x| > 30.
double cumulant(Family family, double x);
/// b'(x), the inverse canonical link.
double mean_function(Family family, double x);
/// b''(x), the variance function.
double variance_function(Family family, double x);
/// c(y). Unused by the sampler; kept so the log-likelihood is complete.
double log_base_measure(Family family, double y);

/// y'eta - 1'b(eta) - 0.5 nu' V^{-1} nu with eta = C nu + offset.
/// `half_quadratic` returns 0.5 nu' V^{-1} nu.
double log_joint(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                 const Eigen::VectorXd& nu,
                 const std::function<double(const Eigen::VectorXd&)>& half_quadratic,
                 const Eigen::VectorXd& offset);

/// One column of C = [X Z], stored by its nonzero rows.
struct SparseColumn {
    std::vector<int> rows;
    std::vector<double> values;

    std::size_t nonzeros() const { return rows.size(); }
};

/// Cached linear predictor eta = C nu + offset, maintained incrementally as
/// single coefficients change.
class LinearPredictor {
public:
    LinearPredictor() = default;
    LinearPredictor(std::span<const SparseColumn> columns, const Eigen::VectorXd& offset,
                    const Eigen::VectorXd& nu);

    const Eigen::VectorXd& values() const { return eta_; }

    /// eta += column * delta
    void shift(const SparseColumn& column, double delta);
    /// Full recomputation; returns the max abs change it corrected.
    double resync(std::span<const SparseColumn> columns, const Eigen::VectorXd& offset,
                  const Eigen::VectorXd& nu);

private:
    Eigen::VectorXd eta_;
};

/// Full conditional of one coefficient with every other coefficient held:
///   (C'y)_k v - 1'b(c_k v + rest) - 0.5 p (v - m)^2
/// where rest = eta - c_k nu_k, p is the prior precision and m the prior
/// conditional mean. Only rows where c_k is nonzero enter.
class CoordinateConditional {
public:
    CoordinateConditional(Family family, const SparseColumn& column, std::span<const double> y,
                          const Eigen::VectorXd& eta, double current, double prior_precision,
                          double prior_mean);

    double operator()(double value) const;

private:
    Family family_;
    const SparseColumn* column_;
    std::vector<double> rest_;
    double cty_ = 0.0;
    double precision_;
    double mean_;
};

}  // namespace gdglmm
