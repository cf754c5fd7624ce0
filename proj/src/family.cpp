#include "gdglmm/family.hpp"

#include "gdglmm/error.hpp"

#include <cmath>
#include <limits>

namespace gdglmm {

namespace {
constexpr double kOverflowGuard = 30.0;
}

std::string_view family_name(Family family) {
    switch (family) {
        case Family::bernoulli_logit: return "bernoulli-logit";
        case Family::poisson_log: return "poisson-log";
        case Family::gaussian_identity: return "gaussian-identity";
    }
    return "unknown";
}

Family parse_family(std::string_view text) {
    if (text == "bernoulli-logit") return Family::bernoulli_logit;
    if (text == "poisson-log") return Family::poisson_log;
    if (text == "gaussian-identity") return Family::gaussian_identity;
    throw Error("spec", "unknown-family", "unknown family '" + std::string(text) + "'");
}

double cumulant(Family family, double x) {
    switch (family) {
        case Family::bernoulli_logit:
            if (x > kOverflowGuard) return x + std::log1p(std::exp(-x));
            return std::log1p(std::exp(x));
        case Family::poisson_log: return std::exp(x);
        case Family::gaussian_identity: return 0.5 * x * x;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double mean_function(Family family, double x) {
    switch (family) {
        case Family::bernoulli_logit:
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            return std::exp(x) / (1.0 + std::exp(x));
        case Family::poisson_log: return std::exp(x);
        case Family::gaussian_identity: return x;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double variance_function(Family family, double x) {
    switch (family) {
        case Family::bernoulli_logit: {
            const double p = mean_function(family, x);
            return p * (1.0 - p);
        }
        case Family::poisson_log: return std::exp(x);
        case Family::gaussian_identity: return 1.0;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double log_base_measure(Family family, double y) {
    switch (family) {
        case Family::bernoulli_logit: return 0.0;
        case Family::poisson_log: return -std::lgamma(y + 1.0);
        case Family::gaussian_identity: return -0.5 * y * y - 0.5 * std::log(2.0 * M_PI);
    }
    return 0.0;
}

double log_joint(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& design,
                 const Eigen::VectorXd& nu,
                 const std::function<double(const Eigen::VectorXd&)>& half_quadratic,
                 const Eigen::VectorXd& offset) {
    if (design.rows() != y.size() || design.cols() != nu.size() || offset.size() != y.size()) {
        throw Error("family", "dimension-mismatch", "log_joint: dimensions of y, C, nu and offset disagree");
    }
    const Eigen::VectorXd eta = design * nu + offset;
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) total += y[i] * eta[i] - cumulant(family, eta[i]);
    total -= half_quadratic(nu);
    if (!std::isfinite(total)) throw Error("family", "non-finite", "log_joint evaluated to a non-finite value");
    return total;
}

LinearPredictor::LinearPredictor(std::span<const SparseColumn> columns, const Eigen::VectorXd& offset,
                                 const Eigen::VectorXd& nu) {
    resync(columns, offset, nu);
}

void LinearPredictor::shift(const SparseColumn& column, double delta) {
    if (delta == 0.0) return;
    const std::size_t nnz = column.rows.size();
    for (std::size_t j = 0; j < nnz; ++j) eta_[column.rows[j]] += column.values[j] * delta;
}

double LinearPredictor::resync(std::span<const SparseColumn> columns, const Eigen::VectorXd& offset,
                               const Eigen::VectorXd& nu) {
    Eigen::VectorXd fresh = offset;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const double v = nu[static_cast<Eigen::Index>(k)];
        if (v == 0.0) continue;
        const auto& col = columns[k];
        for (std::size_t j = 0; j < col.rows.size(); ++j) fresh[col.rows[j]] += col.values[j] * v;
    }
    const double drift = eta_.size() == fresh.size() ? (eta_ - fresh).cwiseAbs().maxCoeff() : 0.0;
    eta_ = std::move(fresh);
    return drift;
}

CoordinateConditional::CoordinateConditional(Family family, const SparseColumn& column,
                                             std::span<const double> y, const Eigen::VectorXd& eta,
                                             double current, double prior_precision, double prior_mean)
    : family_(family), column_(&column), precision_(prior_precision), mean_(prior_mean) {
    const std::size_t nnz = column.rows.size();
    rest_.resize(nnz);
    for (std::size_t j = 0; j < nnz; ++j) {
        const int r = column.rows[j];
        rest_[j] = eta[r] - column.values[j] * current;
        cty_ += column.values[j] * y[r];
    }
}

double CoordinateConditional::operator()(double value) const {
    const std::size_t nnz = rest_.size();
    const double* c = column_->values.data();
    double sum_b = 0.0;
    switch (family_) {
        case Family::bernoulli_logit:
            for (std::size_t j = 0; j < nnz; ++j) {
                const double x = rest_[j] + c[j] * value;
                sum_b += x > kOverflowGuard ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
            }
            break;
        case Family::poisson_log:
            for (std::size_t j = 0; j < nnz; ++j) sum_b += std::exp(rest_[j] + c[j] * value);
            break;
        case Family::gaussian_identity:
            for (std::size_t j = 0; j < nnz; ++j) {
                const double x = rest_[j] + c[j] * value;
                sum_b += 0.5 * x * x;
            }
            break;
    }
    const double d = value - mean_;
    return cty_ * value - sum_b - 0.5 * precision_ * d * d;
}

}  // namespace gdglmm
