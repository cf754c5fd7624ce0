#pragma once

// Brute-force references for tests. Nothing here calls into the sampler's
// numerical kernels; matrices are copied out of Eigen and handled with
// plain loops.

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace gdglmm::oracle {

struct Axis {
    double lower;
    double upper;
    int points;
};

struct GridPosterior {
    std::vector<Axis> axes;
    std::vector<double> log_density;  // row-major over the axes, unnormalized
    double log_max = 0.0;
    double normalizer = 0.0;          // trapezoid integral of exp(log_density - log_max)
    std::vector<double> means;
};

/// Trapezoid-rule normalization and marginal means on a tensor grid of at
/// most 4 axes and 400 points per axis.
GridPosterior grid_posterior(const std::function<double(std::span<const double>)>& log_density,
                             const std::vector<Axis>& axes);

struct GaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// mean (C'C + V^{-1})^{-1} C'y, covariance (C'C + V^{-1})^{-1}.
GaussianPosterior gaussian_closed_form(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& prior_covariance);

/// Central differences with h = step * max(1, |x|).
double fd_derivative(const std::function<double(double)>& f, double x, int order,
                     double step = 1e-5);

}  // namespace gdglmm::oracle
