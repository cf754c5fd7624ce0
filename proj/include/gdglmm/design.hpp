#pragma once

#include "gdglmm/family.hpp"
#include "gdglmm/model_spec.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gdglmm {

using Point2 = std::array<double, 2>;

// ---------------------------------------------------------------------------
// Knots and basis functions

struct KnotSet {
    std::vector<double> values;  // strictly increasing
    std::size_t size() const { return values.size(); }
};

/// Default knot count: min(floor(unique / 4), 35).
int default_knot_count(std::size_t unique_values);

/// kappa_k = ((k + 1) / (K + 2))-th interpolated quantile of the unique values.
KnotSet select_knots(std::span<const double> values, std::optional<int> count = std::nullopt);

/// Entry (i, k) = max(x_i - kappa_k, 0).
Eigen::MatrixXd truncated_linear_basis(std::span<const double> x, const KnotSet& knots);

/// Spectral square roots of the radial cubic penalty Omega = [|k - k'|^3]
/// using |Lambda|: inv_sqrt = Q |L|^{-1/2} Q', sqrt = Q |L|^{1/2} Q'.
struct PenaltyRoots {
    Eigen::MatrixXd inv_sqrt;
    Eigen::MatrixXd sqrt;
};

Eigen::MatrixXd radial_cubic_penalty(const KnotSet& knots);
/// Throws Error{"design", "singular-penalty"} when an eigenvalue falls below
/// 1e-10 max|Lambda|.
PenaltyRoots radial_cubic_roots(const KnotSet& knots);
Eigen::MatrixXd radial_cubic_raw(std::span<const double> x, const KnotSet& knots);
/// Z_x = [|x_i - kappa_k|^3] Omega^{-1/2}
Eigen::MatrixXd radial_cubic_basis(std::span<const double> x, const KnotSet& knots);

/// exp(-r / range) (1 + r / range)
double matern32(double r, double range);
/// r^2 log r with value 0 at r = 0.
double thin_plate_radial(double r);
double kriging_kernel(KrigingKernel kernel, double r, double range);

/// Space-filling knot locations among the unique points: greedy maximin
/// selection seeded at the point closest to the centroid.
std::vector<Point2> select_knots_2d(std::span<const Point2> points, std::optional<int> count);
double max_pairwise_distance(std::span<const Point2> points);
Eigen::MatrixXd kriging_basis(std::span<const Point2> points, std::span<const Point2> knots,
                              KrigingKernel kernel, double range);

// ---------------------------------------------------------------------------
// CAR neighbourhood graph

struct Adjacency {
    int regions = 0;
    double cutoff = 0.0;
    std::vector<std::vector<int>> neighbors;
    std::vector<int> degree;
    int components = 0;

    /// Degree on the diagonal, -1 for each neighbour pair.
    Eigen::MatrixXd laplacian() const;
    int laplacian_rank() const { return regions - components; }
    /// u'Lu = sum over unordered adjacent pairs of (u_i - u_j)^2.
    double quadratic_form(std::span<const double> u) const;
};

/// i ~ j iff 0 < |c_i - c_j| <= d. Without d the smallest cutoff leaving no
/// region isolated is used. Throws Error{"design", "isolated-region"}.
Adjacency build_car_adjacency(std::span<const Point2> centroids, std::optional<double> cutoff,
                              std::span<const std::string> labels = {});

// ---------------------------------------------------------------------------
// Assembled design

enum class CoefRole { fixed_random, fixed_general, random_group, random_general, spatial };

struct CoefInfo {
    std::string name;
    std::string term;
    CoefRole role;
    int slot;  // variance slot index, -1 for the fixed-effect prior
};

enum class SlotKind { group_covariance, block, spatial };

struct VarianceSlot {
    std::string name;
    std::string term;
    SlotKind kind;
    int start;       // first coefficient governed by the slot
    int size;        // number of coefficients
    int dim = 1;     // q for the group covariance slot
};

struct Range {
    int start = 0;
    int size = 0;
    int end() const { return start + size; }
    bool contains(int i) const { return i >= start && i < end(); }
};

/// X^R_i blocks of the random-intercept/slope term.
struct GroupStructure {
    std::string term;
    std::vector<std::string> labels;
    std::vector<std::string> column_names;  // "(intercept)", slope covariates
    std::vector<int> row_group;
    Eigen::MatrixXd xr;                     // n x q stacked X^R
    int groups() const { return static_cast<int>(labels.size()); }
    int q() const { return static_cast<int>(xr.cols()); }
};

struct SpatialStructure {
    std::string term;
    std::vector<std::string> labels;
    std::vector<Point2> centroids;
    std::vector<int> row_region;
    Adjacency adjacency;
};

/// Everything needed to evaluate one smooth at new covariate values.
struct SmoothInfo {
    std::string term;
    bool bivariate = false;
    SmoothBasis basis = SmoothBasis::radial_cubic;
    KrigingKernel kernel = KrigingKernel::thin_plate;
    std::vector<std::string> covariates;
    std::vector<Transform> transforms;  // identity transforms when unstandardized
    KnotSet knots;
    std::vector<Point2> knots_2d;
    Eigen::MatrixXd inv_sqrt;  // radial cubic only
    double range = 0.0;        // matern only
    std::vector<int> linear_coefs;
    Range basis_coefs;
    std::pair<double, double> observed_range[2];

    /// Basis rows at standardized covariate values.
    Eigen::MatrixXd basis_at(std::span<const double> z) const;
    Eigen::MatrixXd basis_at(std::span<const Point2> z) const;
};

/// Assembled decomposition X^R b^R + Z^R u^R + X^G b^G + sum_l Z^G_l u^G_l + Z^C u^C.
/// Coefficients are ordered [b^R, b^G, u^R, u^G_1..L, u^C].
struct DesignBlocks {
    int n = 0;
    Family family = Family::bernoulli_logit;
    Eigen::VectorXd response;
    Eigen::VectorXd offset;
    std::vector<SparseColumn> columns;
    std::vector<CoefInfo> coefs;
    std::vector<VarianceSlot> slots;
    std::vector<Transform> transforms;

    Range fixed_random;
    Range fixed_general;
    Range random_group;
    std::vector<Range> general_blocks;
    Range spatial;

    std::optional<GroupStructure> group;
    std::optional<SpatialStructure> car;
    std::vector<SmoothInfo> smooths;
    int intercept = -1;  // coefficient absorbing the CAR mean; -1 if none

    int coefficient_count() const { return static_cast<int>(columns.size()); }
    /// Dense C = [X Z].
    Eigen::MatrixXd full_design() const;
    Eigen::MatrixXd fixed_design() const;   // X = [X^R X^G]
    Eigen::MatrixXd general_design() const; // [Z^G_1 ... Z^G_L]
    const SmoothInfo* find_smooth(const std::string& term) const;
    int find_slot(const std::string& name) const;
};

/// Standardizes, builds every block and the coefficient map. Errors from the
/// sub-builders propagate unchanged.
DesignBlocks assemble(const ModelSpec& spec, const Dataset& data,
                      const Dataset* centroids = nullptr);

/// Indicator structure of a random-intercept term (Example 1 layout).
GroupStructure build_random_blocks(const std::string& term, const Factor& groups,
                                   const std::vector<std::vector<double>>& slopes,
                                   const std::vector<std::string>& slope_names);

}  // namespace gdglmm
