#include "gdglmm/oracle.hpp"

#include "gdglmm/error.hpp"

#include <cmath>
#include <limits>

namespace gdglmm::oracle {

namespace {

using Dense = std::vector<std::vector<double>>;

Dense copy_out(const Eigen::MatrixXd& m) {
    Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    }
    return out;
}

// Gauss-Jordan inverse with partial pivoting.
Dense invert(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (!(std::abs(a[pivot][col]) > 1e-14 * scale)) throw Error("oracle", "singular", "closed-form system is singular");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

}  // namespace

GridPosterior grid_posterior(const std::function<double(std::span<const double>)>& log_density,
                             const std::vector<Axis>& axes) {
    if (axes.empty() || axes.size() > 4) throw Error("oracle", "bad-grid", "grid posterior supports 1 to 4 axes");
    std::size_t total = 1;
    for (const auto& a : axes) {
        if (a.points < 2 || a.points > 400 || !(a.upper > a.lower)) {
            throw Error("oracle", "bad-grid", "each axis needs 2..400 points over a nonempty interval");
        }
        total *= static_cast<std::size_t>(a.points);
    }
    const std::size_t dims = axes.size();

    GridPosterior g;
    g.axes = axes;
    g.log_density.resize(total);
    g.log_max = -std::numeric_limits<double>::infinity();

    std::vector<int> index(dims, 0);
    std::vector<double> point(dims);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t k = dims; k-- > 0;) {
            index[k] = static_cast<int>(rem % static_cast<std::size_t>(axes[k].points));
            rem /= static_cast<std::size_t>(axes[k].points);
        }
        for (std::size_t k = 0; k < dims; ++k) {
            const auto& a = axes[k];
            point[k] = a.lower + (a.upper - a.lower) * index[k] / (a.points - 1);
        }
        const double v = log_density(point);
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            throw Error("oracle", "non-finite", "grid log density is not finite");
        }
        g.log_density[flat] = v;
        if (v > g.log_max) g.log_max = v;
    }

    std::vector<double> weighted_sum(dims, 0.0);
    double mass = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double w = 1.0;
        for (std::size_t k = dims; k-- > 0;) {
            const auto& a = axes[k];
            index[k] = static_cast<int>(rem % static_cast<std::size_t>(a.points));
            rem /= static_cast<std::size_t>(a.points);
            const double h = (a.upper - a.lower) / (a.points - 1);
            w *= (index[k] == 0 || index[k] == a.points - 1) ? 0.5 * h : h;
        }
        const double p = w * std::exp(g.log_density[flat] - g.log_max);
        mass += p;
        for (std::size_t k = 0; k < dims; ++k) {
            const auto& a = axes[k];
            weighted_sum[k] += p * (a.lower + (a.upper - a.lower) * index[k] / (a.points - 1));
        }
    }
    if (!(mass > 0.0)) throw Error("oracle", "non-finite", "grid posterior has zero mass");
    g.normalizer = mass;
    g.means.resize(dims);
    for (std::size_t k = 0; k < dims; ++k) g.means[k] = weighted_sum[k] / mass;
    return g;
}

GaussianPosterior gaussian_closed_form(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& prior_covariance) {
    const auto n = static_cast<std::size_t>(design.rows());
    const auto p = static_cast<std::size_t>(design.cols());
    if (static_cast<std::size_t>(y.size()) != n || static_cast<std::size_t>(prior_covariance.rows()) != p ||
        static_cast<std::size_t>(prior_covariance.cols()) != p) {
        throw Error("oracle", "dimension-mismatch", "C, y and V disagree in size");
    }
    const Dense c = copy_out(design);
    const Dense v_inv = invert(copy_out(prior_covariance));

    Dense a(p, std::vector<double>(p, 0.0));
    std::vector<double> cty(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) {
            double s = v_inv[j][k];
            for (std::size_t i = 0; i < n; ++i) s += c[i][j] * c[i][k];
            a[j][k] = s;
        }
        for (std::size_t i = 0; i < n; ++i) cty[j] += c[i][j] * y[static_cast<Eigen::Index>(i)];
    }
    const Dense cov = invert(a);

    GaussianPosterior out;
    out.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            m += cov[j][k] * cty[k];
            // symmetrize the roundoff
            out.covariance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 0.5 * (cov[j][k] + cov[k][j]);
        }
        out.mean[static_cast<Eigen::Index>(j)] = m;
    }
    return out;
}

double fd_derivative(const std::function<double(double)>& f, double x, int order, double step) {
    if (order != 1 && order != 2) throw Error("oracle", "bad-order", "finite differences support order 1 or 2");
    const double h = step * std::max(1.0, std::abs(x));
    const double up = f(x + h);
    const double down = f(x - h);
    const double mid = order == 2 ? f(x) : 0.0;
    if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(mid)) {
        throw Error("oracle", "non-finite", "function is not finite near the evaluation point");
    }
    if (order == 1) return (up - down) / (2.0 * h);
    return (up - 2.0 * mid + down) / (h * h);
}

}  // namespace gdglmm::oracle
