#include "gdglmm/postprocess.hpp"

#include "gdglmm/error.hpp"
#include "gdglmm/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gdglmm {

FitResult fit(const ModelSpec& spec, const Dataset& data, const Dataset* centroids,
              std::optional<SamplerConfig> sampler, int threads) {
    FitResult result;
    result.spec = spec;
    if (sampler) result.spec.sampler = *sampler;
    result.model = compile(result.spec, data, centroids);
    result.store = ChainStore(run_chains(result.model, result.spec.sampler, threads));
    return result;
}

namespace {

/// Every kept draw of every chain stacked (chain-major).
Eigen::MatrixXd pooled_draws(const ChainStore& store) {
    Eigen::MatrixXd all(static_cast<Eigen::Index>(store.draws()) * store.chains(),
                        static_cast<Eigen::Index>(store.names().size()));
    for (int c = 0; c < store.chains(); ++c) all.middleRows(static_cast<Eigen::Index>(c) * store.draws(), store.draws()) = store.chain(c);
    return all;
}

double column_mean(const SparseColumn& col, int n) {
    double s = 0.0;
    for (double v : col.values) s += v;
    return s / static_cast<double>(n);
}

std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return out;
}

void summarize_columns(const Eigen::MatrixXd& values, CurveSummary& out) {
    const Eigen::Index g = values.cols();
    out.mean.resize(g);
    out.lower.resize(g);
    out.upper.resize(g);
    std::vector<double> column(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index j = 0; j < g; ++j) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) column[r] = values(r, j);
        double s = 0.0;
        for (double v : column) s += v;
        out.mean[j] = s / static_cast<double>(column.size());
        std::sort(column.begin(), column.end());
        out.lower[j] = interpolated_quantile(column, 0.025);
        out.upper[j] = interpolated_quantile(column, 0.975);
    }
}

// Variance of the group intercept in every pooled draw.
Eigen::VectorXd group_intercept_variance(const FitResult& fit, Eigen::Index draws, const Eigen::MatrixXd& all) {
    const DesignBlocks& d = fit.blocks();
    const int slot = d.find_slot(d.group->term);
    if (const auto& held = fit.model.slot_priors[slot].held) return Eigen::VectorXd::Constant(draws, *held);
    const std::string name = d.slots[slot].dim == 1 ? "sigma2[" + d.slots[slot].name + "]"
                                                    : "Sigma[" + d.slots[slot].name + "](1,1)";
    const int p = fit.store.parameter(name);
    if (p < 0) throw Error("postprocess", "missing-parameter", "no draws for " + name);
    return all.col(p);
}

}  // namespace

CurveSummary curve_posterior(const FitResult& fit, const std::string& term, const CurveOptions& options) {
    const DesignBlocks& d = fit.blocks();
    const SmoothInfo* smooth = d.find_smooth(term);
    if (!smooth) throw Error("postprocess", "unknown-term", "'" + term + "' is not a smooth or bivariate-smooth term of the fit");
    if (options.grid_size < 2) throw Error("postprocess", "invalid-grid", "curve grid needs at least 2 points");

    const Eigen::MatrixXd all = pooled_draws(fit.store);
    const Eigen::Index draws = all.rows();

    // Contribution of everything except the term itself, per draw.
    Eigen::VectorXd base = Eigen::VectorXd::Zero(draws);
    std::vector<bool> own(static_cast<std::size_t>(d.coefficient_count()), false);
    for (int k : smooth->linear_coefs) own[k] = true;
    for (int k = smooth->basis_coefs.start; k < smooth->basis_coefs.end(); ++k) own[k] = true;
    for (int k = 0; k < d.coefficient_count(); ++k) {
        if (own[k]) continue;
        const auto role = d.coefs[k].role;
        if (role == CoefRole::fixed_random || role == CoefRole::fixed_general) {
            const double at = column_mean(d.columns[k], d.n);
            if (at != 0.0) base += at * all.col(k);
        }
    }
    for (const auto& other : d.smooths) {
        if (other.term == term) continue;
        Eigen::MatrixXd row;
        if (other.bivariate) {
            Point2 centre{0.0, 0.0};
            for (int lin = 0; lin < 2; ++lin) centre[lin] = column_mean(d.columns[other.linear_coefs[lin]], d.n);
            const std::vector<Point2> pts{centre};
            row = other.basis_at(std::span<const Point2>(pts));
        } else {
            const double z = column_mean(d.columns[other.linear_coefs[0]], d.n);
            const std::vector<double> pts{z};
            row = other.basis_at(std::span<const double>(pts));
        }
        base += all.middleCols(other.basis_coefs.start, other.basis_coefs.size) * row.transpose();
    }
    if (options.include_group_effect) {
        if (!d.group) throw Error("postprocess", "no-group-term", "include_group_effect needs a random-intercept or random-slope term");
        const Eigen::VectorXd v = group_intercept_variance(fit, draws, all);
        RandomStream rng(options.seed, 0x6375727665ULL);
        for (Eigen::Index r = 0; r < draws; ++r) base[r] += std::sqrt(v[r]) * rng.normal();
    }

    CurveSummary out;
    out.term = term;
    out.scale = options.scale;

    Eigen::MatrixXd linear;  // grid x linear coefficients
    Eigen::MatrixXd basis;   // grid x K
    if (smooth->bivariate) {
        const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(options.grid_size)))));
        const auto gx = linspace(smooth->observed_range[0].first, smooth->observed_range[0].second, side);
        const auto gy = linspace(smooth->observed_range[1].first, smooth->observed_range[1].second, side);
        std::vector<Point2> pts;
        for (double a : gx) {
            for (double b : gy) {
                pts.push_back({a, b});
                out.grid.push_back({a, b});
            }
        }
        linear.resize(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            linear(static_cast<Eigen::Index>(i), 0) = smooth->transforms[0].forward(pts[i][0]);
            linear(static_cast<Eigen::Index>(i), 1) = smooth->transforms[1].forward(pts[i][1]);
        }
        basis = smooth->basis_at(std::span<const Point2>(pts));
    } else {
        const auto gx = linspace(smooth->observed_range[0].first, smooth->observed_range[0].second, options.grid_size);
        std::vector<double> z(gx.size());
        for (std::size_t i = 0; i < gx.size(); ++i) {
            z[i] = smooth->transforms[0].forward(gx[i]);
            out.grid.push_back({gx[i]});
        }
        linear = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
        basis = smooth->basis_at(std::span<const double>(z));
    }

    Eigen::MatrixXd lin_draws(draws, static_cast<Eigen::Index>(smooth->linear_coefs.size()));
    for (std::size_t j = 0; j < smooth->linear_coefs.size(); ++j) lin_draws.col(static_cast<Eigen::Index>(j)) = all.col(smooth->linear_coefs[j]);
    Eigen::MatrixXd values = lin_draws * linear.transpose() +
                             all.middleCols(smooth->basis_coefs.start, smooth->basis_coefs.size) * basis.transpose();
    values.colwise() += base;
    if (options.scale == CurveScale::response) {
        values = values.unaryExpr([family = d.family](double x) { return mean_function(family, x); });
    }
    summarize_columns(values, out);
    if (options.keep_draws) out.draws = std::move(values);
    return out;
}

Eigen::MatrixXd linear_predictor_draws(const FitResult& fit) {
    const DesignBlocks& d = fit.blocks();
    const Eigen::MatrixXd all = pooled_draws(fit.store);
    Eigen::MatrixXd eta = all.leftCols(d.coefficient_count()) * d.full_design().transpose();
    eta.rowwise() += d.offset.transpose();
    return eta;
}

std::vector<RegionSummary> sir_hat(const FitResult& fit) {
    const DesignBlocks& d = fit.blocks();
    if (d.family != Family::poisson_log || !fit.spec.offset || !d.car) {
        throw Error("postprocess", "family-mismatch", "SIR needs a poisson-log fit with an offset and a spatial-car term");
    }
    const Eigen::MatrixXd eta = linear_predictor_draws(fit);
    const auto& regions = d.car->labels;
    const auto regions_n = static_cast<Eigen::Index>(regions.size());
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(eta.rows(), regions_n);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(regions_n);
    for (int i = 0; i < d.n; ++i) {
        const int r = d.car->row_region[i];
        expected[r] += std::exp(d.offset[i]);
        mu.col(r) += eta.col(i).array().exp().matrix();
    }
    std::vector<RegionSummary> out;
    std::vector<double> sir(static_cast<std::size_t>(eta.rows()));
    for (Eigen::Index r = 0; r < regions_n; ++r) {
        for (Eigen::Index t = 0; t < eta.rows(); ++t) sir[t] = 100.0 * mu(t, r) / expected[r];
        out.push_back({regions[r], expected[r], summarize(sir)});
    }
    return out;
}

std::vector<LabeledPrior> default_roster() {
    std::vector<VarCompPrior> priors{InverseGamma{0.01, 0.01}, FoldedCauchy{25.0}, FoldedCauchy{12.0}, UniformSigma{100.0}};
    std::vector<LabeledPrior> out;
    for (const auto& p : priors) out.push_back({describe(p), p});
    return out;
}

ModelSpec with_prior(const ModelSpec& spec, const VarCompPrior& prior) {
    check_prior(prior);
    ModelSpec out = spec;
    out.priors.default_component = prior;
    for (auto& [slot, p] : out.priors.overrides) {
        if (std::holds_alternative<VarCompPrior>(p)) p = prior;
    }
    return out;
}

SensitivityTable sensitivity_run(const ModelSpec& spec, const Dataset& data, const Dataset* centroids,
                                 const std::vector<LabeledPrior>& roster, std::optional<SamplerConfig> sampler,
                                 int threads) {
    if (roster.size() < 2) {
        throw Error("postprocess", "roster-too-small", "sensitivity needs a baseline prior and at least one comparator");
    }
    struct Stats {
        double mean;
        double width;
    };
    auto fixed_effects = [](const FitResult& f) {
        std::vector<std::pair<std::string, Stats>> out;
        const DesignBlocks& d = f.blocks();
        for (int k = 0; k < d.coefficient_count(); ++k) {
            const auto role = d.coefs[k].role;
            if (role != CoefRole::fixed_random && role != CoefRole::fixed_general) continue;
            const Summary s = summarize(f.store.pooled(k));
            out.push_back({d.coefs[k].name, {s.mean, s.q975 - s.q025}});
        }
        return out;
    };

    SensitivityTable table;
    table.baseline = roster.front().label;
    const FitResult base_fit = fit(with_prior(spec, roster.front().prior), data, centroids, sampler, threads);
    const auto base = fixed_effects(base_fit);

    for (std::size_t r = 1; r < roster.size(); ++r) {
        table.comparisons.push_back(roster[r].label);
        std::vector<std::pair<std::string, Stats>> other;
        try {
            other = fixed_effects(fit(with_prior(spec, roster[r].prior), data, centroids, sampler, threads));
        } catch (const Error& e) {
            table.failures.push_back(roster[r].label + ": " + e.what());
            continue;
        }
        for (std::size_t k = 0; k < base.size(); ++k) {
            const Stats& b = base[k].second;
            const Stats& o = other[k].second;
            table.rows.push_back({base[k].first, roster[r].label, 100.0 * (o.mean - b.mean) / std::abs(b.mean),
                                  100.0 * (o.width - b.width) / b.width});
        }
    }
    return table;
}

}  // namespace gdglmm
