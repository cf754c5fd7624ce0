#include "gdglmm/priors.hpp"

#include "gdglmm/error.hpp"
#include "gdglmm/slice.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gdglmm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error("priors", "malformed-prior", std::string(what) + " must be finite and strictly positive");
    }
}

}  // namespace

void check_prior(const VarCompPrior& prior) {
    std::visit(overloaded{
                   [](const InverseGamma& p) {
                       require_positive(p.shape, "ig shape");
                       require_positive(p.scale, "ig scale");
                   },
                   [](const FoldedT& p) {
                       require_positive(p.scale, "folded-t scale");
                       require_positive(p.dof, "folded-t degrees of freedom");
                   },
                   [](const FoldedCauchy& p) { require_positive(p.scale, "folded-cauchy scale"); },
                   [](const UniformSigma& p) { require_positive(p.upper, "uniform-sigma upper bound"); },
               },
               prior);
}

void check_prior(const WishartPrior& prior) {
    const auto q = prior.scale.rows();
    if (q == 0 || prior.scale.cols() != q) {
        throw Error("priors", "malformed-prior", "inv-wishart scale must be a nonempty square matrix");
    }
    if (!(prior.dof > static_cast<double>(q) - 1.0)) {
        throw Error("priors", "malformed-prior", "inv-wishart degrees of freedom must exceed dim - 1");
    }
    if ((prior.scale - prior.scale.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + prior.scale.cwiseAbs().maxCoeff())) {
        throw Error("priors", "malformed-prior", "inv-wishart scale must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(prior.scale);
    if (llt.info() != Eigen::Success) {
        throw Error("priors", "malformed-prior", "inv-wishart scale must be positive definite");
    }
}

std::string describe(const VarCompPrior& prior) {
    std::ostringstream out;
    out.precision(17);
    std::visit(overloaded{
                   [&](const InverseGamma& p) { out << "ig " << p.shape << ' ' << p.scale; },
                   [&](const FoldedT& p) { out << "folded-t " << p.scale << ' ' << p.dof; },
                   [&](const FoldedCauchy& p) { out << "folded-cauchy " << p.scale; },
                   [&](const UniformSigma& p) { out << "uniform-sigma " << p.upper; },
               },
               prior);
    return out.str();
}

std::string describe(const WishartPrior& prior) {
    std::ostringstream out;
    out.precision(17);
    out << "inv-wishart " << prior.dof << " [";
    for (Eigen::Index i = 0; i < prior.scale.rows(); ++i) {
        out << (i ? "," : "") << '[';
        for (Eigen::Index j = 0; j < prior.scale.cols(); ++j) out << (j ? "," : "") << prior.scale(i, j);
        out << ']';
    }
    out << ']';
    return out.str();
}

double log_prior(const VarCompPrior& prior, double sigma) {
    if (!(sigma > 0.0)) throw Error("priors", "nonpositive-sigma", "log_prior needs sigma > 0");
    return std::visit(overloaded{
                          [&](const InverseGamma& p) {
                              const double s2 = sigma * sigma;
                              return -(p.shape + 1.0) * std::log(s2) - p.scale / s2;
                          },
                          [&](const FoldedT& p) {
                              const double z = sigma / p.scale;
                              return -0.5 * (p.dof + 1.0) * std::log1p(z * z / p.dof);
                          },
                          [&](const FoldedCauchy& p) { return -std::log(sigma * sigma + p.scale * p.scale); },
                          [&](const UniformSigma& p) {
                              return sigma < p.upper ? 0.0 : -std::numeric_limits<double>::infinity();
                          },
                      },
                      prior);
}

double log_prior_on_sigma(const VarCompPrior& prior, double sigma) {
    const double base = log_prior(prior, sigma);
    if (std::holds_alternative<InverseGamma>(prior)) return base + std::log(2.0 * sigma);
    return base;
}

EffectSummary EffectSummary::iid(std::span<const double> u) {
    EffectSummary s;
    s.dimension = static_cast<double>(u.size());
    for (double v : u) s.quadratic += v * v;
    return s;
}

InverseGamma conjugate_posterior(const InverseGamma& prior, const EffectSummary& effects) {
    return {prior.shape + 0.5 * effects.dimension, prior.scale + 0.5 * effects.quadratic};
}

double conjugate_sigma2_update(const InverseGamma& prior, const EffectSummary& effects, RandomStream& rng) {
    const InverseGamma post = conjugate_posterior(prior, effects);
    return post.scale / rng.gamma(post.shape);
}

double conjugate_sigma2_update(const InverseGamma& prior, std::span<const double> u, RandomStream& rng) {
    return conjugate_sigma2_update(prior, EffectSummary::iid(u), rng);
}

Eigen::MatrixXd invwishart_update(const WishartPrior& prior, const std::vector<Eigen::VectorXd>& effects,
                                  RandomStream& rng) {
    const Eigen::Index q = prior.scale.rows();
    Eigen::MatrixXd scale = prior.scale;
    for (const auto& u : effects) {
        if (u.size() != q) throw Error("priors", "dimension-mismatch", "inverse-Wishart effect has the wrong dimension");
        scale.noalias() += u * u.transpose();
    }
    const double dof = prior.dof + static_cast<double>(effects.size());

    // Sigma^{-1} ~ Wishart(dof, scale^{-1}); factor scale^{-1} = L L'.
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * (1.0 + scale.diagonal().cwiseAbs().maxCoeff());
        llt.compute(scale + jitter * Eigen::MatrixXd::Identity(q, q));
        if (llt.info() != Eigen::Success) {
            throw Error("priors", "numerical", "inverse-Wishart scale not positive definite after jitter");
        }
    }
    const Eigen::MatrixXd precision_scale = llt.solve(Eigen::MatrixXd::Identity(q, q));
    Eigen::LLT<Eigen::MatrixXd> inner(0.5 * (precision_scale + precision_scale.transpose()));
    const Eigen::MatrixXd lower = inner.matrixL();

    Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        bartlett(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    const Eigen::MatrixXd factor = lower * bartlett;
    const Eigen::MatrixXd wishart = factor * factor.transpose();
    Eigen::MatrixXd sigma = wishart.llt().solve(Eigen::MatrixXd::Identity(q, q));
    return 0.5 * (sigma + sigma.transpose());
}

double slice_update_sigma(const VarCompPrior& prior, const EffectSummary& effects, double sigma_current,
                          RandomStream& rng, double width) {
    if (!(sigma_current > 0.0)) throw Error("priors", "nonpositive-sigma", "slice_update_sigma needs sigma > 0");
    const double k = effects.dimension;
    const double quad = effects.quadratic;
    auto target = [&](double t) {
        const double sigma = std::exp(t);
        if (!(sigma > 0.0) || !std::isfinite(sigma)) return -std::numeric_limits<double>::infinity();
        return log_prior_on_sigma(prior, sigma) - k * t - 0.5 * quad / (sigma * sigma) + t;
    };
    return std::exp(slice_sample(target, std::log(sigma_current), width, rng));
}

double slice_update_sigma(const VarCompPrior& prior, std::span<const double> u, double sigma_current,
                          RandomStream& rng, double width) {
    return slice_update_sigma(prior, EffectSummary::iid(u), sigma_current, rng, width);
}

}  // namespace gdglmm
