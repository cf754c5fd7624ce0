#include "gdglmm/diagnostics.hpp"

#include "gdglmm/error.hpp"
#include "gdglmm/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gdglmm {

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x, double mean) {
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

double rhat(const std::vector<Series>& chains) {
    const std::size_t m = chains.size();
    if (m < 2) throw Error("diagnostics", "too-few-chains", "sqrt(R-hat) needs at least two chains");
    const std::size_t n = chains.front().size();
    if (n < 2) throw Error("diagnostics", "too-few-draws", "sqrt(R-hat) needs at least two draws per chain");
    for (const auto& c : chains) {
        if (c.size() != n) throw Error("diagnostics", "unequal-lengths", "chains must have equal lengths");
    }
    std::vector<double> means(m);
    double w = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        means[j] = mean_of(chains[j]);
        w += sample_variance(chains[j], means[j]);
    }
    w /= static_cast<double>(m);
    const double grand = mean_of(means);
    double b_over_n = 0.0;
    for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
    b_over_n /= static_cast<double>(m - 1);
    if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    // var+ / W, written so B = 0 gives sqrt((n-1)/n) bit for bit
    return std::sqrt((nn - 1.0) / nn + b_over_n / w);
}

std::vector<double> autocorr(std::span<const double> series, int max_lag) {
    const auto n = static_cast<int>(series.size());
    if (max_lag < 0 || n <= max_lag) throw Error("diagnostics", "lag-too-large", "series must be longer than the maximum lag");
    const double mean = mean_of(series);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw Error("diagnostics", "undefined-correlation", "autocorrelation of a constant series");
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) {
        double num = 0.0;
        for (int t = 0; t + k < n; ++t) num += (series[t] - mean) * (series[t + k] - mean);
        rho[k] = num / denom;
    }
    return rho;
}

double ess(std::span<const double> series) {
    const auto n = static_cast<int>(series.size());
    if (n < 10) throw Error("diagnostics", "too-few-draws", "ESS needs at least 10 draws");
    const double mean = mean_of(series);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw Error("diagnostics", "undefined-correlation", "ESS of a constant series");
    auto rho = [&](int k) {
        double num = 0.0;
        for (int t = 0; t + k < n; ++t) num += (series[t] - mean) * (series[t + k] - mean);
        return num / denom;
    };
    // Lags are evaluated lazily because the sum usually stops early.
    double sum = 0.0;
    double current = rho(1);
    for (int k = 1; k + 1 < n; ++k) {
        const double following = rho(k + 1);
        if (current + following <= 0.0) break;
        sum += current;
        current = following;
    }
    return static_cast<double>(n) / (1.0 + 2.0 * sum);
}

Summary summarize(std::span<const double> draws) {
    if (draws.size() < 2) throw Error("diagnostics", "too-few-draws", "summaries need at least two draws");
    Summary s;
    s.mean = mean_of(draws);
    s.sd = std::sqrt(sample_variance(draws, s.mean));
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    s.q025 = interpolated_quantile(sorted, 0.025);
    s.q500 = interpolated_quantile(sorted, 0.5);
    s.q975 = interpolated_quantile(sorted, 0.975);
    return s;
}

ChainStore::ChainStore(const std::vector<ChainOutput>& chains) {
    if (chains.empty()) return;
    names_ = chains.front().names;
    for (const auto& c : chains) {
        if (c.names != names_ || c.draws.rows() != chains.front().draws.rows()) {
            throw Error("diagnostics", "unequal-lengths", "chains disagree in shape or parameter names");
        }
        chains_.push_back(c.draws);
    }
}

ChainStore::ChainStore(std::vector<std::string> names, std::vector<Eigen::MatrixXd> chains)
    : names_(std::move(names)), chains_(std::move(chains)) {
    for (const auto& c : chains_) {
        if (c.cols() != static_cast<Eigen::Index>(names_.size()) || c.rows() != chains_.front().rows()) {
            throw Error("diagnostics", "unequal-lengths", "chains disagree in shape or parameter names");
        }
    }
}

int ChainStore::parameter(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

Series ChainStore::series(int parameter, int chain) const {
    const auto& m = chains_.at(chain);
    Series s(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index t = 0; t < m.rows(); ++t) s[t] = m(t, parameter);
    return s;
}

std::vector<Series> ChainStore::per_chain(int parameter) const {
    std::vector<Series> out;
    for (int c = 0; c < chains(); ++c) out.push_back(series(parameter, c));
    return out;
}

Series ChainStore::pooled(int parameter) const {
    Series out;
    out.reserve(static_cast<std::size_t>(draws()) * chains());
    for (int c = 0; c < chains(); ++c) {
        const Series s = series(parameter, c);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

std::vector<ParameterDiagnostics> diagnose(const ChainStore& store) {
    std::vector<ParameterDiagnostics> out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int p = 0; p < static_cast<int>(store.names().size()); ++p) {
        ParameterDiagnostics d;
        d.name = store.names()[p];
        const auto chains = store.per_chain(p);
        d.rhat = store.chains() >= 2 && store.draws() >= 2 ? rhat(chains) : nan;
        d.ess = 0.0;
        for (const auto& c : chains) {
            try {
                d.ess += ess(c);
            } catch (const Error&) {
                d.ess = nan;
                break;
            }
        }
        const Series pooled = store.pooled(p);
        d.summary = summarize(pooled);
        d.mc_se = d.summary.sd / std::sqrt(d.ess);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace gdglmm
