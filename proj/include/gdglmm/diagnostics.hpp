#pragma once

#include "gdglmm/sampler.hpp"

#include <span>
#include <string>
#include <vector>

namespace gdglmm {

using Series = std::vector<double>;

/// Gelman-Rubin sqrt(R-hat): W = mean within-chain variance, B/n = variance
/// of chain means, var+ = (n-1)/n W + B/n. Returns +inf when W = 0.
double rhat(const std::vector<Series>& chains);

/// rho_k = sum (x_t - m)(x_{t+k} - m) / sum (x_t - m)^2 for k = 0..max_lag.
std::vector<double> autocorr(std::span<const double> series, int max_lag);

/// n / (1 + 2 sum rho_k), truncated at the first k with rho_k + rho_{k+1} <= 0.
double ess(std::span<const double> series);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q500 = 0.0;
    double q975 = 0.0;
};

Summary summarize(std::span<const double> draws);

/// Draws of every parameter for each chain, equal lengths.
class ChainStore {
public:
    ChainStore() = default;
    explicit ChainStore(const std::vector<ChainOutput>& chains);
    ChainStore(std::vector<std::string> names, std::vector<Eigen::MatrixXd> chains);

    const std::vector<std::string>& names() const { return names_; }
    int chains() const { return static_cast<int>(chains_.size()); }
    int draws() const { return chains_.empty() ? 0 : static_cast<int>(chains_.front().rows()); }
    int parameter(const std::string& name) const;  // -1 if absent

    Series series(int parameter, int chain) const;
    std::vector<Series> per_chain(int parameter) const;
    Series pooled(int parameter) const;
    const Eigen::MatrixXd& chain(int c) const { return chains_[c]; }

private:
    std::vector<std::string> names_;
    std::vector<Eigen::MatrixXd> chains_;
};

struct ParameterDiagnostics {
    std::string name;
    double rhat;   // NaN with a single chain
    double ess;    // summed over chains
    double mc_se;  // pooled sd / sqrt(ess)
    Summary summary;
};

std::vector<ParameterDiagnostics> diagnose(const ChainStore& store);

}  // namespace gdglmm
