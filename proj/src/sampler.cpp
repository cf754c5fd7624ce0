#include "gdglmm/sampler.hpp"

#include "gdglmm/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace gdglmm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kResyncInterval = 100;
constexpr double kStartingVariances[3] = {0.1, 1.0, 10.0};

std::string variance_name(const VarianceSlot& slot, int a, int b) {
    if (slot.dim == 1) return "sigma2[" + slot.name + "]";
    return "Sigma[" + slot.name + "](" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
}

// Group-level effect of group i in the reported parameterization.
Eigen::VectorXd group_effect(const DesignBlocks& d, const Eigen::VectorXd& nu, int i, bool centered) {
    const int q = d.group->q();
    Eigen::VectorXd u = nu.segment(d.random_group.start + i * q, q);
    if (centered) u -= nu.segment(d.fixed_random.start, q);
    return u;
}

}  // namespace

// ---------------------------------------------------------------------------
// centering

Eigen::VectorXd Centering::to_centered(const DesignBlocks& blocks, const Eigen::VectorXd& nu) const {
    if (!available) throw Error("sampler", "centering-unavailable", reason);
    Eigen::VectorXd out = nu;
    const int q = blocks.group->q();
    for (int i = 0; i < blocks.group->groups(); ++i) {
        out.segment(blocks.random_group.start + i * q, q) += nu.segment(blocks.fixed_random.start, q);
    }
    return out;
}

Eigen::VectorXd Centering::to_uncentered(const DesignBlocks& blocks, const Eigen::VectorXd& gamma) const {
    if (!available) throw Error("sampler", "centering-unavailable", reason);
    Eigen::VectorXd out = gamma;
    const int q = blocks.group->q();
    for (int i = 0; i < blocks.group->groups(); ++i) {
        out.segment(blocks.random_group.start + i * q, q) -= gamma.segment(blocks.fixed_random.start, q);
    }
    return out;
}

Centering hierarchical_center(const DesignBlocks& blocks) {
    Centering c;
    if (!blocks.group) {
        c.reason = "no random-intercept or random-slope term";
        return c;
    }
    // Z^R (1_m (x) I_q) must reproduce X^R column by column.
    const int q = blocks.group->q();
    for (int j = 0; j < q; ++j) {
        Eigen::VectorXd lhs = Eigen::VectorXd::Zero(blocks.n);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(blocks.n);
        for (int i = 0; i < blocks.group->groups(); ++i) {
            const auto& col = blocks.columns[blocks.random_group.start + i * q + j];
            for (std::size_t r = 0; r < col.rows.size(); ++r) lhs[col.rows[r]] += col.values[r];
        }
        const auto& x = blocks.columns[blocks.fixed_random.start + j];
        for (std::size_t r = 0; r < x.rows.size(); ++r) rhs[x.rows[r]] += x.values[r];
        if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
            c.reason = "X^R column " + std::to_string(j + 1) + " is not in the span of Z^R";
            return c;
        }
    }
    c.available = true;
    return c;
}

// ---------------------------------------------------------------------------
// compilation

CompiledModel compile(const ModelSpec& spec, const Dataset& data, const Dataset* centroids) {
    const ValidationReport report = validate(spec, data, centroids);
    auto blocks = std::make_shared<DesignBlocks>(assemble(spec, data, centroids));
    if (!report.ok()) {
        std::string message = report.violations.front();
        if (report.violations.size() > 1) message += " (and " + std::to_string(report.violations.size() - 1) + " more)";
        throw Error("spec", "invalid-model", message);
    }
    return compile(spec, std::move(blocks));
}

CompiledModel compile(const ModelSpec& spec, std::shared_ptr<const DesignBlocks> blocks) {
    const SamplerConfig& sc = spec.sampler;
    if (sc.chains < 1) throw Error("sampler", "invalid-config", "chains must be at least 1");
    if (sc.burnin < 0 || sc.kept < 1 || sc.thin < 1) {
        throw Error("sampler", "invalid-config", "burnin must be >= 0, kept and thin >= 1");
    }
    if (!(spec.priors.fixed_variance > 0.0)) throw Error("priors", "malformed-prior", "fixed-effect variance must be positive");

    CompiledModel model;
    model.blocks = blocks;
    model.fixed_variance = spec.priors.fixed_variance;
    const DesignBlocks& d = *blocks;

    for (const auto& slot : d.slots) {
        const GroupPrior* chosen = nullptr;
        if (auto it = spec.priors.overrides.find(slot.name); it != spec.priors.overrides.end()) {
            chosen = &it->second;
        } else if (auto jt = spec.priors.overrides.find(slot.term); jt != spec.priors.overrides.end()) {
            chosen = &jt->second;
        }
        SlotPrior sp;
        if (chosen) {
            sp.prior = *chosen;
        } else if (slot.kind == SlotKind::group_covariance && slot.dim > 1) {
            sp.prior = WishartPrior{static_cast<double>(slot.dim) + 1.0, Eigen::MatrixXd::Identity(slot.dim, slot.dim)};
        } else {
            sp.prior = spec.priors.default_component;
        }
        std::visit(overloaded{
                       [&](const VarCompPrior& p) {
                           if (slot.dim > 1) {
                               throw Error("priors", "malformed-prior",
                                           "slot '" + slot.name + "' is a covariance matrix and needs an inv-wishart prior");
                           }
                           check_prior(p);
                       },
                       [&](const WishartPrior& p) {
                           if (slot.kind != SlotKind::group_covariance) {
                               throw Error("priors", "malformed-prior", "inv-wishart prior is only valid for the group covariance");
                           }
                           if (p.scale.rows() != slot.dim) {
                               throw Error("priors", "malformed-prior",
                                           "inv-wishart scale for '" + slot.name + "' must be " + std::to_string(slot.dim) +
                                               "x" + std::to_string(slot.dim));
                           }
                           check_prior(p);
                       },
                   },
                   sp.prior);
        if (auto it = spec.priors.held.find(slot.name); it != spec.priors.held.end()) {
            sp.held = it->second;
        } else if (auto jt = spec.priors.held.find(slot.term); jt != spec.priors.held.end()) {
            sp.held = jt->second;
        }
        if (sp.held && !(*sp.held > 0.0)) throw Error("priors", "malformed-prior", "held variance must be positive");
        model.slot_priors.push_back(std::move(sp));
    }

    model.centering = hierarchical_center(d);
    const bool wanted = sc.centering.value_or(d.group.has_value());
    model.centered = wanted && model.centering.available;

    model.working_columns = d.columns;
    if (model.centered) {
        for (int k = d.fixed_random.start; k < d.fixed_random.end(); ++k) model.working_columns[k] = SparseColumn{};
    }

    for (const auto& c : d.coefs) model.parameter_names.push_back(c.name);
    for (std::size_t s = 0; s < d.slots.size(); ++s) {
        if (model.slot_priors[s].held) continue;
        const auto& slot = d.slots[s];
        for (int a = 0; a < slot.dim; ++a) {
            for (int b = a; b < slot.dim; ++b) model.parameter_names.push_back(variance_name(slot, a, b));
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// chain state

namespace {

void recenter_car(ChainState& state, const CompiledModel& model) {
    const DesignBlocks& d = *model.blocks;
    if (!d.car || d.spatial.size == 0) return;
    double mean = 0.0;
    for (int k = d.spatial.start; k < d.spatial.end(); ++k) mean += state.nu[k];
    mean /= static_cast<double>(d.spatial.size);
    for (int k = d.spatial.start; k < d.spatial.end(); ++k) state.nu[k] -= mean;
    // Every row carries exactly one region indicator and one intercept entry,
    // so moving the mean into the intercept leaves eta unchanged.
    state.nu[d.intercept] += mean;
    if (model.centered && d.intercept == d.fixed_random.start) {
        const int q = d.group->q();
        for (int i = 0; i < d.group->groups(); ++i) state.nu[d.random_group.start + i * q] += mean;
    }
}

}  // namespace

ChainState initial_state(const CompiledModel& model, std::uint64_t seed, int chain) {
    const DesignBlocks& d = *model.blocks;
    ChainState state(seed, static_cast<std::uint64_t>(chain));
    const double v0 = kStartingVariances[chain % 3];

    state.nu.resize(d.coefficient_count());
    // N(0, 2^2) on the scale where column k has unit sup-norm; basis columns can be far from unit scale
    for (int k = 0; k < d.coefficient_count(); ++k) {
        double scale = 1.0;
        for (double c : model.working_columns[static_cast<std::size_t>(k)].values) scale = std::max(scale, std::abs(c));
        state.nu[k] = state.rng.normal(0.0, 2.0) / scale;
    }

    state.slot_variance.assign(d.slots.size(), v0);
    for (std::size_t s = 0; s < d.slots.size(); ++s) {
        const auto& slot = d.slots[s];
        const auto& sp = model.slot_priors[s];
        const double v = sp.held.value_or(v0);
        state.slot_variance[s] = v;
        if (slot.kind == SlotKind::group_covariance) state.group_cov = v * Eigen::MatrixXd::Identity(slot.dim, slot.dim);
    }
    recenter_car(state, model);
    state.eta = LinearPredictor(model.working_columns, d.offset, state.nu);
    return state;
}

void gibbs_sweep(ChainState& state, const CompiledModel& model, double width) {
    const DesignBlocks& d = *model.blocks;
    const auto& cols = model.working_columns;
    const std::span<const double> y(d.response.data(), static_cast<std::size_t>(d.response.size()));
    Eigen::VectorXd& nu = state.nu;
    RandomStream& rng = state.rng;
    const double fixed_precision = 1.0 / model.fixed_variance;

    auto slice_coordinate = [&](int k, double precision, double mean) {
        const double current = nu[k];
        CoordinateConditional target(d.family, cols[k], y, state.eta.values(), current, precision, mean);
        const double next = slice_sample(target, current, width, rng);
        state.eta.shift(cols[k], next - current);
        nu[k] = next;
    };

    const int q = d.group ? d.group->q() : 0;
    Eigen::MatrixXd group_precision;
    if (d.group) {
        group_precision = state.group_cov.llt().solve(Eigen::MatrixXd::Identity(q, q));
    }

    // b^R
    if (d.group && model.centered) {
        // gamma_i ~ N(b, Sigma) and b ~ N(0, f I); b leaves the likelihood.
        const int m = d.group->groups();
        Eigen::VectorXd gamma_sum = Eigen::VectorXd::Zero(q);
        for (int i = 0; i < m; ++i) gamma_sum += nu.segment(d.random_group.start + i * q, q);
        const Eigen::MatrixXd precision =
            fixed_precision * Eigen::MatrixXd::Identity(q, q) + static_cast<double>(m) * group_precision;
        Eigen::LLT<Eigen::MatrixXd> llt(precision);
        const Eigen::VectorXd mean = llt.solve(group_precision * gamma_sum);
        Eigen::VectorXd z(q);
        for (int j = 0; j < q; ++j) z[j] = rng.normal();
        // precision = L L'; L'^{-1} z has covariance precision^{-1}.
        nu.segment(d.fixed_random.start, q) = mean + llt.matrixU().solve(z);
    } else {
        for (int k = d.fixed_random.start; k < d.fixed_random.end(); ++k) slice_coordinate(k, fixed_precision, 0.0);
    }

    // b^G
    for (int k = d.fixed_general.start; k < d.fixed_general.end(); ++k) slice_coordinate(k, fixed_precision, 0.0);

    // u^R or gamma
    if (d.group) {
        Eigen::VectorXd centre = Eigen::VectorXd::Zero(q);
        if (model.centered) centre = nu.segment(d.fixed_random.start, q);
        for (int i = 0; i < d.group->groups(); ++i) {
            const int base = d.random_group.start + i * q;
            for (int j = 0; j < q; ++j) {
                double shift = 0.0;
                for (int l = 0; l < q; ++l) {
                    if (l != j) shift += group_precision(j, l) * (nu[base + l] - centre[l]);
                }
                const double p = group_precision(j, j);
                slice_coordinate(base + j, p, centre[j] - shift / p);
            }
        }
    }

    // u^G blocks
    for (std::size_t s = 0; s < d.slots.size(); ++s) {
        const auto& slot = d.slots[s];
        if (slot.kind != SlotKind::block) continue;
        const double precision = 1.0 / state.slot_variance[s];
        for (int k = slot.start; k < slot.start + slot.size; ++k) slice_coordinate(k, precision, 0.0);
    }

    // u^C
    int car_slot = -1;
    if (d.car) {
        car_slot = d.find_slot(d.car->term);
        const double tau = 1.0 / state.slot_variance[car_slot];
        const auto& adj = d.car->adjacency;
        for (int r = 0; r < adj.regions; ++r) {
            double sum = 0.0;
            for (int j : adj.neighbors[r]) sum += nu[d.spatial.start + j];
            const double deg = adj.degree[r];
            slice_coordinate(d.spatial.start + r, deg * tau, sum / deg);
        }
    }

    // variance components
    for (std::size_t s = 0; s < d.slots.size(); ++s) {
        const auto& slot = d.slots[s];
        const auto& sp = model.slot_priors[s];
        if (sp.held) continue;

        if (slot.kind == SlotKind::group_covariance) {
            const int m = d.group->groups();
            if (const auto* wishart = std::get_if<WishartPrior>(&sp.prior)) {
                std::vector<Eigen::VectorXd> effects;
                effects.reserve(m);
                for (int i = 0; i < m; ++i) effects.push_back(group_effect(d, nu, i, model.centered));
                state.group_cov = invwishart_update(*wishart, effects, rng);
            } else {
                EffectSummary e;
                e.dimension = m;
                for (int i = 0; i < m; ++i) e.quadratic += group_effect(d, nu, i, model.centered).squaredNorm();
                const auto& prior = std::get<VarCompPrior>(sp.prior);
                double v;
                if (const auto* ig = std::get_if<InverseGamma>(&prior)) {
                    v = conjugate_sigma2_update(*ig, e, rng);
                } else {
                    const double sigma = slice_update_sigma(prior, e, std::sqrt(state.group_cov(0, 0)), rng, width);
                    v = sigma * sigma;
                }
                state.group_cov(0, 0) = v;
            }
            state.slot_variance[s] = state.group_cov(0, 0);
            continue;
        }

        EffectSummary e;
        if (slot.kind == SlotKind::spatial) {
            e.dimension = d.car->adjacency.laplacian_rank();
            e.quadratic = d.car->adjacency.quadratic_form(
                std::span<const double>(nu.data() + slot.start, static_cast<std::size_t>(slot.size)));
        } else {
            e = EffectSummary::iid(std::span<const double>(nu.data() + slot.start, static_cast<std::size_t>(slot.size)));
        }
        const auto& prior = std::get<VarCompPrior>(sp.prior);
        if (const auto* ig = std::get_if<InverseGamma>(&prior)) {
            state.slot_variance[s] = conjugate_sigma2_update(*ig, e, rng);
        } else {
            const double sigma = slice_update_sigma(prior, e, std::sqrt(state.slot_variance[s]), rng, width);
            state.slot_variance[s] = sigma * sigma;
        }
    }

    recenter_car(state, model);

    ++state.iteration;
    if (state.iteration % kResyncInterval == 0) state.eta.resync(cols, d.offset, nu);
}

Eigen::VectorXd reported_row(const ChainState& state, const CompiledModel& model) {
    const DesignBlocks& d = *model.blocks;
    Eigen::VectorXd row(static_cast<Eigen::Index>(model.parameter_names.size()));
    const Eigen::VectorXd nu = model.centered ? model.centering.to_uncentered(d, state.nu) : state.nu;
    row.head(nu.size()) = nu;
    Eigen::Index at = nu.size();
    for (std::size_t s = 0; s < d.slots.size(); ++s) {
        if (model.slot_priors[s].held) continue;
        const auto& slot = d.slots[s];
        if (slot.kind == SlotKind::group_covariance) {
            for (int a = 0; a < slot.dim; ++a) {
                for (int b = a; b < slot.dim; ++b) row[at++] = state.group_cov(a, b);
            }
        } else {
            row[at++] = state.slot_variance[s];
        }
    }
    return row;
}

// ---------------------------------------------------------------------------
// chains

namespace {

bool finite_state(const ChainState& state) {
    if (!state.nu.allFinite()) return false;
    for (double v : state.slot_variance) {
        if (!(v > 0.0) || !std::isfinite(v)) return false;
    }
    return state.group_cov.size() == 0 || state.group_cov.allFinite();
}

}  // namespace

ChainOutput run_chain(const CompiledModel& model, const SamplerConfig& config, int chain) {
    const auto started = std::chrono::steady_clock::now();
    ChainOutput out;
    out.chain = chain;
    out.seed = config.seed;
    out.names = model.parameter_names;
    out.draws.resize(config.kept, static_cast<Eigen::Index>(model.parameter_names.size()));

    ChainState state = initial_state(model, config.seed, chain);
    auto sweep = [&] {
        try {
            gibbs_sweep(state, model);
        } catch (const Error& e) {
            throw Error("sampler", "aborted-chain",
                        "chain " + std::to_string(chain) + " aborted at iteration " + std::to_string(state.iteration + 1) +
                            ": " + e.what());
        }
        if (!finite_state(state)) {
            throw Error("sampler", "aborted-chain",
                        "chain " + std::to_string(chain) + ": non-finite state at iteration " +
                            std::to_string(state.iteration));
        }
    };
    for (int s = 0; s < config.burnin; ++s) sweep();
    for (int k = 0; k < config.kept; ++k) {
        for (int t = 0; t < config.thin; ++t) sweep();
        out.draws.row(k) = reported_row(state, model).transpose();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

std::vector<ChainOutput> run_chains(const CompiledModel& model, const SamplerConfig& config, int threads) {
    if (config.chains < 1) throw Error("sampler", "invalid-config", "chains must be at least 1");
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, config.chains);

    std::vector<ChainOutput> outputs(config.chains);
    std::vector<std::exception_ptr> failures(config.chains);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int c = next++; c < config.chains; c = next++) {
            try {
                outputs[c] = run_chain(model, config, c);
            } catch (...) {
                failures[c] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (int c = 0; c < config.chains; ++c) {
        if (!failures[c]) continue;
        try {
            std::rethrow_exception(failures[c]);
        } catch (const Error& e) {
            throw Error(e.module(), e.code(), "chain " + std::to_string(c) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error("sampler", "aborted-chain", "chain " + std::to_string(c) + ": " + e.what());
        }
    }
    return outputs;
}

}  // namespace gdglmm
