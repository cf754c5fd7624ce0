#include "gdglmm/design.hpp"

#include "gdglmm/error.hpp"
#include "gdglmm/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace gdglmm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> sorted_unique(std::span<const double> values) {
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

double distance(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

SparseColumn sparse_from(const Eigen::VectorXd& dense) {
    SparseColumn c;
    for (Eigen::Index i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) {
            c.rows.push_back(static_cast<int>(i));
            c.values.push_back(dense[i]);
        }
    }
    return c;
}

SparseColumn sparse_from(std::span<const double> dense) {
    SparseColumn c;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) {
            c.rows.push_back(static_cast<int>(i));
            c.values.push_back(dense[i]);
        }
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// knots and bases

int default_knot_count(std::size_t unique_values) {
    return static_cast<int>(std::min<std::size_t>(unique_values / 4, 35));
}

KnotSet select_knots(std::span<const double> values, std::optional<int> count) {
    const std::vector<double> uniques = sorted_unique(values);
    if (uniques.size() < 4) {
        throw Error("design", "too-few-uniques",
                    "knot selection needs at least 4 unique values, found " + std::to_string(uniques.size()));
    }
    const int k = count.value_or(default_knot_count(uniques.size()));
    if (k < 1) throw Error("design", "too-few-uniques", "knot count must be positive");
    if (uniques.size() < static_cast<std::size_t>(k) + 2) {
        throw Error("design", "too-few-uniques",
                    std::to_string(k) + " knots need at least " + std::to_string(k + 2) + " unique values, found " +
                        std::to_string(uniques.size()));
    }
    KnotSet knots;
    knots.values.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        const double p = static_cast<double>(i + 1) / static_cast<double>(k + 2);
        knots.values.push_back(interpolated_quantile(uniques, p));
    }
    return knots;
}

Eigen::MatrixXd truncated_linear_basis(std::span<const double> x, const KnotSet& knots) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto k = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd z(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) z(i, j) = std::max(x[i] - knots.values[j], 0.0);
    }
    return z;
}

Eigen::MatrixXd radial_cubic_penalty(const KnotSet& knots) {
    const auto k = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd omega(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) omega(i, j) = std::pow(std::abs(knots.values[i] - knots.values[j]), 3);
    }
    return omega;
}

PenaltyRoots radial_cubic_roots(const KnotSet& knots) {
    if (knots.size() < 2) throw Error("design", "too-few-knots", "radial cubic basis needs at least 2 knots");
    const Eigen::MatrixXd omega = radial_cubic_penalty(knots);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega);
    if (eig.info() != Eigen::Success) throw Error("design", "singular-penalty", "eigendecomposition of the radial cubic penalty failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double largest = lambda.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv_root(lambda.size());
    Eigen::VectorXd root(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double a = std::abs(lambda[i]);
        if (!(a >= 1e-10 * largest) || a == 0.0) {
            throw Error("design", "singular-penalty", "radial cubic penalty is numerically singular (knots too close)");
        }
        inv_root[i] = 1.0 / std::sqrt(a);
        root[i] = std::sqrt(a);
    }
    const Eigen::MatrixXd& q = eig.eigenvectors();
    return {q * inv_root.asDiagonal() * q.transpose(), q * root.asDiagonal() * q.transpose()};
}

Eigen::MatrixXd radial_cubic_raw(std::span<const double> x, const KnotSet& knots) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto k = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd c(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) c(i, j) = std::pow(std::abs(x[i] - knots.values[j]), 3);
    }
    return c;
}

Eigen::MatrixXd radial_cubic_basis(std::span<const double> x, const KnotSet& knots) {
    return radial_cubic_raw(x, knots) * radial_cubic_roots(knots).inv_sqrt;
}

double matern32(double r, double range) {
    const double t = std::abs(r / range);
    return std::exp(-t) * (1.0 + t);
}

double thin_plate_radial(double r) {
    if (r == 0.0) return 0.0;
    return r * r * std::log(std::abs(r));
}

double kriging_kernel(KrigingKernel kernel, double r, double range) {
    return kernel == KrigingKernel::matern32 ? matern32(r, range) : thin_plate_radial(r);
}

std::vector<Point2> select_knots_2d(std::span<const Point2> points, std::optional<int> count) {
    std::vector<Point2> uniques(points.begin(), points.end());
    std::sort(uniques.begin(), uniques.end());
    uniques.erase(std::unique(uniques.begin(), uniques.end()), uniques.end());
    if (uniques.size() < 4) {
        throw Error("design", "too-few-uniques", "bivariate knot selection needs at least 4 unique locations");
    }
    const int k = count.value_or(std::max(default_knot_count(uniques.size()), 1));
    if (uniques.size() < static_cast<std::size_t>(k)) {
        throw Error("design", "too-few-uniques",
                    std::to_string(k) + " bivariate knots need at least as many unique locations");
    }
    Point2 centre{0.0, 0.0};
    for (const auto& p : uniques) {
        centre[0] += p[0];
        centre[1] += p[1];
    }
    centre[0] /= static_cast<double>(uniques.size());
    centre[1] /= static_cast<double>(uniques.size());

    std::vector<double> nearest(uniques.size(), std::numeric_limits<double>::infinity());
    std::size_t pick = 0;
    for (std::size_t i = 1; i < uniques.size(); ++i) {
        if (distance(uniques[i], centre) < distance(uniques[pick], centre)) pick = i;
    }
    std::vector<Point2> knots;
    knots.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        knots.push_back(uniques[pick]);
        for (std::size_t i = 0; i < uniques.size(); ++i) nearest[i] = std::min(nearest[i], distance(uniques[i], uniques[pick]));
        pick = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    }
    return knots;
}

double max_pairwise_distance(std::span<const Point2> points) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) best = std::max(best, distance(points[i], points[j]));
    }
    return best;
}

Eigen::MatrixXd kriging_basis(std::span<const Point2> points, std::span<const Point2> knots, KrigingKernel kernel,
                              double range) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(knots.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < knots.size(); ++j) {
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kriging_kernel(kernel, distance(points[i], knots[j]), range);
        }
    }
    return z;
}

// ---------------------------------------------------------------------------
// adjacency

Eigen::MatrixXd Adjacency::laplacian() const {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(regions, regions);
    for (int i = 0; i < regions; ++i) {
        l(i, i) = degree[i];
        for (int j : neighbors[i]) l(i, j) = -1.0;
    }
    return l;
}

double Adjacency::quadratic_form(std::span<const double> u) const {
    double total = 0.0;
    for (int i = 0; i < regions; ++i) {
        for (int j : neighbors[i]) {
            if (j > i) {
                const double d = u[i] - u[j];
                total += d * d;
            }
        }
    }
    return total;
}

Adjacency build_car_adjacency(std::span<const Point2> centroids, std::optional<double> cutoff,
                              std::span<const std::string> labels) {
    const int n = static_cast<int>(centroids.size());
    auto name = [&](int i) { return labels.size() == centroids.size() ? labels[i] : std::to_string(i + 1); };
    if (n < 2) throw Error("design", "too-few-regions", "a CAR term needs at least 2 regions");

    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = distance(centroids[i], centroids[j]);
            if (d == 0.0) throw Error("design", "duplicate-centroid", "regions '" + name(i) + "' and '" + name(j) + "' share a centroid");
            dist[i * n + j] = dist[j * n + i] = d;
        }
    }

    Adjacency adj;
    adj.regions = n;
    if (cutoff) {
        if (!(*cutoff > 0.0)) throw Error("design", "malformed-cutoff", "CAR cutoff must be positive");
        adj.cutoff = *cutoff;
    } else {
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                if (j != i) nearest = std::min(nearest, dist[i * n + j]);
            }
            d = std::max(d, nearest);
        }
        adj.cutoff = d;
    }

    adj.neighbors.assign(n, {});
    adj.degree.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j != i && dist[i * n + j] <= adj.cutoff) adj.neighbors[i].push_back(j);
        }
        adj.degree[i] = static_cast<int>(adj.neighbors[i].size());
        if (adj.degree[i] == 0) {
            throw Error("design", "isolated-region",
                        "region '" + name(i) + "' has no neighbour within cutoff " + std::to_string(adj.cutoff) + " km");
        }
    }

    std::vector<int> component(n, -1);
    for (int s = 0; s < n; ++s) {
        if (component[s] >= 0) continue;
        std::queue<int> queue;
        queue.push(s);
        component[s] = adj.components;
        while (!queue.empty()) {
            const int i = queue.front();
            queue.pop();
            for (int j : adj.neighbors[i]) {
                if (component[j] < 0) {
                    component[j] = adj.components;
                    queue.push(j);
                }
            }
        }
        ++adj.components;
    }
    return adj;
}

// ---------------------------------------------------------------------------
// assembled design

Eigen::MatrixXd SmoothInfo::basis_at(std::span<const double> z) const {
    if (basis == SmoothBasis::truncated_linear) return truncated_linear_basis(z, knots);
    return radial_cubic_raw(z, knots) * inv_sqrt;
}

Eigen::MatrixXd SmoothInfo::basis_at(std::span<const Point2> z) const {
    return kriging_basis(z, knots_2d, kernel, range);
}

Eigen::MatrixXd DesignBlocks::full_design() const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, coefficient_count());
    for (int k = 0; k < coefficient_count(); ++k) {
        const auto& col = columns[k];
        for (std::size_t j = 0; j < col.rows.size(); ++j) c(col.rows[j], k) = col.values[j];
    }
    return c;
}

Eigen::MatrixXd DesignBlocks::fixed_design() const {
    const Eigen::MatrixXd c = full_design();
    return c.leftCols(fixed_random.size + fixed_general.size);
}

Eigen::MatrixXd DesignBlocks::general_design() const {
    const Eigen::MatrixXd c = full_design();
    int total = 0;
    for (const auto& b : general_blocks) total += b.size;
    if (total == 0) return Eigen::MatrixXd(n, 0);
    return c.middleCols(general_blocks.front().start, total);
}

const SmoothInfo* DesignBlocks::find_smooth(const std::string& term) const {
    for (const auto& s : smooths) {
        if (s.term == term) return &s;
    }
    return nullptr;
}

int DesignBlocks::find_slot(const std::string& name) const {
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

GroupStructure build_random_blocks(const std::string& term, const Factor& groups,
                                   const std::vector<std::vector<double>>& slopes,
                                   const std::vector<std::string>& slope_names) {
    GroupStructure g;
    g.term = term;
    g.labels = groups.levels;
    g.row_group = groups.codes;
    const auto n = static_cast<Eigen::Index>(groups.codes.size());
    g.xr.resize(n, static_cast<Eigen::Index>(1 + slopes.size()));
    g.column_names.push_back("(intercept)");
    for (const auto& name : slope_names) g.column_names.push_back(name);
    std::vector<int> counts(groups.levels.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        g.xr(i, 0) = 1.0;
        for (std::size_t s = 0; s < slopes.size(); ++s) g.xr(i, static_cast<Eigen::Index>(s + 1)) = slopes[s][i];
        ++counts[groups.codes[i]];
    }
    for (std::size_t l = 0; l < counts.size(); ++l) {
        if (counts[l] == 0) throw Error("design", "empty-group", "group level '" + groups.levels[l] + "' has no rows");
    }
    return g;
}

namespace {

struct Builder {
    DesignBlocks blocks;

    int add_column(SparseColumn col, std::string name, std::string term, CoefRole role, int slot) {
        blocks.columns.push_back(std::move(col));
        blocks.coefs.push_back({std::move(name), std::move(term), role, slot});
        return blocks.coefficient_count() - 1;
    }

    int add_slot(std::string name, std::string term, SlotKind kind, int dim) {
        blocks.slots.push_back({std::move(name), std::move(term), kind, 0, 0, dim});
        return static_cast<int>(blocks.slots.size()) - 1;
    }

    void open_slot(int slot) { blocks.slots[slot].start = blocks.coefficient_count(); }
    void close_slot(int slot) { blocks.slots[slot].size = blocks.coefficient_count() - blocks.slots[slot].start; }
};

SparseColumn indicator(const std::vector<int>& codes, int level) {
    SparseColumn c;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i] == level) {
            c.rows.push_back(static_cast<int>(i));
            c.values.push_back(1.0);
        }
    }
    return c;
}

}  // namespace

DesignBlocks assemble(const ModelSpec& spec, const Dataset& raw, const Dataset* centroids) {
    Standardized st = standardize(raw, spec);
    const Dataset& data = st.data;
    Builder b;
    DesignBlocks& d = b.blocks;
    d.n = static_cast<int>(data.rows());
    d.family = spec.family;
    d.transforms = st.transforms;

    const auto& y = data.numeric(spec.response);
    d.response = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    d.offset = Eigen::VectorXd::Zero(d.n);
    if (spec.offset) {
        const auto& e = data.numeric(*spec.offset);
        for (int i = 0; i < d.n; ++i) {
            if (!(e[i] > 0.0)) throw Error("design", "nonpositive-offset", "expected counts must be positive");
            d.offset[i] = std::log(e[i]);
        }
    }

    auto is_categorical = [&](const std::string& name) {
        return spec.categorical.count(name) > 0 || data.column(name).kind == ColumnKind::categorical;
    };

    // Group (R) structure.
    const TermSpec* group_term = nullptr;
    std::vector<std::string> slope_names;
    for (const auto& t : spec.terms) {
        if (std::holds_alternative<RandomInterceptTerm>(t.kind) || std::holds_alternative<RandomSlopeTerm>(t.kind)) {
            group_term = &t;
        }
    }
    if (group_term) {
        std::string factor_name;
        std::vector<std::vector<double>> slopes;
        if (const auto* ri = std::get_if<RandomInterceptTerm>(&group_term->kind)) {
            factor_name = ri->group;
        } else {
            const auto& rs = std::get<RandomSlopeTerm>(group_term->kind);
            factor_name = rs.group;
            for (const auto& c : rs.covariates) {
                slopes.push_back(data.numeric(c));
                slope_names.push_back(c);
            }
        }
        d.group = build_random_blocks(group_term->name, data.factor(factor_name), slopes, slope_names);
    }

    int group_slot = -1;
    if (group_term) group_slot = b.add_slot(group_term->name, group_term->name, SlotKind::group_covariance, d.group->q());

    // b^R
    d.fixed_random.start = d.coefficient_count();
    if (d.group) {
        for (int j = 0; j < d.group->q(); ++j) {
            const int k = b.add_column(sparse_from(Eigen::VectorXd(d.group->xr.col(j))), d.group->column_names[j],
                                       group_term->name, CoefRole::fixed_random, -1);
            if (j == 0) d.intercept = k;
        }
    }
    d.fixed_random.size = d.coefficient_count() - d.fixed_random.start;

    // b^G, in term order
    d.fixed_general.start = d.coefficient_count();
    std::map<std::string, std::vector<int>> smooth_linear;
    for (const auto& t : spec.terms) {
        std::visit(overloaded{
                       [&](const InterceptTerm&) {
                           if (d.group) return;  // absorbed into b^R
                           d.intercept = b.add_column(sparse_from(std::vector<double>(d.n, 1.0)), "(intercept)", t.name,
                                                      CoefRole::fixed_general, -1);
                       },
                       [&](const LinearTerm& x) {
                           if (is_categorical(x.covariate)) {
                               const Factor f = data.factor(x.covariate);
                               for (int l = 1; l < static_cast<int>(f.levels.size()); ++l) {
                                   b.add_column(indicator(f.codes, l), x.covariate + "[" + f.levels[l] + "]", t.name,
                                                CoefRole::fixed_general, -1);
                               }
                           } else {
                               b.add_column(sparse_from(data.numeric(x.covariate)), x.covariate, t.name,
                                            CoefRole::fixed_general, -1);
                           }
                       },
                       [&](const SmoothTerm& x) {
                           smooth_linear[t.name].push_back(b.add_column(sparse_from(data.numeric(x.covariate)),
                                                                        t.name + ".linear", t.name,
                                                                        CoefRole::fixed_general, -1));
                       },
                       [&](const BivariateSmoothTerm& x) {
                           for (const auto& c : {x.first, x.second}) {
                               smooth_linear[t.name].push_back(b.add_column(sparse_from(data.numeric(c)),
                                                                            t.name + "." + c, t.name,
                                                                            CoefRole::fixed_general, -1));
                           }
                       },
                       [&](const auto&) {},
                   },
                   t.kind);
    }
    d.fixed_general.size = d.coefficient_count() - d.fixed_general.start;

    // u^R
    d.random_group.start = d.coefficient_count();
    if (d.group) {
        b.open_slot(group_slot);
        const auto& g = *d.group;
        for (int i = 0; i < g.groups(); ++i) {
            for (int j = 0; j < g.q(); ++j) {
                SparseColumn col;
                for (int r = 0; r < d.n; ++r) {
                    if (g.row_group[r] == i && g.xr(r, j) != 0.0) {
                        col.rows.push_back(r);
                        col.values.push_back(g.xr(r, j));
                    }
                }
                std::string name = g.term + "[" + g.labels[i] + "]";
                if (j > 0) name += "." + g.column_names[j];
                b.add_column(std::move(col), std::move(name), g.term, CoefRole::random_group, group_slot);
            }
        }
        b.close_slot(group_slot);
    }
    d.random_group.size = d.coefficient_count() - d.random_group.start;

    // Z^G blocks
    auto open_block = [&](const std::string& slot_name, const std::string& term) {
        const int s = b.add_slot(slot_name, term, SlotKind::block, 1);
        b.open_slot(s);
        return s;
    };
    auto close_block = [&](int s) {
        b.close_slot(s);
        d.general_blocks.push_back({d.slots[s].start, d.slots[s].size});
    };
    for (const auto& t : spec.terms) {
        std::visit(overloaded{
                       [&](const CrossedInterceptTerm& x) {
                           const Factor f = data.factor(x.factor);
                           const int s = open_block(t.name, t.name);
                           for (int l = 0; l < static_cast<int>(f.levels.size()); ++l) {
                               b.add_column(indicator(f.codes, l), t.name + "[" + f.levels[l] + "]", t.name,
                                            CoefRole::random_general, s);
                           }
                           close_block(s);
                       },
                       [&](const NestedInterceptTerm& x) {
                           const Factor outer = data.factor(x.outer);
                           const Factor inner = data.factor(x.inner);
                           std::vector<std::string> pair_levels;
                           std::vector<int> pair_codes(d.n);
                           std::map<std::pair<int, int>, int> index;
                           for (int r = 0; r < d.n; ++r) {
                               auto key = std::make_pair(outer.codes[r], inner.codes[r]);
                               auto [it, inserted] = index.emplace(key, static_cast<int>(pair_levels.size()));
                               if (inserted) pair_levels.push_back(outer.levels[key.first] + "/" + inner.levels[key.second]);
                               pair_codes[r] = it->second;
                           }
                           int s = open_block(t.name + ".outer", t.name);
                           for (int l = 0; l < static_cast<int>(outer.levels.size()); ++l) {
                               b.add_column(indicator(outer.codes, l), t.name + ".outer[" + outer.levels[l] + "]", t.name,
                                            CoefRole::random_general, s);
                           }
                           close_block(s);
                           s = open_block(t.name + ".inner", t.name);
                           for (int l = 0; l < static_cast<int>(pair_levels.size()); ++l) {
                               b.add_column(indicator(pair_codes, l), t.name + ".inner[" + pair_levels[l] + "]", t.name,
                                            CoefRole::random_general, s);
                           }
                           close_block(s);
                       },
                       [&](const SmoothTerm& x) {
                           const auto& z = data.numeric(x.covariate);
                           SmoothInfo info;
                           info.term = t.name;
                           info.basis = x.basis;
                           info.covariates = {x.covariate};
                           const Transform* tr = st.find(x.covariate);
                           info.transforms = {tr ? *tr : Transform{x.covariate, 0.0, 1.0}};
                           info.knots = select_knots(z, x.knots);
                           Eigen::MatrixXd basis;
                           if (x.basis == SmoothBasis::radial_cubic) {
                               info.inv_sqrt = radial_cubic_roots(info.knots).inv_sqrt;
                               basis = radial_cubic_raw(z, info.knots) * info.inv_sqrt;
                           } else {
                               basis = truncated_linear_basis(z, info.knots);
                           }
                           const auto& orig = raw.numeric(x.covariate);
                           const auto [lo, hi] = std::minmax_element(orig.begin(), orig.end());
                           info.observed_range[0] = {*lo, *hi};
                           info.linear_coefs = smooth_linear[t.name];
                           const int s = open_block(t.name, t.name);
                           for (Eigen::Index k = 0; k < basis.cols(); ++k) {
                               b.add_column(sparse_from(Eigen::VectorXd(basis.col(k))),
                                            t.name + ".basis[" + std::to_string(k + 1) + "]", t.name,
                                            CoefRole::random_general, s);
                           }
                           close_block(s);
                           info.basis_coefs = d.general_blocks.back();
                           d.smooths.push_back(std::move(info));
                       },
                       [&](const BivariateSmoothTerm& x) {
                           const auto& a = data.numeric(x.first);
                           const auto& c = data.numeric(x.second);
                           std::vector<Point2> pts(d.n);
                           for (int r = 0; r < d.n; ++r) pts[r] = {a[r], c[r]};
                           SmoothInfo info;
                           info.term = t.name;
                           info.bivariate = true;
                           info.kernel = x.kernel;
                           info.covariates = {x.first, x.second};
                           info.transforms = {Transform{x.first, 0.0, 1.0}, Transform{x.second, 0.0, 1.0}};
                           info.knots_2d = select_knots_2d(pts, x.knots);
                           info.range = x.range.value_or(max_pairwise_distance(info.knots_2d));
                           if (x.kernel == KrigingKernel::matern32 && !(info.range > 0.0)) {
                               throw Error("design", "degenerate-range", "Matern range must be positive for term '" + t.name + "'");
                           }
                           const Eigen::MatrixXd basis = kriging_basis(pts, info.knots_2d, x.kernel, info.range);
                           const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
                           const auto [clo, chi] = std::minmax_element(c.begin(), c.end());
                           info.observed_range[0] = {*alo, *ahi};
                           info.observed_range[1] = {*clo, *chi};
                           info.linear_coefs = smooth_linear[t.name];
                           const int s = open_block(t.name, t.name);
                           for (Eigen::Index k = 0; k < basis.cols(); ++k) {
                               b.add_column(sparse_from(Eigen::VectorXd(basis.col(k))),
                                            t.name + ".basis[" + std::to_string(k + 1) + "]", t.name,
                                            CoefRole::random_general, s);
                           }
                           close_block(s);
                           info.basis_coefs = d.general_blocks.back();
                           d.smooths.push_back(std::move(info));
                       },
                       [&](const auto&) {},
                   },
                   t.kind);
    }

    // Z^C
    d.spatial.start = d.coefficient_count();
    for (const auto& t : spec.terms) {
        const auto* car = std::get_if<SpatialCarTerm>(&t.kind);
        if (!car) continue;
        if (d.intercept < 0) {
            throw Error("design", "car-without-intercept", "spatial-car term '" + t.name + "' requires an intercept");
        }
        SpatialStructure s;
        s.term = t.name;
        const Factor f = data.factor(car->region);
        s.labels = f.levels;
        s.row_region = f.codes;
        s.centroids.assign(f.levels.size(), {NAN, NAN});
        if (car->centroids.empty()) {
            const auto& cx = data.numeric(car->x);
            const auto& cy = data.numeric(car->y);
            for (int r = 0; r < d.n; ++r) {
                Point2& c = s.centroids[f.codes[r]];
                if (!std::isnan(c[0]) && (c[0] != cx[r] || c[1] != cy[r])) {
                    throw Error("design", "inconsistent-centroid",
                                "region '" + f.levels[f.codes[r]] + "' has inconsistent centroid coordinates");
                }
                c = {cx[r], cy[r]};
            }
        } else {
            if (!centroids) throw Error("design", "missing-centroids", "centroid table '" + car->centroids + "' was not supplied");
            const Column& labels = centroids->column(car->region);
            const auto& cx = centroids->numeric(car->x);
            const auto& cy = centroids->numeric(car->y);
            std::map<std::string, Point2> lookup;
            for (std::size_t r = 0; r < labels.cells.size(); ++r) lookup[labels.cells[r]] = {cx[r], cy[r]};
            for (std::size_t l = 0; l < f.levels.size(); ++l) {
                auto it = lookup.find(f.levels[l]);
                if (it == lookup.end()) throw Error("design", "missing-centroid", "region '" + f.levels[l] + "' has no centroid row");
                s.centroids[l] = it->second;
            }
        }
        s.adjacency = build_car_adjacency(s.centroids, car->cutoff, s.labels);
        const int slot = b.add_slot(t.name, t.name, SlotKind::spatial, 1);
        b.open_slot(slot);
        for (int l = 0; l < static_cast<int>(s.labels.size()); ++l) {
            b.add_column(indicator(s.row_region, l), t.name + "[" + s.labels[l] + "]", t.name, CoefRole::spatial, slot);
        }
        b.close_slot(slot);
        d.car = std::move(s);
    }
    d.spatial.size = d.coefficient_count() - d.spatial.start;

    if (d.coefficient_count() == 0) throw Error("design", "empty-design", "the model has no coefficients");
    return std::move(b.blocks);
}

}  // namespace gdglmm
