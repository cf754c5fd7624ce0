// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance --only 4   run a single criterion
//   acceptance --pilot    rerun the envelope calibration for criterion 8

#include "gdglmm/cli.hpp"
#include "gdglmm/design.hpp"
#include "gdglmm/diagnostics.hpp"
#include "gdglmm/family.hpp"
#include "gdglmm/oracle.hpp"
#include "gdglmm/output.hpp"
#include "gdglmm/postprocess.hpp"
#include "gdglmm/priors.hpp"
#include "gdglmm/sampler.hpp"
#include "gdglmm/simulate.hpp"

#include <boost/math/distributions/inverse_gamma.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gdglmm;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// pinned tolerances

namespace tol {
constexpr double ac1_mc_se = 3.0;
constexpr double ac1_sd_rel = 0.10;
constexpr double ac1_seconds = 60.0;
constexpr double ac2_abs = 0.05;
constexpr double ac2_seconds = 120.0;
constexpr double ac3_curvature = 1e-8;
constexpr double ac3_fd_step = 1e-3;
constexpr double ac3_seconds = 10.0;
constexpr double ac4_reconstruction = 1e-8;
constexpr double ac4_laplacian = 1e-12;
constexpr double ac5_mc_se = 3.0;
constexpr double ac5_seconds = 300.0;
constexpr double ac6_mc_se = 3.0;
constexpr double ac7_threshold = 1.01;
constexpr int ac7_required = 95;
// Frozen from the pilot (acceptance --pilot): worst max-abs error over pilot
// seeds 101..105 was 5.262 on the logit scale (seed 101, at the sparse
// upper age edge; the other four seeds stayed below 2.3). The envelope is
// that value times 1.25, rounded up to one decimal.
constexpr double ac8_envelope = 6.6;
constexpr double ac8_seconds = 900.0;
}  // namespace tol

constexpr std::uint64_t kAc8SimulationSeed = 2026;
constexpr std::uint64_t kAc8FitSeed = 1;
constexpr int kAc8Groups = 100;
constexpr double kAc8Amplitude = 2.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Dataset csv(const std::string& text) {
    std::istringstream in(text);
    return load_dataset(in);
}

fs::path work_dir(const std::string& name) {
    fs::path dir = fs::current_path() / "acceptance_work" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Pooled posterior mean and its Monte Carlo standard error (ESS summed over chains).
struct Estimate {
    double mean;
    double mc_se;
};

Estimate estimate(const std::vector<Series>& chains) {
    Series all;
    double n_eff = 0.0;
    for (const auto& c : chains) {
        all.insert(all.end(), c.begin(), c.end());
        n_eff += ess(c);
    }
    const Summary s = summarize(all);
    return {s.mean, s.sd / std::sqrt(n_eff)};
}

// ---------------------------------------------------------------------------
// 1. Gaussian oracle equivalence

Outcome ac1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::normal_distribution<double> z;
    std::ostringstream text;
    text << "y,x1,x2,x3,g\n";
    for (int i = 0; i < 50; ++i) {
        const double x1 = z(rng), x2 = z(rng), x3 = z(rng);
        const double u = (i % 4) * 0.4 - 0.6;
        text << 0.5 + x1 - 0.5 * x2 + 0.25 * x3 + u + z(rng) << ',' << x1 << ',' << x2 << ',' << x3 << ",g" << i % 4 << '\n';
    }
    const ModelSpec spec = parse_model_spec(
        "[model]\nfamily = gaussian-identity\nresponse = y\n[terms]\ng = random-intercept g\n"
        "x1 = linear x1\nx2 = linear x2\nx3 = linear x3\n[priors]\ng = fixed 0.5\n"
        "[sampler]\nchains = 4\nburnin = 1000\nkept = 5000\nthin = 1\nseed = 11\n");
    const CompiledModel model = compile(spec, csv(text.str()));
    const DesignBlocks& d = *model.blocks;
    if (d.coefficient_count() != 8) return {false, "expected 8 coefficients, got " + std::to_string(d.coefficient_count())};

    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(8, 8);
    for (int k = 0; k < 8; ++k) v(k, k) = d.coefs[k].slot < 0 ? model.fixed_variance : 0.5;
    const auto exact = oracle::gaussian_closed_form(d.full_design(), d.response, v);

    const ChainStore store(run_chains(model, spec.sampler));
    double worst_z = 0.0, worst_sd = 0.0;
    for (int k = 0; k < 8; ++k) {
        const Estimate e = estimate(store.per_chain(k));
        worst_z = std::max(worst_z, std::abs(e.mean - exact.mean[k]) / e.mc_se);
        const double sd = summarize(store.pooled(k)).sd;
        const double true_sd = std::sqrt(exact.covariance(k, k));
        worst_sd = std::max(worst_sd, std::abs(sd - true_sd) / true_sd);
    }
    const double secs = seconds_since(t0);
    return {worst_z < tol::ac1_mc_se && worst_sd < tol::ac1_sd_rel && secs < tol::ac1_seconds,
            "max |mean - exact|/mcse = " + fmt(worst_z) + ", max sd rel err = " + fmt(worst_sd) + ", " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Quadrature oracle equivalence

Outcome ac2() {
    const auto t0 = Clock::now();
    const double fixed_variance = 10.0;
    const std::vector<double> y{1, 0, 1, 1};
    const std::vector<int> group{0, 0, 1, 1};
    const ModelSpec spec = parse_model_spec(
        "[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ng = random-intercept g\n"
        "[priors]\nfixed-variance = 10\ng = fixed 1\n"
        "[sampler]\nchains = 4\nburnin = 1000\nkept = 50000\nthin = 1\nseed = 21\n");
    const Dataset data = csv("y,g\n1,a\n0,a\n1,b\n1,b\n");

    auto logd = [&](std::span<const double> v) {
        double s = -0.5 * v[0] * v[0] / fixed_variance - 0.5 * (v[1] * v[1] + v[2] * v[2]);
        for (int i = 0; i < 4; ++i) {
            const double eta = v[0] + v[1 + group[i]];
            s += y[i] * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)));
        }
        return s;
    };
    const auto grid = oracle::grid_posterior(logd, {{-15.0, 15.0, 161}, {-8.0, 8.0, 161}, {-8.0, 8.0, 161}});

    const FitResult f = fit(spec, data);
    const int k = f.store.parameter("(intercept)");
    const double sampled = summarize(f.store.pooled(k)).mean;
    const double diff = std::abs(sampled - grid.means[0]);
    const double secs = seconds_since(t0);
    return {diff < tol::ac2_abs && secs < tol::ac2_seconds,
            "sampler " + fmt(sampled) + " vs grid " + fmt(grid.means[0]) + " (|diff| " + fmt(diff) + "), " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 3. Log-concavity of the coordinate conditionals

Outcome ac3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = -INFINITY;
    int checked = 0;
    for (Family family : {Family::bernoulli_logit, Family::poisson_log}) {
        for (int model_i = 0; model_i < 20; ++model_i) {
            // a random mixed model: random intercept, one linear covariate, one smooth
            const int groups = 3 + model_i % 5, per = 4 + model_i % 3;
            std::ostringstream text;
            text << "y,x,t,g\n";
            for (int i = 0; i < groups; ++i) {
                for (int j = 0; j < per; ++j) {
                    const double y = family == Family::poisson_log ? std::floor(4.0 * u01(rng)) : (u01(rng) < 0.4 ? 1.0 : 0.0);
                    text << y << ',' << z(rng) << ',' << std::round(100.0 * u01(rng)) << ",g" << i << '\n';
                }
            }
            const std::string spec_text = std::string("[model]\nfamily = ") + std::string(family_name(family)) +
                                          "\nresponse = y\n[terms]\ng = random-intercept g\nx = linear x\ns = smooth t knots=4\n";
            const CompiledModel model = compile(parse_model_spec(spec_text), csv(text.str()));
            ChainState state = initial_state(model, 31 + model_i, model_i);
            for (int s = 0; s < 5; ++s) gibbs_sweep(state, model);
            const auto& y = model.blocks->response;
            const std::vector<double> yv(y.data(), y.data() + y.size());
            const int p = model.blocks->coefficient_count();
            for (int trial = 0; trial < 50; ++trial) {
                const int k = static_cast<int>(u01(rng) * p) % p;
                const auto& col = model.working_columns[k];
                if (col.nonzeros() == 0) continue;
                const double precision = std::exp(2.0 * z(rng));
                const CoordinateConditional cond(family, col, yv, state.eta.values(), state.nu[k], precision, z(rng));
                const double x = state.nu[k] + 2.0 * z(rng);
                const double second = oracle::fd_derivative([&](double v) { return cond(v); }, x, 2, tol::ac3_fd_step);
                worst = std::max(worst, second);
                ++checked;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {checked >= 1000 && worst <= tol::ac3_curvature && secs < tol::ac3_seconds,
            std::to_string(checked) + " triples, max second derivative " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 4. Basis reconstruction and the Laplacian identity

Outcome ac4() {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> z;
    double worst_basis = 0.0;
    int instances = 0;
    while (instances < 100) {
        std::vector<double> pool(40 + instances);
        for (double& v : pool) v = u(rng);
        const int k = 2 + static_cast<int>(instances % 34);
        KnotSet knots;
        try {
            knots = select_knots(pool, k);
        } catch (const Error&) {
            continue;
        }
        std::vector<double> x(30);
        for (double& v : x) v = u(rng);
        const PenaltyRoots roots = radial_cubic_roots(knots);
        const Eigen::MatrixXd c = radial_cubic_raw(x, knots);
        const Eigen::MatrixXd zx = radial_cubic_basis(x, knots);
        worst_basis = std::max(worst_basis, (zx * roots.sqrt - c).cwiseAbs().maxCoeff());
        ++instances;
    }

    double worst_lap = 0.0;
    for (int g = 0; g < 100; ++g) {
        const int n = 3 + g % 28;
        std::vector<Point2> pts(n);
        for (auto& p : pts) p = {5.0 * u(rng), 5.0 * u(rng)};
        const Adjacency a = build_car_adjacency(pts, std::nullopt);
        Eigen::VectorXd v(n);
        for (auto& x : v) x = z(rng);
        double pairs = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j : a.neighbors[i]) {
                if (i < j) pairs += (v[i] - v[j]) * (v[i] - v[j]);
            }
        }
        worst_lap = std::max(worst_lap, std::abs(v.dot(a.laplacian() * v) - pairs));
    }
    return {worst_basis < tol::ac4_reconstruction && worst_lap < tol::ac4_laplacian,
            "max reconstruction error " + fmt(worst_basis) + ", max Laplacian error " + fmt(worst_lap)};
}

// ---------------------------------------------------------------------------
// 5. Centering invariance

Outcome ac5() {
    const auto t0 = Clock::now();
    const int m = 20, n = 10;
    std::mt19937_64 rng(51);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u01;
    std::ostringstream text;
    text << "y,x,g\n";
    for (int i = 0; i < m; ++i) {
        const double ui = z(rng);
        for (int j = 0; j < n; ++j) {
            const double x = z(rng);
            const double p = 1.0 / (1.0 + std::exp(-(-0.5 + 0.8 * x + ui)));
            text << (u01(rng) < p) << ',' << x << ",g" << i + 1 << '\n';
        }
    }
    const Dataset data = csv(text.str());
    const std::string base =
        "[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ng = random-intercept g\nx = linear x\n[sampler]\nseed = 52\ncentering = ";
    const FitResult on = fit(parse_model_spec(base + "on\n"), data);
    const FitResult off = fit(parse_model_spec(base + "off\n"), data);
    if (!on.model.centered || off.model.centered) return {false, "centering flags not honoured"};

    auto level = [&](const FitResult& f, int i) {
        const int b0 = f.store.parameter("(intercept)");
        const int ui = f.store.parameter("g[g" + std::to_string(i + 1) + "]");
        std::vector<Series> chains;
        for (int c = 0; c < f.store.chains(); ++c) {
            Series s = f.store.series(b0, c);
            const Series us = f.store.series(ui, c);
            for (std::size_t t = 0; t < s.size(); ++t) s[t] += us[t];
            chains.push_back(std::move(s));
        }
        return estimate(chains);
    };
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const Estimate a = level(on, i), b = level(off, i);
        worst = std::max(worst, std::abs(a.mean - b.mean) / std::hypot(a.mc_se, b.mc_se));
    }
    const double secs = seconds_since(t0);
    return {worst < tol::ac5_mc_se && secs < tol::ac5_seconds,
            "max |centered - uncentered| / mcse = " + fmt(worst) + " over " + std::to_string(m) + " groups, " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------
// 6. Conjugate updates against exact inverse-gamma quantiles

double worst_quantile_z(std::vector<double> draws, const boost::math::inverse_gamma_distribution<double>& target) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double p = 0.05 + 0.1 * k;
        const double q = boost::math::quantile(target, p);
        const double se = std::sqrt(p * (1.0 - p) / n) / boost::math::pdf(target, q);
        const double pos = p * (n - 1.0);
        const auto lo = static_cast<std::size_t>(pos);
        const double emp = draws[lo] + (pos - lo) * (draws[std::min(lo + 1, draws.size() - 1)] - draws[lo]);
        worst = std::max(worst, std::abs(emp - q) / se);
    }
    return worst;
}

Outcome ac6() {
    const int n = 100000;
    RandomStream rng(61, 0);

    const InverseGamma prior{2.5, 1.5};
    const std::vector<double> u{0.4, -1.1, 0.7, 2.0, -0.3};
    double q = 0.0;
    for (double v : u) q += v * v;
    std::vector<double> ig(n);
    for (double& d : ig) d = conjugate_sigma2_update(prior, u, rng);
    const double z_ig = worst_quantile_z(ig, boost::math::inverse_gamma_distribution<double>(2.5 + 2.5, 1.5 + q / 2.0));

    const double nu0 = 3.0, s0 = 2.0;
    std::vector<Eigen::VectorXd> effects;
    for (double v : u) effects.push_back(Eigen::VectorXd::Constant(1, v));
    const WishartPrior wp{nu0, Eigen::MatrixXd::Constant(1, 1, s0)};
    std::vector<double> iw(n);
    for (double& d : iw) d = invwishart_update(wp, effects, rng)(0, 0);
    const double z_iw = worst_quantile_z(iw, boost::math::inverse_gamma_distribution<double>((nu0 + 5.0) / 2.0, (s0 + q) / 2.0));

    return {z_ig < tol::ac6_mc_se && z_iw < tol::ac6_mc_se,
            "max decile |z|: inverse-gamma " + fmt(z_ig) + ", inverse-Wishart q=1 " + fmt(z_iw)};
}

// ---------------------------------------------------------------------------
// 7. Diagnostics calibration

Outcome ac7() {
    const int n = 5000;
    RandomStream base(71, 0);
    Series s(n);
    for (double& v : s) v = base.normal();
    const double same = rhat({s, s, s, s});
    const bool exact = same == std::sqrt((n - 1.0) / n);

    int below = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<Series> chains;
        for (int c = 0; c < 4; ++c) {
            RandomStream r(7100 + rep, c);
            Series x(n);
            for (double& v : x) v = r.normal();
            chains.push_back(std::move(x));
        }
        if (rhat(chains) < tol::ac7_threshold) ++below;
    }
    return {exact && below >= tol::ac7_required,
            std::string("identical chains ") + (exact ? "exact" : "NOT exact") + ", " + std::to_string(below) +
                "/100 iid repetitions below " + fmt(tol::ac7_threshold)};
}

// ---------------------------------------------------------------------------
// 8. End-to-end recovery on the respiratory scenario

struct RecoveryRun {
    double max_error;
    double vita_lo, vita_hi, vita_truth;
    double seconds;
};

std::map<std::string, std::vector<std::string>> read_table(const fs::path& path, const std::string& key) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::vector<std::string>> out;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        (void)key;
        out[cells.front()] = cells;
    }
    return out;
}

RecoveryRun recovery(std::uint64_t sim_seed, const fs::path& dir) {
    const auto t0 = Clock::now();
    cli::SimulateRequest req;
    req.scenario = "respiratory";
    req.seed = sim_seed;
    req.out_dir = (dir / "sim").string();
    req.size.groups = kAc8Groups;
    req.size.amplitude = kAc8Amplitude;
    if (cli::cmd_simulate(req, std::cerr) != 0) throw std::runtime_error("simulate failed");

    cli::RunManifest m;
    m.spec_path = (dir / "sim" / "spec.txt").string();
    m.data_path = (dir / "sim" / "data.csv").string();
    m.out_dir = (dir / "fit").string();
    m.seed = kAc8FitSeed;
    if (cli::cmd_fit(m, std::cerr) != 0) throw std::runtime_error("fit failed");

    const Dataset curve = load_dataset_file((dir / "fit" / "curve_age.csv").string());
    const Dataset truth = load_dataset_file((dir / "sim" / "truth_curve.csv").string());
    RecoveryRun r{};
    const auto& fitted = curve.numeric("mean");
    const auto& eta = truth.numeric("eta");
    if (fitted.size() != eta.size()) throw std::runtime_error("curve grids differ");
    for (std::size_t i = 0; i < eta.size(); ++i) r.max_error = std::max(r.max_error, std::abs(fitted[i] - eta[i]));

    const auto summary = read_table(dir / "fit" / "posterior_summary.csv", "parameter");
    const auto truths = read_table(dir / "sim" / "truth.csv", "parameter");
    r.vita_lo = std::stod(summary.at("vitA")[3]);
    r.vita_hi = std::stod(summary.at("vitA")[5]);
    r.vita_truth = std::stod(truths.at("vitA")[1]);
    r.seconds = seconds_since(t0);
    return r;
}

Outcome ac8() {
    const RecoveryRun r = recovery(kAc8SimulationSeed, work_dir("ac8"));
    const bool covers = r.vita_lo <= r.vita_truth && r.vita_truth <= r.vita_hi;
    return {r.max_error < tol::ac8_envelope && covers && r.seconds < tol::ac8_seconds,
            "max |curve - truth| = " + fmt(r.max_error) + " (envelope " + fmt(tol::ac8_envelope) + "), vitA 95% [" +
                fmt(r.vita_lo) + ", " + fmt(r.vita_hi) + "] vs truth " + fmt(r.vita_truth) + ", " + fmt(r.seconds) + " s"};
}

int pilot() {
    double worst = 0.0;
    for (std::uint64_t seed = 101; seed <= 105; ++seed) {
        const RecoveryRun r = recovery(seed, work_dir("pilot_" + std::to_string(seed)));
        std::cout << "pilot seed " << seed << " max error " << fmt(r.max_error) << " vitA [" << fmt(r.vita_lo) << ", "
                  << fmt(r.vita_hi) << "] " << fmt(r.seconds) << " s" << std::endl;
        worst = std::max(worst, r.max_error);
    }
    std::cout << "pilot worst " << fmt(worst) << ", envelope " << fmt(std::ceil(12.5 * worst) / 10.0) << std::endl;
    return 0;
}

// ---------------------------------------------------------------------------
// 9. Sensitivity protocol on the criterion-8 data

Outcome ac9() {
    const fs::path dir = work_dir("ac9");
    cli::SimulateRequest req;
    req.scenario = "respiratory";
    req.seed = kAc8SimulationSeed;
    req.out_dir = (dir / "sim").string();
    req.size.groups = kAc8Groups;
    req.size.amplitude = kAc8Amplitude;
    if (cli::cmd_simulate(req, std::cerr) != 0) return {false, "simulate failed"};
    ModelSpec spec = parse_model_spec_file((dir / "sim" / "spec.txt").string());
    spec.sampler.seed = kAc8FitSeed;
    const Dataset data = load_dataset_file((dir / "sim" / "data.csv").string(), spec.categorical);

    auto roster = default_roster();
    const std::string control = roster.front().label + " (control)";
    roster.push_back({control, roster.front().prior});
    const SensitivityTable table = sensitivity_run(spec, data, nullptr, roster);
    {
        std::ofstream out(dir / "sensitivity.csv");
        write_sensitivity(out, table);
    }
    if (!table.failures.empty()) return {false, "aborted fits: " + table.failures.front()};

    int finite = 0, total = 0, control_rows = 0, control_zero = 0;
    for (const auto& r : table.rows) {
        if (r.prior == control) {
            ++control_rows;
            control_zero += r.pct_delta_mean == 0.0 && r.pct_delta_width == 0.0;
        } else {
            ++total;
            finite += std::isfinite(r.pct_delta_mean);
        }
    }
    const bool ok = table.comparisons.size() == 4 && total > 0 && finite == total && control_rows > 0 && control_zero == control_rows;
    return {ok, std::to_string(finite) + "/" + std::to_string(total) + " finite %dmean over " +
                    std::to_string(table.comparisons.size() - 1) + " comparator priors, control rows zero: " +
                    std::to_string(control_zero) + "/" + std::to_string(control_rows)};
}

// ---------------------------------------------------------------------------
// 10. Determinism regardless of parallelism

Outcome ac10() {
    const fs::path dir = work_dir("ac10");
    int compared = 0, differing = 0;
    for (const char* scenario : {"respiratory", "cancer-sir"}) {
        cli::SimulateRequest req;
        req.scenario = scenario;
        req.seed = 1001;
        req.out_dir = (dir / scenario / "sim").string();
        req.size.groups = std::string(scenario) == "respiratory" ? 60 : 0;
        if (cli::cmd_simulate(req, std::cerr) != 0) return {false, std::string("simulate failed for ") + scenario};
        std::vector<fs::path> outs;
        for (int threads : {1, 4, 1}) {
            cli::RunManifest m;
            m.spec_path = (dir / scenario / "sim" / "spec.txt").string();
            m.data_path = (dir / scenario / "sim" / "data.csv").string();
            m.out_dir = (dir / scenario / ("fit" + std::to_string(outs.size()))).string();
            m.chains = 4;
            m.burnin = 1000;
            m.kept = 500;
            m.thin = 2;
            m.threads = threads;
            m.dump_draws = true;
            if (cli::cmd_fit(m, std::cerr) != 0) return {false, std::string("fit failed for ") + scenario};
            outs.emplace_back(m.out_dir);
        }
        for (const auto& entry : fs::directory_iterator(outs[0])) {
            for (std::size_t k = 1; k < outs.size(); ++k) {
                ++compared;
                if (slurp(entry.path()) != slurp(outs[k] / entry.path().filename())) ++differing;
            }
        }
    }
    return {compared > 0 && differing == 0,
            std::to_string(compared) + " file comparisons across 1 and 4 threads, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--pilot") return pilot();
        if (a == "--only" && i + 1 < argc) {
            only = std::stoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--only N] [--pilot]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gaussian oracle equivalence", ac1},
        {"quadrature oracle equivalence", ac2},
        {"log-concavity of coordinate conditionals", ac3},
        {"basis reconstruction and Laplacian identity", ac4},
        {"centering invariance", ac5},
        {"conjugate update distributions", ac6},
        {"diagnostics calibration", ac7},
        {"end-to-end recovery", ac8},
        {"sensitivity protocol", ac9},
        {"determinism across parallelism", ac10},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (only && only != id) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " AC" << id << " " << criteria[i].first << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
