#include "gdglmm/simulate.hpp"

#include "gdglmm/design.hpp"
#include "gdglmm/error.hpp"
#include "gdglmm/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gdglmm {

Scenario parse_scenario(const std::string& name) {
    if (name == "respiratory") return Scenario::respiratory;
    if (name == "caregiver") return Scenario::caregiver;
    if (name == "cancer-sir") return Scenario::cancer_sir;
    throw Error("cli", "unknown-scenario", "unknown scenario '" + name + "' (respiratory, caregiver, cancer-sir)");
}

std::string scenario_name(Scenario scenario) {
    switch (scenario) {
        case Scenario::respiratory: return "respiratory";
        case Scenario::caregiver: return "caregiver";
        case Scenario::cancer_sir: return "cancer-sir";
    }
    return "unknown";
}

namespace {

int poisson_draw(RandomStream& rng, double mean) {
    std::poisson_distribution<int> dist(mean);
    return dist(rng.engine());
}

double round_to(double x, double step) { return std::round(x / step) / std::round(1.0 / step); }

std::vector<double> grid_over(const std::vector<double>& x, int points) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = *lo + (*hi - *lo) * i / (points - 1);
    return g;
}

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

std::vector<std::string> labels(const std::vector<int>& ids) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(std::to_string(id));
    return out;
}

// Sinusoid over the observed covariate range, one full period.
struct Wave {
    double amplitude;
    double lo;
    double hi;
    double operator()(double x) const {
        return amplitude * std::sin(2.0 * std::numbers::pi * (x - lo) / (hi - lo));
    }
};

SimulatedStudy respiratory(std::uint64_t seed, const SimulationSize& size) {
    RandomStream rng(seed, 11);
    const int m = size.groups > 0 ? size.groups : 275;
    const int max_visits = size.max_visits > 0 ? size.max_visits : 6;
    if (max_visits < 2) throw Error("cli", "invalid-size", "respiratory needs at least 2 visits per child");
    const double amplitude = size.amplitude > 0.0 ? size.amplitude : 2.0;

    const double beta0 = -2.0;
    const double b_vita = 0.6;
    const double b_sex = -0.5;
    const double b_height = -0.04;
    const double b_stunted = 0.4;
    std::vector<double> b_visit{0.0, 0.3, -0.2, 0.1, -0.3, 0.2};
    b_visit.resize(static_cast<std::size_t>(max_visits), 0.0);
    const double sigma2_u = 0.8;
    // Ages are whole months; quarterly visits from a baseline age of 6..54 months.
    const double age_lo = 6.0;
    const double age_hi = 54.0 + 3.0 * (max_visits - 1);
    const Wave f{amplitude, age_lo, age_hi};

    std::vector<int> child;
    std::vector<double> visit, age, height, vita, sex, stunted, infection;
    std::vector<double> eta_fixed;
    for (int i = 0; i < m; ++i) {
        const double u = rng.normal(0.0, std::sqrt(sigma2_u));
        const double s = rng.uniform() < 0.5 ? 1.0 : 0.0;
        const double base_age = 6.0 + std::floor(rng.uniform() * 49.0);
        const int visits = std::min(max_visits, 1 + static_cast<int>(std::floor(rng.uniform() * max_visits)) + max_visits / 2);
        for (int j = 0; j < visits; ++j) {
            const double a = base_age + 3.0 * j;
            const double h = round_to(rng.normal(0.0, 5.0), 0.1);
            const double v = rng.uniform() < 0.2 ? 1.0 : 0.0;
            const double st = rng.uniform() < 0.25 ? 1.0 : 0.0;
            const double lin = beta0 + b_vita * v + b_sex * s + b_height * h + b_stunted * st + b_visit[j];
            const double eta = lin + u + f(a);
            const double p = 1.0 / (1.0 + std::exp(-eta));
            child.push_back(i + 1);
            visit.push_back(j + 1);
            age.push_back(a);
            height.push_back(h);
            vita.push_back(v);
            sex.push_back(s);
            stunted.push_back(st);
            infection.push_back(rng.uniform() < p ? 1.0 : 0.0);
        }
    }

    SimulatedStudy study;
    study.scenario = Scenario::respiratory;
    study.data.add(make_categorical_column("child", labels(child)));
    study.data.add(make_numeric_column("visit", visit));
    study.data.add(make_numeric_column("age", age));
    study.data.add(make_numeric_column("height", height));
    study.data.add(make_numeric_column("vitA", vita));
    study.data.add(make_numeric_column("sex", sex));
    study.data.add(make_numeric_column("stunted", stunted));
    study.data.add(make_numeric_column("infection", infection));

    study.truth = {{"(intercept)", beta0}, {"vitA", b_vita}, {"sex", b_sex}, {"height", b_height},
                   {"stunted", b_stunted}, {"sigma2[child]", sigma2_u}, {"amplitude", amplitude}};
    for (int j = 1; j < max_visits; ++j) study.truth["visit[" + std::to_string(j + 1) + "]"] = b_visit[j];

    // Population predictor: covariates at their sample means, U = 0.
    double level = beta0 + b_vita * mean_of(vita) + b_sex * mean_of(sex) + b_height * mean_of(height) +
                   b_stunted * mean_of(stunted);
    for (std::size_t r = 0; r < visit.size(); ++r) level += b_visit[static_cast<std::size_t>(visit[r]) - 1] / visit.size();
    study.smooth_covariate = "age";
    study.curve_grid = grid_over(age, 101);
    for (double a : study.curve_grid) {
        study.f_truth.push_back(f(a));
        study.curve_truth.push_back(level + f(a));
    }

    study.spec_text =
        "# logistic additive mixed model with a random child intercept\n"
        "[model]\n"
        "family = bernoulli-logit\n"
        "response = infection\n"
        "categorical = visit\n"
        "\n[terms]\n"
        "child = random-intercept child\n"
        "height = linear height\n"
        "vitA = linear vitA\n"
        "sex = linear sex\n"
        "stunted = linear stunted\n"
        "visit = linear visit\n"
        "age = smooth age basis=radial-cubic\n"
        "\n[priors]\n"
        "default = ig 0.01 0.01\n"
        "\n[sampler]\n"
        "seed = " + std::to_string(seed) + "\n";
    return study;
}

SimulatedStudy caregiver(std::uint64_t seed, const SimulationSize& size) {
    RandomStream rng(seed, 12);
    const int m = size.groups > 0 ? size.groups : 483;
    const int max_visits = size.max_visits > 0 ? size.max_visits : 15;
    if (max_visits < 2) throw Error("cli", "invalid-size", "caregiver needs at least 2 interviews per family");
    const double amplitude = size.amplitude > 0.0 ? size.amplitude : 0.3;

    const double beta0 = 1.2;
    const double b_mid = -0.2;
    const double b_high = -0.45;
    const double b_race = 0.3;
    const double sigma2_u = 0.3;
    const double age_hi = 2.0 * max_visits;  // months, roughly bimonthly interviews
    const Wave f{amplitude, 0.0, age_hi};
    const char* income_levels[3] = {"low", "middle", "high"};

    std::vector<int> family;
    std::vector<std::string> income;
    std::vector<double> race, age, stress;
    double level_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const double u = rng.normal(0.0, std::sqrt(sigma2_u));
        const double draw = rng.uniform();
        const int inc = draw < 0.35 ? 0 : (draw < 0.7 ? 1 : 2);
        const double r = rng.uniform() < 0.4 ? 1.0 : 0.0;
        const int visits = std::max(2, max_visits - static_cast<int>(std::floor(rng.uniform() * (max_visits / 2))));
        const double lin = beta0 + (inc == 1 ? b_mid : 0.0) + (inc == 2 ? b_high : 0.0) + b_race * r;
        for (int j = 0; j < visits; ++j) {
            const double a = round_to(std::min(age_hi, 2.0 * j + 2.0 * rng.uniform()), 0.1);
            const double mu = std::exp(lin + u + f(a));
            family.push_back(i + 1);
            income.push_back(income_levels[inc]);
            race.push_back(r);
            age.push_back(a);
            stress.push_back(std::min(16, poisson_draw(rng, mu)));
            level_sum += lin;
        }
    }

    SimulatedStudy study;
    study.scenario = Scenario::caregiver;
    study.data.add(make_categorical_column("family", labels(family)));
    study.data.add(make_categorical_column("income", income));
    study.data.add(make_numeric_column("race", race));
    study.data.add(make_numeric_column("age", age));
    study.data.add(make_numeric_column("stress", stress));

    study.truth = {{"(intercept)", beta0}, {"race", b_race}, {"sigma2[family]", sigma2_u}, {"amplitude", amplitude}};
    // treatment coding against the first level seen in the data
    const std::string reference = income.front();
    auto effect = [&](const std::string& level) {
        return level == "middle" ? b_mid : level == "high" ? b_high : 0.0;
    };
    for (const char* l : income_levels) {
        if (l != reference) study.truth["income[" + std::string(l) + "]"] = effect(l) - effect(reference);
    }
    study.truth["(intercept)"] = beta0 + effect(reference);

    const double level = level_sum / static_cast<double>(age.size());
    study.smooth_covariate = "age";
    study.curve_grid = grid_over(age, 101);
    for (double a : study.curve_grid) {
        study.f_truth.push_back(f(a));
        study.curve_truth.push_back(level + f(a));
    }

    study.spec_text =
        "# Poisson additive mixed model with a random family intercept\n"
        "[model]\n"
        "family = poisson-log\n"
        "response = stress\n"
        "categorical = income\n"
        "\n[terms]\n"
        "family = random-intercept family\n"
        "income = linear income\n"
        "race = linear race\n"
        "age = smooth age basis=radial-cubic knots=12\n"
        "\n[priors]\n"
        "default = folded-cauchy 25\n"
        "\n[sampler]\n"
        "seed = " + std::to_string(seed) + "\n";
    return study;
}

SimulatedStudy cancer_sir(std::uint64_t seed, const SimulationSize& size) {
    RandomStream rng(seed, 13);
    const int regions = size.groups > 0 ? size.groups : 45;
    if (regions < 5) throw Error("cli", "invalid-size", "cancer-sir needs at least 5 regions");
    const double amplitude = size.amplitude > 0.0 ? size.amplitude : 0.3;

    // Tract centroids (km) scattered around a pollution source at the origin,
    // keeping a 3 km exclusion zone and 1.5 km minimum separation.
    std::vector<Point2> centroids;
    const double half = 4.0 * std::sqrt(static_cast<double>(regions));
    int attempts = 0;
    while (static_cast<int>(centroids.size()) < regions) {
        if (++attempts > 1000000) throw Error("cli", "invalid-size", "could not place region centroids");
        const Point2 p{round_to((2.0 * rng.uniform() - 1.0) * half, 0.01), round_to((2.0 * rng.uniform() - 1.0) * half, 0.01)};
        if (std::hypot(p[0], p[1]) < 3.0) continue;
        bool clear = true;
        for (const auto& c : centroids) clear = clear && std::hypot(p[0] - c[0], p[1] - c[1]) >= 1.5;
        if (clear) centroids.push_back(p);
    }
    const Adjacency adj = build_car_adjacency(centroids, std::nullopt);

    // Intrinsic CAR draw through the Laplacian eigenbasis (null space dropped).
    const double sigma2_c = 0.05;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(adj.laplacian());
    Eigen::VectorXd uc = Eigen::VectorXd::Zero(regions);
    for (int k = 0; k < regions; ++k) {
        const double lambda = eig.eigenvalues()[k];
        if (lambda > 1e-9) uc += eig.eigenvectors().col(k) * rng.normal() * std::sqrt(sigma2_c / lambda);
    }
    uc.array() -= uc.mean();

    const double beta0 = 0.0;
    const double b_working = 0.01;
    std::vector<double> dist(regions), working(regions), expected(regions), observed(regions), xs(regions), ys(regions);
    std::vector<std::string> tract(regions);
    for (int i = 0; i < regions; ++i) {
        xs[i] = centroids[i][0];
        ys[i] = centroids[i][1];
        dist[i] = round_to(std::hypot(xs[i], ys[i]), 0.01);
        working[i] = round_to(40.0 + 30.0 * rng.uniform(), 0.1);
        expected[i] = round_to(5.0 + 25.0 * rng.uniform(), 0.01);
        tract[i] = "T" + std::to_string(i + 1);
    }
    const double dlo = *std::min_element(dist.begin(), dist.end());
    const double dhi = *std::max_element(dist.begin(), dist.end());
    // Elevated risk near the source, decaying over the observed distances.
    auto f = [&](double d) { return amplitude * std::cos(std::numbers::pi * (d - dlo) / (dhi - dlo)); };
    for (int i = 0; i < regions; ++i) {
        const double eta = beta0 + b_working * working[i] + f(dist[i]) + uc[i];
        observed[i] = poisson_draw(rng, expected[i] * std::exp(eta));
    }

    SimulatedStudy study;
    study.scenario = Scenario::cancer_sir;
    study.data.add(make_categorical_column("tract", tract));
    study.data.add(make_numeric_column("x_km", xs));
    study.data.add(make_numeric_column("y_km", ys));
    study.data.add(make_numeric_column("dist", dist));
    study.data.add(make_numeric_column("working", working));
    study.data.add(make_numeric_column("expected", expected));
    study.data.add(make_numeric_column("observed", observed));

    study.truth = {{"(intercept)", beta0}, {"working", b_working}, {"sigma2[tract]", sigma2_c},
                   {"amplitude", amplitude}, {"cutoff_km", adj.cutoff}};
    for (int i = 0; i < regions; ++i) study.truth["tract[" + tract[i] + "]"] = uc[i];

    const double level = beta0 + b_working * mean_of(working);
    study.smooth_covariate = "dist";
    study.curve_grid = grid_over(dist, 101);
    for (double d : study.curve_grid) {
        study.f_truth.push_back(f(d));
        study.curve_truth.push_back(level + f(d));
    }

    study.spec_text =
        "# Poisson spatial model for standardized incidence ratios\n"
        "[model]\n"
        "family = poisson-log\n"
        "response = observed\n"
        "offset = expected\n"
        "\n[terms]\n"
        "intercept = intercept\n"
        "working = linear working\n"
        "dist = smooth dist basis=radial-cubic\n"
        "tract = spatial-car tract x_km y_km\n"
        "\n[priors]\n"
        "default = ig 0.01 0.01\n"
        "\n[sampler]\n"
        "burnin = 15000\n"
        "seed = " + std::to_string(seed) + "\n";
    return study;
}

std::string csv_field(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

}  // namespace

SimulatedStudy simulate(Scenario scenario, std::uint64_t seed, const SimulationSize& size) {
    switch (scenario) {
        case Scenario::respiratory: return respiratory(seed, size);
        case Scenario::caregiver: return caregiver(seed, size);
        case Scenario::cancer_sir: return cancer_sir(seed, size);
    }
    throw Error("cli", "unknown-scenario", "unknown scenario");
}

std::string to_csv(const Dataset& data) {
    std::ostringstream out;
    const auto& cols = data.all();
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << csv_field(cols[j].name);
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << csv_field(cols[j].cells[r]);
        out << '\n';
    }
    return out.str();
}

}  // namespace gdglmm
