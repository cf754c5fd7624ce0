#include "helpers.hpp"

#include "gdglmm/design.hpp"
#include "gdglmm/error.hpp"
#include "gdglmm/model_spec.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gdglmm;
using test_support::csv;

namespace {

const char* kFullSpec = R"(# every term kind once
[model]
family = bernoulli-logit
response = y
categorical = site

[terms]
int = intercept
x = linear x
site = linear site
g = random-slope g x
h = crossed-intercept h
nest = nested-intercept a b
s = smooth x basis=truncated-linear knots=5
bv = bivariate-smooth x z kernel=matern32 knots=9 range=2.5

[priors]
fixed-variance = 1000
default = folded-cauchy 25
g = inv-wishart 3 [[1, 0], [0, 1]]
h = uniform-sigma 100
s = fixed 0.5

[sampler]
chains = 2
burnin = 10
kept = 20
thin = 3
seed = 99
centering = off
)";

std::string expect_spec_error(const std::string& text) {
    try {
        parse_model_spec(text);
    } catch (const Error& e) {
        CHECK(e.module() == "spec");
        return e.code();
    }
    FAIL("parse succeeded");
    return {};
}

const char* kSmallData = "y,x,g\n0,1.5,a\n1,2.5,a\n1,0.5,b\n0,3.0,b\n1,2.0,c\n0,1.0,c\n";

}  // namespace

TEST_CASE("family line maps to the enum") {
    auto s = parse_model_spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ni = intercept\n");
    CHECK(s.family == Family::bernoulli_logit);
    s = parse_model_spec("[model]\nfamily = poisson-log\nresponse = y\n[terms]\ni = intercept\n");
    CHECK(s.family == Family::poisson_log);
}

TEST_CASE("categorical list accepts commas or spaces") {
    const auto a = parse_model_spec("[model]\nfamily = poisson-log\nresponse = y\ncategorical = a, b c\n[terms]\ni = intercept\n");
    CHECK(a.categorical == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("ig prior line parses to IG(0.01, 0.01)") {
    const VarCompPrior p = parse_var_comp_prior("ig 0.01 0.01");
    REQUIRE(std::holds_alternative<InverseGamma>(p));
    CHECK(std::get<InverseGamma>(p) == InverseGamma{0.01, 0.01});
    CHECK(std::get<FoldedCauchy>(parse_var_comp_prior("folded-cauchy 25")).scale == 25.0);
    CHECK(std::get<FoldedT>(parse_var_comp_prior("folded-t 2 3")) == FoldedT{2.0, 3.0});
    CHECK(std::get<UniformSigma>(parse_var_comp_prior("uniform-sigma 100")).upper == 100.0);
    CHECK_THROWS_AS(parse_var_comp_prior("ig 0.01"), Error);
    CHECK_THROWS_AS(parse_var_comp_prior("gamma 1 1"), Error);
}

TEST_CASE("duplicate term names are rejected") {
    CHECK(expect_spec_error("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\nage = linear a\nage = linear b\n") ==
          "duplicate-term");
}

TEST_CASE("malformed documents report coded errors") {
    CHECK(expect_spec_error("[model]\nfamily = probit\nresponse = y\n[terms]\ni = intercept\n") == "unknown-family");
    CHECK(expect_spec_error("[oops]\n") == "unknown-section");
    CHECK(expect_spec_error("[terms]\nx = wiggle x\n") == "unknown-term-kind");
    CHECK(expect_spec_error("[terms]\ns = smooth x colour=red\n") == "malformed-term");
    CHECK(expect_spec_error("[model]\nfamily = bernoulli-logit\nresponse = y\noffset = e\n[terms]\ni = intercept\n") ==
          "offset-family");
}

TEST_CASE("spec parsing captures every field") {
    const ModelSpec s = parse_model_spec(kFullSpec);
    CHECK(s.response == "y");
    CHECK(s.categorical.count("site") == 1);
    REQUIRE(s.terms.size() == 8);
    CHECK(std::holds_alternative<RandomSlopeTerm>(s.find_term("g")->kind));
    const auto& sm = std::get<SmoothTerm>(s.find_term("s")->kind);
    CHECK(sm.basis == SmoothBasis::truncated_linear);
    CHECK(sm.knots == 5);
    const auto& bv = std::get<BivariateSmoothTerm>(s.find_term("bv")->kind);
    CHECK(bv.kernel == KrigingKernel::matern32);
    CHECK(bv.range == doctest::Approx(2.5));
    CHECK(s.priors.fixed_variance == 1000.0);
    CHECK(s.priors.held.at("s") == 0.5);
    CHECK(std::holds_alternative<WishartPrior>(s.priors.overrides.at("g")));
    CHECK(s.sampler.chains == 2);
    CHECK(s.sampler.total_sweeps() == 10 + 20 * 3);
    CHECK(s.sampler.seed == 99);
    CHECK(s.sampler.centering == false);
}

TEST_CASE("parse . serialize . parse is a fixed point") {
    const ModelSpec a = parse_model_spec(kFullSpec);
    const std::string once = serialize_model_spec(a);
    const ModelSpec b = parse_model_spec(once);
    CHECK(serialize_model_spec(b) == once);
    CHECK(a.terms == b.terms);
    CHECK(a.categorical == b.categorical);
    CHECK(a.priors.held == b.priors.held);
    CHECK(a.sampler.seed == b.sampler.seed);
    CHECK(a.sampler.centering == b.sampler.centering);
}

TEST_CASE("load_dataset detects numeric and categorical columns") {
    const Dataset d = csv("x\n1\n2\n3\n");
    CHECK(d.rows() == 3);
    CHECK(d.column("x").kind == ColumnKind::numeric);

    const Dataset labels = csv("g\na\nb\na\n");
    const Column& g = labels.column("g");
    CHECK(g.kind == ColumnKind::categorical);
    CHECK(g.levels == std::vector<std::string>{"a", "b"});
    CHECK(g.codes == std::vector<int>{0, 1, 0});

    try {
        d.column("missing");
        FAIL("expected missing-column");
    } catch (const Error& e) {
        CHECK(e.code() == "missing-column");
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }
    CHECK_THROWS_AS(csv("a,b\n1,2\n3\n"), Error);
}

TEST_CASE("standardize uses the sample sd") {
    const Dataset d = csv("y,x\n0,1\n1,2\n0,3\n");
    const ModelSpec s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\nx = linear x\n");
    const Standardized z = standardize(d, s);
    const auto& v = z.data.numeric("x");
    CHECK(v[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(z.find("x") != nullptr);
    CHECK(z.find("x")->mean == 2.0);
    CHECK(z.find("x")->sd == 1.0);

    // already standardized: unchanged up to rounding
    Dataset again = z.data;
    const Standardized twice = standardize(again, s);
    for (int i = 0; i < 3; ++i) CHECK(twice.data.numeric("x")[i] == doctest::Approx(v[i]).epsilon(1e-14));

    const Dataset flat = csv("y,x\n0,5\n1,5\n0,5\n");
    try {
        standardize(flat, s);
        FAIL("expected degenerate-covariate");
    } catch (const Error& e) {
        CHECK(e.code() == "degenerate-covariate");
    }
}

TEST_CASE("standardized columns have mean 0 and sd 1 to 1e-12") {
    std::mt19937_64 rng(4);
    std::lognormal_distribution<double> dist(3.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::ostringstream text;
        text << "y,x\n";
        const int n = 5 + rep * 7;
        for (int i = 0; i < n; ++i) text << (i % 2) << ',' << dist(rng) << '\n';
        const ModelSpec s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\nx = linear x\n");
        const auto z = standardize(csv(text.str()), s).data.numeric("x");
        double m = 0.0;
        for (double v : z) m += v;
        m /= n;
        double ss = 0.0;
        for (double v : z) ss += (v - m) * (v - m);
        CHECK(std::abs(m) < 1e-12);
        CHECK(std::abs(std::sqrt(ss / (n - 1)) - 1.0) < 1e-12);
    }
}

TEST_CASE("indicator columns stay unstandardized") {
    const Dataset d = csv("y,x,w\n0,1,0\n1,2,1\n0,3,1\n1,4,0\n");
    const ModelSpec s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\nx = linear x\nw = linear w\n");
    const auto cols = standardized_columns(s, d);
    CHECK(cols == std::vector<std::string>{"x"});
}

TEST_CASE("validate lists absent columns and missing centroids") {
    const Dataset d = csv(kSmallData);
    ModelSpec s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ni = intercept\nw = linear nope\n");
    auto r = validate(s, d);
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations.front().find("nope") != std::string::npos);

    s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ni = intercept\nx = linear x\ng = random-intercept g\n");
    CHECK(validate(s, d).ok());

    const Dataset cent = csv("g,cx,cy\na,0,0\nb,1,0\n", {"g"});
    s = test_support::spec(
        "[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\ni = intercept\nc = spatial-car g cx cy centroids=c.csv\n");
    r = validate(s, d, &cent);
    REQUIRE_FALSE(r.ok());
    bool names_region = false;
    for (const auto& v : r.violations) names_region |= v.find("'c'") != std::string::npos || v.find(" c") != std::string::npos;
    CHECK(names_region);
}

TEST_CASE("validate succeeds exactly when assemble does") {
    const Dataset d = csv(kSmallData);
    const std::vector<std::string> bodies = {
        "i = intercept\nx = linear x\n",
        "i = intercept\nx = linear missing\n",
        "g = random-intercept g\n",
        "g = random-slope g x\n",
        "i = intercept\ns = smooth x knots=2\n",
        "i = intercept\ns = smooth x knots=30\n",
        "i = intercept\ns = smooth g\n",
        "x = linear x\nq = random-intercept nope\n",
        "i = intercept\nh = crossed-intercept g\n",
        "i = intercept\nc = spatial-car g x x\n",
    };
    for (const auto& body : bodies) {
        const ModelSpec s = test_support::spec("[model]\nfamily = bernoulli-logit\nresponse = y\n[terms]\n" + body);
        const bool valid = validate(s, d).ok();
        bool assembled = true;
        try {
            assemble(s, d);
        } catch (const Error&) {
            assembled = false;
        }
        CAPTURE(body);
        CHECK(valid == assembled);
    }
}
