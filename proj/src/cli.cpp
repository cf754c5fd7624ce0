#include "gdglmm/cli.hpp"

#include "gdglmm/error.hpp"
#include "gdglmm/output.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace gdglmm::cli {

namespace fs = std::filesystem;

namespace {

void report(std::ostream& err, const std::string& module, const std::string& code, const std::string& message) {
    std::string one_line = message;
    for (char& c : one_line) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    err << "error module=" << module << " code=" << code << ": " << one_line << '\n';
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli", "unwritable", "cannot write '" + path.string() + "'");
    return out;
}

void prepare_out_dir(const std::string& dir) {
    if (dir.empty()) throw Error("cli", "usage", "--out is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("cli", "unwritable", "cannot create output directory '" + dir + "'");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        report(err, e.module(), e.code(), e.what());
        if (e.code() == "usage") return 2;
    } catch (const std::exception& e) {
        report(err, "cli", "internal", e.what());
    }
    return 1;
}

struct Inputs {
    ModelSpec spec;
    Dataset data;
    std::optional<Dataset> centroids;
    const Dataset* centroid_ptr() const { return centroids ? &*centroids : nullptr; }
};

Inputs load_inputs(const RunManifest& m) {
    if (m.spec_path.empty()) throw Error("cli", "usage", "--spec is required");
    if (m.data_path.empty()) throw Error("cli", "usage", "--data is required");
    Inputs in;
    in.spec = parse_model_spec_file(m.spec_path);
    if (!fs::exists(m.data_path)) throw Error("data", "unreadable", "data file '" + m.data_path + "' does not exist");
    in.data = load_dataset_file(m.data_path, in.spec.categorical);

    std::string centroid_path = m.centroids_path;
    if (centroid_path.empty()) {
        for (const auto& t : in.spec.terms) {
            if (const auto* car = std::get_if<SpatialCarTerm>(&t.kind); car && !car->centroids.empty()) {
                fs::path p(car->centroids);
                if (p.is_relative()) p = fs::path(m.spec_path).parent_path() / p;
                centroid_path = p.string();
            }
        }
    }
    if (!centroid_path.empty()) {
        std::set<std::string> labels;
        for (const auto& t : in.spec.terms) {
            if (const auto* car = std::get_if<SpatialCarTerm>(&t.kind)) labels.insert(car->region);
        }
        in.centroids = load_dataset_file(centroid_path, labels);
    }

    auto positive = [](const std::optional<int>& v, const char* what, bool allow_zero) {
        if (v && (*v < 0 || (*v == 0 && !allow_zero))) {
            throw Error("cli", "usage", std::string("--") + what + " must be " + (allow_zero ? "nonnegative" : "positive"));
        }
    };
    positive(m.chains, "chains", false);
    positive(m.burnin, "burnin", true);
    positive(m.kept, "kept", false);
    positive(m.thin, "thin", false);
    if (m.seed) in.spec.sampler.seed = *m.seed;
    if (m.chains) in.spec.sampler.chains = *m.chains;
    if (m.burnin) in.spec.sampler.burnin = *m.burnin;
    if (m.kept) in.spec.sampler.kept = *m.kept;
    if (m.thin) in.spec.sampler.thin = *m.thin;
    return in;
}

}  // namespace

int cmd_fit(const RunManifest& manifest, std::ostream& err) {
    return guarded(err, [&] {
        const Inputs in = load_inputs(manifest);
        prepare_out_dir(manifest.out_dir);
        const fs::path out(manifest.out_dir);

        const FitResult result = fit(in.spec, in.data, in.centroid_ptr(), std::nullopt, manifest.threads);
        const auto diagnostics = diagnose(result.store);
        {
            auto f = open_output(out / "posterior_summary.csv");
            write_summary(f, diagnostics);
        }
        {
            auto f = open_output(out / "diagnostics.csv");
            write_diagnostics(f, diagnostics);
        }
        for (int c = 0; c < result.store.chains(); ++c) {
            auto f = open_output(out / ("trace_chain" + std::to_string(c + 1) + ".csv"));
            write_trace(f, result.store.names(), result.store.chain(c), false);
            if (manifest.dump_draws) {
                auto g = open_output(out / ("draws_chain" + std::to_string(c + 1) + ".csv"));
                write_trace(g, result.store.names(), result.store.chain(c), true);
            }
        }
        CurveOptions options;
        options.scale = manifest.scale;
        for (const auto& s : result.blocks().smooths) {
            const CurveSummary curve = curve_posterior(result, s.term, options);
            auto f = open_output(out / ("curve_" + s.term + ".csv"));
            write_curve(f, curve, s.covariates);
        }
        if (result.blocks().car && result.spec.offset && result.spec.family == Family::poisson_log) {
            auto f = open_output(out / "sir.csv");
            write_sir(f, sir_hat(result));
        }
        if (manifest.dump_design) {
            std::vector<std::string> names;
            for (const auto& c : result.blocks().coefs) names.push_back(c.name);
            auto f = open_output(out / "design.csv");
            write_matrix(f, names, result.blocks().full_design());
        }
        {
            auto f = open_output(out / "spec_used.txt");
            f << serialize_model_spec(result.spec);
        }
        return 0;
    });
}

int cmd_simulate(const SimulateRequest& request, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario scenario = parse_scenario(request.scenario);
        if (request.size.groups < 0 || request.size.max_visits < 0 || request.size.amplitude < 0.0) {
            throw Error("cli", "usage", "size knobs must be nonnegative");
        }
        const SimulatedStudy study = simulate(scenario, request.seed, request.size);
        prepare_out_dir(request.out_dir);
        const fs::path out(request.out_dir);
        {
            auto f = open_output(out / "data.csv");
            f << to_csv(study.data);
        }
        {
            auto f = open_output(out / "truth.csv");
            f << "parameter,value\n";
            for (const auto& [k, v] : study.truth) f << k << ',' << format_exact(v) << '\n';
        }
        {
            auto f = open_output(out / "truth_curve.csv");
            f << study.smooth_covariate << ",f,eta\n";
            for (std::size_t i = 0; i < study.curve_grid.size(); ++i) {
                f << format_exact(study.curve_grid[i]) << ',' << format_exact(study.f_truth[i]) << ','
                  << format_exact(study.curve_truth[i]) << '\n';
            }
        }
        {
            auto f = open_output(out / "spec.txt");
            f << study.spec_text;
        }
        return 0;
    });
}

int cmd_sensitivity(const RunManifest& manifest, const std::vector<std::string>& roster, std::ostream& err) {
    return guarded(err, [&] {
        std::vector<LabeledPrior> priors;
        if (roster.empty()) {
            priors = default_roster();
        } else {
            for (const auto& text : roster) priors.push_back({text, parse_var_comp_prior(text)});
        }
        if (priors.size() < 2) throw Error("cli", "usage", "a sensitivity roster needs a baseline and at least one comparator");
        const Inputs in = load_inputs(manifest);
        prepare_out_dir(manifest.out_dir);
        const SensitivityTable table = sensitivity_run(in.spec, in.data, in.centroid_ptr(), priors, std::nullopt, manifest.threads);
        auto f = open_output(fs::path(manifest.out_dir) / "sensitivity.csv");
        write_sensitivity(f, table);
        for (const auto& failure : table.failures) report(err, "postprocess", "aborted-fit", failure);
        return table.failures.empty() ? 0 : 1;
    });
}

int cmd_diagnose(const std::vector<std::string>& draw_files, const std::string& out_dir, std::ostream& err) {
    return guarded(err, [&] {
        if (draw_files.empty()) throw Error("cli", "usage", "--draws needs at least one file");
        std::vector<std::string> names;
        std::vector<Eigen::MatrixXd> chains;
        for (const auto& path : draw_files) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw Error("data", "unreadable", "cannot open draw file '" + path + "'");
            std::vector<std::string> these;
            Eigen::MatrixXd draws;
            read_trace(in, these, draws);
            if (!names.empty() && these != names) throw Error("diagnostics", "unequal-lengths", "draw files disagree in parameters");
            names = these;
            chains.push_back(std::move(draws));
        }
        const ChainStore store(names, chains);
        const auto rows = diagnose(store);
        prepare_out_dir(out_dir);
        {
            auto f = open_output(fs::path(out_dir) / "diagnostics.csv");
            write_diagnostics(f, rows);
        }
        auto f = open_output(fs::path(out_dir) / "posterior_summary.csv");
        write_summary(f, rows);
        return 0;
    });
}

namespace {

void add_run_flags(CLI::App* app, RunManifest& m, std::string& scale) {
    app->add_option("--spec", m.spec_path, "model spec file")->required();
    app->add_option("--data", m.data_path, "delimited data file")->required();
    app->add_option("--centroids", m.centroids_path, "centroid table for a spatial-car term");
    app->add_option("--out", m.out_dir, "output directory")->required();
    app->add_option("--seed", m.seed, "random seed");
    app->add_option("--chains", m.chains, "number of chains");
    app->add_option("--burnin", m.burnin, "burn-in sweeps");
    app->add_option("--kept", m.kept, "kept draws per chain");
    app->add_option("--thin", m.thin, "thinning factor");
    app->add_option("--threads", m.threads, "worker threads (0 = all cores)");
    app->add_flag("--dump-draws", m.dump_draws, "write full-precision draws per chain");
    app->add_flag("--dump-design", m.dump_design, "write the assembled design matrix");
    app->add_option("--scale", scale, "curve scale")->check(CLI::IsMember({"link", "response"}));
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Bayesian generalized linear mixed models with general design, fitted by MCMC"};
    app.require_subcommand(1);

    RunManifest fit_manifest;
    std::string fit_scale = "link";
    auto* fit_cmd = app.add_subcommand("fit", "fit a model and write summaries");
    add_run_flags(fit_cmd, fit_manifest, fit_scale);

    RunManifest sens_manifest;
    std::string sens_scale = "link";
    std::vector<std::string> roster;
    auto* sens_cmd = app.add_subcommand("sensitivity", "refit under a roster of variance-component priors");
    add_run_flags(sens_cmd, sens_manifest, sens_scale);
    sens_cmd->add_option("--prior", roster, "roster entry, e.g. \"folded-cauchy 25\" (first is the baseline)");

    SimulateRequest sim;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a built-in case study");
    sim_cmd->add_option("--scenario", sim.scenario, "respiratory, caregiver or cancer-sir")->required();
    sim_cmd->add_option("--seed", sim.seed, "random seed");
    sim_cmd->add_option("--out", sim.out_dir, "output directory")->required();
    sim_cmd->add_option("--groups", sim.size.groups, "children, families or regions");
    sim_cmd->add_option("--max-visits", sim.size.max_visits, "maximum repeated measures per group");
    sim_cmd->add_option("--amplitude", sim.size.amplitude, "amplitude of the true smooth on the link scale");

    std::vector<std::string> draw_files;
    std::string diag_out;
    auto* diag_cmd = app.add_subcommand("diagnose", "recompute diagnostics from draw files");
    diag_cmd->add_option("--draws", draw_files, "one draws file per chain")->required();
    diag_cmd->add_option("--out", diag_out, "output directory")->required();

    RunManifest val_manifest;
    auto* val_cmd = app.add_subcommand("validate", "check a spec against a data file");
    val_cmd->add_option("--spec", val_manifest.spec_path, "model spec file")->required();
    val_cmd->add_option("--data", val_manifest.data_path, "delimited data file")->required();
    val_cmd->add_option("--centroids", val_manifest.centroids_path, "centroid table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report(std::cerr, "cli", "usage", e.what());
        return 2;
    }

    if (fit_cmd->parsed()) {
        fit_manifest.scale = fit_scale == "response" ? CurveScale::response : CurveScale::link;
        return cmd_fit(fit_manifest, std::cerr);
    }
    if (sens_cmd->parsed()) return cmd_sensitivity(sens_manifest, roster, std::cerr);
    if (sim_cmd->parsed()) return cmd_simulate(sim, std::cerr);
    if (diag_cmd->parsed()) return cmd_diagnose(draw_files, diag_out, std::cerr);
    if (val_cmd->parsed()) {
        return guarded(std::cerr, [&] {
            const Inputs in = load_inputs(val_manifest);
            const ValidationReport r = validate(in.spec, in.data, in.centroid_ptr());
            for (const auto& v : r.violations) report(std::cerr, "spec", "invalid-model", v);
            if (r.ok()) std::cout << "ok\n";
            return r.ok() ? 0 : 1;
        });
    }
    return 2;
}

}  // namespace gdglmm::cli
