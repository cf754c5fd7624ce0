#include "gdglmm/dataset.hpp"
#include "gdglmm/diagnostics.hpp"
#include "gdglmm/error.hpp"
#include "gdglmm/model_spec.hpp"
#include "gdglmm/sampler.hpp"
#include "gdglmm/simulate.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace gdglmm;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict simulate_py(const std::string& scenario, std::uint64_t seed, int groups, int max_visits, double amplitude) {
    SimulationSize size;
    size.groups = groups;
    size.max_visits = max_visits;
    size.amplitude = amplitude;
    const SimulatedStudy study = simulate(parse_scenario(scenario), seed, size);
    py::dict out;
    out["csv"] = to_csv(study.data);
    out["spec"] = study.spec_text;
    out["truth"] = study.truth;
    out["smooth_covariate"] = study.smooth_covariate;
    out["curve_grid"] = to_numpy(study.curve_grid);
    out["curve_truth"] = to_numpy(study.curve_truth);
    return out;
}

py::dict fit_py(const std::string& spec_text, const std::string& data_csv, std::optional<std::uint64_t> seed,
                std::optional<int> chains, std::optional<int> burnin, std::optional<int> kept,
                std::optional<int> thin, int threads) {
    ModelSpec spec = parse_model_spec(spec_text);
    if (seed) spec.sampler.seed = *seed;
    if (chains) spec.sampler.chains = *chains;
    if (burnin) spec.sampler.burnin = *burnin;
    if (kept) spec.sampler.kept = *kept;
    if (thin) spec.sampler.thin = *thin;

    std::istringstream in(data_csv);
    const Dataset data = load_dataset(in, spec.categorical);

    std::vector<ChainOutput> outputs;
    std::vector<std::string> names;
    {
        py::gil_scoped_release release;
        const CompiledModel model = compile(spec, data);
        outputs = run_chains(model, spec.sampler, threads);
    }
    const ChainStore store(outputs);
    names = store.names();

    const auto c = static_cast<py::ssize_t>(store.chains());
    const auto n = static_cast<py::ssize_t>(store.draws());
    const auto p = static_cast<py::ssize_t>(names.size());
    py::array_t<double> draws({c, n, p});
    auto view = draws.mutable_unchecked<3>();
    for (py::ssize_t k = 0; k < c; ++k) {
        const Eigen::MatrixXd& m = store.chain(static_cast<int>(k));
        for (py::ssize_t t = 0; t < n; ++t)
            for (py::ssize_t j = 0; j < p; ++j) view(k, t, j) = m(t, j);
    }

    std::vector<double> mean, sd, q025, q500, q975, rh, es, mcse;
    for (const auto& d : diagnose(store)) {
        mean.push_back(d.summary.mean);
        sd.push_back(d.summary.sd);
        q025.push_back(d.summary.q025);
        q500.push_back(d.summary.q500);
        q975.push_back(d.summary.q975);
        rh.push_back(d.rhat);
        es.push_back(d.ess);
        mcse.push_back(d.mc_se);
    }
    py::dict summary;
    summary["mean"] = to_numpy(mean);
    summary["sd"] = to_numpy(sd);
    summary["q2.5"] = to_numpy(q025);
    summary["q50"] = to_numpy(q500);
    summary["q97.5"] = to_numpy(q975);
    summary["sqrt_rhat"] = to_numpy(rh);
    summary["ess"] = to_numpy(es);
    summary["mc_se"] = to_numpy(mcse);

    py::dict out;
    out["names"] = names;
    out["draws"] = draws;
    out["summary"] = summary;
    return out;
}

double rhat_py(py::array_t<double, py::array::c_style | py::array::forcecast> chains) {
    if (chains.ndim() != 2) throw Error("diagnostics", "shape", "expected a (chains, draws) array");
    auto v = chains.unchecked<2>();
    std::vector<Series> series(static_cast<std::size_t>(v.shape(0)));
    for (py::ssize_t k = 0; k < v.shape(0); ++k)
        for (py::ssize_t t = 0; t < v.shape(1); ++t) series[static_cast<std::size_t>(k)].push_back(v(k, t));
    return rhat(series);
}

double ess_py(py::array_t<double, py::array::c_style | py::array::forcecast> series) {
    if (series.ndim() != 1) throw Error("diagnostics", "shape", "expected a one-dimensional array");
    return ess(std::span<const double>(series.data(), static_cast<std::size_t>(series.size())));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bayesian generalized linear mixed models fitted by MCMC";

    static PyObject* error_type = PyErr_NewException("gdglmm._core.GdglmmError", PyExc_ValueError, nullptr);
    m.attr("GdglmmError") = py::handle(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error_type)(py::str(e.what()));
            exc.attr("module") = e.module();
            exc.attr("code") = e.code();
            PyErr_SetObject(error_type, exc.ptr());
        }
    });

    m.def("normalize_spec", [](const std::string& text) { return serialize_model_spec(parse_model_spec(text)); },
          py::arg("text"), "Parse a model spec and return its canonical text.");
    m.def("simulate", &simulate_py, py::arg("scenario"), py::arg("seed") = 1, py::arg("groups") = 0,
          py::arg("max_visits") = 0, py::arg("amplitude") = 0.0);
    m.def("fit", &fit_py, py::arg("spec"), py::arg("data"), py::arg("seed") = py::none(),
          py::arg("chains") = py::none(), py::arg("burnin") = py::none(), py::arg("kept") = py::none(),
          py::arg("thin") = py::none(), py::arg("threads") = 0);
    m.def("rhat", &rhat_py, py::arg("chains"));
    m.def("ess", &ess_py, py::arg("series"));
}
