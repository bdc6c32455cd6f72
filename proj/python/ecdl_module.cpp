#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ecdl/ensemble.hpp"
#include "ecdl/error.hpp"
#include "ecdl/evaluation.hpp"
#include "ecdl/parallel.hpp"
#include "ecdl/simulation.hpp"

namespace py = pybind11;
using namespace ecdl;

namespace {

LambdaRule lambda_rule(std::optional<double> lambda, double kappa) {
    if (lambda) return FixedLambda{*lambda};
    return UniversalLambda{kappa};
}

DlConfig dl_config(std::optional<double> lambda, double kappa, double kappa_nodewise, double alpha, double tolerance,
                   int max_iterations, unsigned workers) {
    DlConfig config;
    config.solver.lambda_rule = lambda_rule(lambda, kappa);
    config.solver.tolerance = tolerance;
    config.solver.max_iterations = max_iterations;
    config.nodewise_lambda = UniversalLambda{kappa_nodewise};
    config.alpha = alpha;
    config.workers = workers;
    return config;
}

py::array_t<std::int64_t> index_array(const std::vector<Index>& values) {
    py::array_t<std::int64_t> out(static_cast<py::ssize_t>(values.size()));
    auto view = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < values.size(); ++i) view(static_cast<py::ssize_t>(i)) = values[i];
    return out;
}

std::vector<char> as_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& values) {
    auto view = values.unchecked<1>();
    std::vector<char> mask(static_cast<std::size_t>(view.shape(0)));
    for (py::ssize_t i = 0; i < view.shape(0); ++i) mask[static_cast<std::size_t>(i)] = view(i) ? 1 : 0;
    return mask;
}

py::dict dl_dict(const DLResult& r) {
    py::dict out;
    out["estimates"] = r.w_hat;
    out["omega_diag"] = r.omega_diag;
    out["sigma_hat"] = r.sigma_hat;
    out["p_values"] = r.p_values;
    out["z_scores"] = r.z_scores;
    out["ci_lower"] = r.ci_lower;
    out["ci_upper"] = r.ci_upper;
    out["lambda"] = r.lasso.lambda;
    out["converged"] = r.all_converged;
    return out;
}

py::dict simulated_dict(const SimulatedInstance& sim) {
    py::dict out;
    out["X"] = sim.model.design;
    out["y"] = sim.model.response;
    out["noise"] = sim.model.noise;
    out["w_star"] = sim.truth.w_star;
    out["support"] = index_array(sim.truth.support);
    py::array_t<bool> neutral(static_cast<py::ssize_t>(sim.truth.neutral_mask.size()));
    for (std::size_t i = 0; i < sim.truth.neutral_mask.size(); ++i)
        neutral.mutable_at(static_cast<py::ssize_t>(i)) = sim.truth.neutral_mask[i] != 0;
    out["neutral"] = neutral;
    out["sigma_star"] = sim.truth.sigma_star;
    out["realized_snr"] = sim.truth.realized_snr;
    out["shape"] = sim.truth.shape;
    return out;
}

}  // namespace

PYBIND11_MODULE(_ecdl, m) {
    m.doc() = "Ensemble of clustered desparsified Lasso: inference for high-dimensional linear models.";

    static py::exception<Error> error(m, "EcdlError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("universal_lambda", &universal_lambda, py::arg("n"), py::arg("p"), py::arg("kappa") = 1.0);

    m.def(
        "fit_lasso",
        [](const Matrix& x, const Vector& y, std::optional<double> lambda, double kappa, double tolerance,
           int max_iterations) {
            SolverConfig config;
            config.lambda_rule = lambda_rule(lambda, kappa);
            config.tolerance = tolerance;
            config.max_iterations = max_iterations;
            const auto design = standardize(x);
            LassoFit fit;
            {
                py::gil_scoped_release release;
                fit = fit_lasso(design, y, config);
            }
            py::dict out;
            out["coefficients"] = design.to_original_scale(fit.coefficients);
            out["intercept"] = fit.intercept;
            out["lambda"] = fit.lambda;
            out["converged"] = fit.converged;
            out["dual_gap"] = fit.dual_gap;
            out["n_iterations"] = fit.n_iterations;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("lam") = py::none(), py::arg("kappa") = 1.0, py::arg("tolerance") = 1e-6,
        py::arg("max_iterations") = 10000,
        "Lasso on standardized columns; coefficients are returned on the original column scale.");

    m.def(
        "desparsified_lasso",
        [](const Matrix& x, const Vector& y, std::optional<double> lambda, double kappa, double kappa_nodewise,
           double alpha, double tolerance, int max_iterations, unsigned workers) {
            const auto config = dl_config(lambda, kappa, kappa_nodewise, alpha, tolerance, max_iterations, workers);
            DLResult r;
            {
                py::gil_scoped_release release;
                r = desparsified_lasso(x, y, config);
            }
            return dl_dict(r);
        },
        py::arg("X"), py::arg("y"), py::arg("lam") = py::none(), py::arg("kappa") = 1.0,
        py::arg("kappa_nodewise") = 1.0, py::arg("alpha") = 0.05, py::arg("tolerance") = 1e-6,
        py::arg("max_iterations") = 10000, py::arg("workers") = 1);

    m.def(
        "ward_cluster",
        [](const Matrix& rows, const std::vector<Index>& shape, Index n_clusters) {
            ClusterLabeling labeling;
            {
                py::gil_scoped_release release;
                labeling = ward_cluster(rows, grid_connectivity(shape), n_clusters);
            }
            return index_array(labeling.labels);
        },
        py::arg("X"), py::arg("shape"), py::arg("n_clusters"),
        "Grid-constrained Ward clustering of the columns of X; returns one label per column.");

    m.def(
        "cdl",
        [](const Matrix& x, const Vector& y, const std::vector<Index>& shape, Index n_clusters, double fraction,
           double alpha, double kappa, double kappa_nodewise, std::uint64_t seed) {
            CdlConfig config;
            config.n_clusters = n_clusters;
            config.subsample_fraction = fraction;
            config.dl = dl_config(std::nullopt, kappa, kappa_nodewise, alpha, 1e-6, 10000, 1);
            config.seed = seed;
            CdlResult r;
            {
                py::gil_scoped_release release;
                r = cdl_infer(x, y, grid_connectivity(shape), config);
            }
            py::dict out;
            out["p_values"] = r.p_values;
            out["z_scores"] = r.z_scores;
            out["ci_lower"] = r.ci_lower;
            out["ci_upper"] = r.ci_upper;
            out["labels"] = index_array(r.labeling.labels);
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("shape"), py::arg("n_clusters") = 500,
        py::arg("subsample_fraction") = 0.7, py::arg("alpha") = 0.05, py::arg("kappa") = 1.0,
        py::arg("kappa_nodewise") = 1.0, py::arg("seed") = 0);

    m.def(
        "ecdl",
        [](const Matrix& x, const Vector& y, const std::vector<Index>& shape, Index n_clusters, Index repetitions,
           double fraction, double kappa, double kappa_nodewise, std::uint64_t seed, std::optional<unsigned> workers) {
            CdlConfig config;
            config.n_clusters = n_clusters;
            config.subsample_fraction = fraction;
            config.dl = dl_config(std::nullopt, kappa, kappa_nodewise, 0.05, 1e-6, 10000, 1);
            config.seed = seed;
            EcdlResult r;
            {
                py::gil_scoped_release release;
                r = ecdl_infer(x, y, grid_connectivity(shape), config, repetitions,
                               workers.value_or(default_workers()));
            }
            py::dict out;
            out["p_values"] = r.aggregated_p;
            out["z_scores"] = r.consensus_z;
            out["per_repetition_p_values"] = r.per_repetition.values;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("shape"), py::arg("n_clusters") = 500, py::arg("repetitions") = 25,
        py::arg("subsample_fraction") = 0.7, py::arg("kappa") = 1.0, py::arg("kappa_nodewise") = 1.0,
        py::arg("seed") = 0, py::arg("workers") = py::none());

    m.def("aggregate_pvalues", &aggregate_pvalues, py::arg("p_values"),
          "Column-wise min(1, 2 * median) of a repetitions x features matrix.");

    m.def(
        "simulate_1d",
        [](Index n, Index p, double rho, Index support_size, double sigma_star, std::optional<double> target_snr,
           std::uint64_t seed) {
            Sim1DSpec spec;
            spec.n = n;
            spec.p = p;
            spec.rho = rho;
            spec.support_size = support_size;
            spec.sigma_star = sigma_star;
            spec.target_snr = target_snr;
            spec.seed = seed;
            return simulated_dict(generate_1d(spec));
        },
        py::arg("n") = 100, py::arg("p") = 2000, py::arg("rho") = 0.95, py::arg("support_size") = 50,
        py::arg("sigma_star") = 10.0, py::arg("target_snr") = py::none(), py::arg("seed") = 0);

    m.def(
        "simulate_3d",
        [](Index edge_length, Index n, Index roi_width, double sigma_smooth, double sigma_star,
           std::optional<double> target_snr, Index neutral_margin, std::uint64_t seed) {
            Sim3DSpec spec;
            spec.edge_length = edge_length;
            spec.n = n;
            spec.roi_width = roi_width;
            spec.sigma_smooth = sigma_smooth;
            spec.sigma_star = sigma_star;
            spec.target_snr = target_snr;
            spec.neutral_margin = neutral_margin;
            spec.seed = seed;
            return simulated_dict(generate_3d(spec));
        },
        py::arg("edge_length") = 50, py::arg("n") = 400, py::arg("roi_width") = 6, py::arg("sigma_smooth") = 2.0,
        py::arg("sigma_star") = 8.0, py::arg("target_snr") = py::none(), py::arg("neutral_margin") = 5,
        py::arg("seed") = 0);

    m.def(
        "recall_at_precision",
        [](const Vector& scores, const py::array_t<bool, py::array::c_style | py::array::forcecast>& labels,
           std::optional<py::array_t<bool, py::array::c_style | py::array::forcecast>> exclude, double min_precision) {
            const auto mask = as_mask(labels);
            const auto excluded = exclude ? as_mask(*exclude) : std::vector<char>{};
            return precision_recall(scores, mask, excluded).recall_at_precision(min_precision);
        },
        py::arg("scores"), py::arg("labels"), py::arg("exclude") = py::none(), py::arg("min_precision") = 0.9);

    m.def(
        "jaccard", [](const std::vector<Index>& a, const std::vector<Index>& b) { return jaccard(a, b); },
        py::arg("a"), py::arg("b"));
    m.def("map_correlation", &map_correlation, py::arg("a"), py::arg("b"));
}
