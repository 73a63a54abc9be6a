#include "gofmult/errors.hpp"
#include "gofmult/families.hpp"
#include "gofmult/gof.hpp"
#include "gofmult/harness.hpp"
#include "gofmult/mvcdf.hpp"
#include "gofmult/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gofmult;

namespace {

Dataset to_dataset(const RowMatrix& x) { return Dataset(x); }

RowMatrix as_rows(const RowMatrix& x, int dim) {
    // a 1-d array arrives as a column for univariate families
    if (dim == 1 && x.cols() != 1 && x.rows() == 1) return x.transpose();
    return x;
}

Statistic statistic_arg(const std::string& s) {
    const auto v = parse_statistic(s);
    if (!v) throw py::value_error("unknown statistic '" + s + "'");
    return *v;
}

GofOptions options(int grid_size, const std::string& weights, bool analytic, unsigned threads) {
    GofOptions o;
    o.grid_size = grid_size;
    const auto w = parse_weights(weights);
    if (!w) throw py::value_error("weights must be 'normal' or 'rademacher'");
    o.weights = *w;
    o.fit.use_analytic_grads = analytic;
    o.threads = threads;
    return o;
}

py::dict result_dict(const GofResult& r) {
    py::dict d;
    d["statistic"] = to_string(r.statistic);
    d["method"] = to_string(r.method);
    d["observed"] = r.observed;
    d["pvalue"] = r.pvalue;
    d["replicates"] = r.replicates;
    d["theta"] = r.theta;
    d["failed_replicates"] = r.failed_replicates;
    d["valid"] = r.valid;
    d["seconds"] = r.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gofmult, m) {
    m.doc() = "Goodness-of-fit tests for parametric families with estimated parameters";
    m.attr("__version__") = kVersion;

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<DegenerateData>(m, "DegenerateData", base.ptr());
    py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
    py::register_exception<SingularInformation>(m, "SingularInformation", base.ptr());
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

    py::class_<Family, std::shared_ptr<Family>>(m, "Family")
        .def_property_readonly("id", &Family::id)
        .def_property_readonly("dim", &Family::dim)
        .def_property_readonly("param_names", &Family::param_names)
        .def("cdf",
             [](const Family& f, const Vector& theta, const RowMatrix& x) {
                 return f.cdf(theta, as_rows(x, f.dim()));
             })
        .def("logpdf",
             [](const Family& f, const Vector& theta, const RowMatrix& x) {
                 return f.logpdf(theta, as_rows(x, f.dim()));
             })
        .def(
            "sample",
            [](const Family& f, const Vector& theta, Eigen::Index n, std::uint64_t seed, std::uint64_t stream) {
                RngStream rng(seed, stream);
                return RowMatrix(f.sample(theta, n, rng).matrix());
            },
            py::arg("theta"), py::arg("n"), py::arg("seed") = 0, py::arg("stream") = 0)
        .def("moment_start", [](const Family& f, const RowMatrix& x) { return f.moment_start(to_dataset(as_rows(x, f.dim()))); })
        .def("__repr__", [](const Family& f) { return "<gofmult.Family " + f.id() + " d=" + std::to_string(f.dim()) + ">"; });

    // families are immutable; the holder just cannot be const-qualified
    m.def(
        "make_family", [](const std::string& id, int dim) { return std::const_pointer_cast<Family>(make_family(id, dim)); },
        py::arg("id"), py::arg("dim") = 1);

    m.def(
        "fit_mle",
        [](const Family& f, const RowMatrix& x, bool analytic) {
            FitConfig cfg;
            cfg.use_analytic_grads = analytic;
            const FitResult r = fit_mle(f, to_dataset(as_rows(x, f.dim())), cfg);
            py::dict d;
            d["theta"] = r.theta;
            d["loglik"] = r.loglik;
            d["info"] = r.info;
            d["info_inv"] = r.info_inv;
            d["iterations"] = r.iterations;
            return d;
        },
        py::arg("family"), py::arg("data"), py::arg("analytic_gradients") = false);

    m.def(
        "multiplier_test",
        [](const Family& f, const RowMatrix& x, const std::string& stat, int replicates, std::uint64_t seed,
           int grid_size, const std::string& weights, bool analytic, unsigned threads) {
            const Dataset data = to_dataset(as_rows(x, f.dim()));
            const Statistic s = statistic_arg(stat);
            const GofOptions opt = options(grid_size, weights, analytic, threads);
            GofResult r;
            {
                py::gil_scoped_release release;
                r = multiplier_test(f, data, s, replicates, RngStream(seed, 0), opt);
            }
            return result_dict(r);
        },
        py::arg("family"), py::arg("data"), py::arg("statistic") = "snstar", py::arg("replicates") = 1000,
        py::arg("seed") = 1, py::arg("grid_size") = 1000, py::arg("weights") = "normal",
        py::arg("analytic_gradients") = false, py::arg("threads") = 1);

    m.def(
        "parametric_bootstrap_test",
        [](const Family& f, const RowMatrix& x, const std::string& stat, int replicates, std::uint64_t seed,
           int grid_size, unsigned threads) {
            const Dataset data = to_dataset(as_rows(x, f.dim()));
            const Statistic s = statistic_arg(stat);
            const GofOptions opt = options(grid_size, "normal", false, threads);
            GofResult r;
            {
                py::gil_scoped_release release;
                r = parametric_bootstrap_test(f, data, s, replicates, RngStream(seed, 0), opt);
            }
            return result_dict(r);
        },
        py::arg("family"), py::arg("data"), py::arg("statistic") = "snstar", py::arg("replicates") = 1000,
        py::arg("seed") = 1, py::arg("grid_size") = 1000, py::arg("threads") = 1);

    m.def("bvn_cdf", &mvcdf::bvn_cdf, py::arg("h"), py::arg("k"), py::arg("rho"));
    m.def(
        "mvt_cdf",
        [](const Vector& upper, const Matrix& corr, double nu) { return mvcdf::mvt_cdf(as_point(upper), corr, nu); },
        py::arg("upper"), py::arg("corr"), py::arg("nu") = mvcdf::kNormalDof);

    m.def(
        "gradient_check",
        [](int dim, double nu, int trials, std::uint64_t seed) {
            const auto r = run_gradient_check(dim, nu, trials, seed);
            py::dict d;
            d["max_rel_cdf"] = r.max_rel_cdf;
            d["max_rel_logpdf"] = r.max_rel_logpdf;
            d["pass"] = r.pass;
            return d;
        },
        py::arg("dim"), py::arg("nu"), py::arg("trials") = 100, py::arg("seed") = 1);
}
