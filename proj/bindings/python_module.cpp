// Python bindings for the main operations. Matrices and samples cross the
// boundary as numpy arrays; structured results (certificates, reports,
// configs) as JSON strings.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covest/contracts.hpp"
#include "covest/covariance.hpp"
#include "covest/decoupling.hpp"
#include "covest/epsnet.hpp"
#include "covest/experiments.hpp"
#include "covest/linalg.hpp"
#include "covest/min_norm_point.hpp"
#include "covest/models.hpp"
#include "covest/sequences.hpp"
#include "covest/structure.hpp"

namespace py = pybind11;
using namespace covest;

namespace {

SymMat to_symmat(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1))
        throw ContractError("expected a square 2-d array");
    const auto n = static_cast<std::size_t>(a.shape(0));
    SymMat m(n);
    auto r = a.unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = r(i, j);
    return m;
}

py::array_t<double> from_symmat(const SymMat& m) {
    const auto n = static_cast<py::ssize_t>(m.dim());
    py::array_t<double> out({n, n});
    auto w = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i)
        for (py::ssize_t j = 0; j < n; ++j) w(i, j) = m(i, j);
    return out;
}

std::vector<Vec> to_rows(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ContractError("expected a 2-d array of row vectors");
    auto r = a.unchecked<2>();
    std::vector<Vec> rows(static_cast<std::size_t>(a.shape(0)),
                          Vec(static_cast<std::size_t>(a.shape(1))));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        for (py::ssize_t j = 0; j < a.shape(1); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r(i, j);
    return rows;
}

py::array_t<double> from_rows(const std::vector<Vec>& rows) {
    const auto n_rows = static_cast<py::ssize_t>(rows.size());
    const auto n_cols = static_cast<py::ssize_t>(rows.empty() ? 0 : rows[0].size());
    py::array_t<double> out({n_rows, n_cols});
    auto w = out.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n_rows; ++i)
        for (py::ssize_t j = 0; j < n_cols; ++j)
            w(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

Vec to_vec(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw ContractError("expected a 1-d array");
    auto r = a.unchecked<1>();
    Vec v(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) v[static_cast<std::size_t>(i)] = r(i);
    return v;
}

} // namespace

PYBIND11_MODULE(covest, m) {
    m.doc() = "Covariance estimation toolkit: operator norms, divergent-series "
              "structure, decoupling certificates, and seeded experiments.";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def(
        "op_norm",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double tol) {
            return op_norm(to_symmat(a), tol);
        },
        py::arg("matrix"), py::arg("tol") = 1e-10,
        "Largest |eigenvalue| of a symmetric matrix.");

    m.def(
        "extreme_eigs",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double tol) {
            return extreme_eigs(to_symmat(a), tol);
        },
        py::arg("matrix"), py::arg("tol") = 1e-10,
        "(lambda_max, lambda_min) of a symmetric matrix.");

    m.def(
        "rearrange_desc",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
            const auto r = rearrange_desc(to_vec(a));
            return py::make_tuple(r.values, r.perm);
        },
        py::arg("a"), "Non-increasing rearrangement of |a| and its permutation.");

    m.def(
        "weak_lp_norm",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double p) {
            return weak_lp_norm(to_vec(a), p);
        },
        py::arg("a"), py::arg("p"));

    m.def(
        "lp_norm",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double p) {
            return lp_norm(to_vec(a), p);
        },
        py::arg("a"), py::arg("p"));

    m.def(
        "order_stat_bound",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> lam,
           py::array_t<double, py::array::c_style | py::array::forcecast> a, int K) {
            const auto r = order_stat_bound(to_vec(lam), to_vec(a), K);
            return py::make_tuple(r.lhs, r.rhs);
        },
        py::arg("lam"), py::arg("a"), py::arg("K"));

    m.def(
        "epsilon_net",
        [](std::size_t n, double eps, std::uint64_t seed, std::size_t max_points) {
            EpsNet net = epsilon_net(n, eps, seed, max_points);
            py::dict meta;
            meta["eps"] = net.eps;
            meta["incomplete"] = net.incomplete;
            meta["final_rejection_streak"] = net.final_rejection_streak;
            return py::make_tuple(from_rows(net.points), meta);
        },
        py::arg("n"), py::arg("eps"), py::arg("seed"), py::arg("max_points") = 100000,
        "Greedy maximal packing of the unit sphere; returns (points, meta).");

    m.def(
        "net_norm_estimate",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
           py::array_t<double, py::array::c_style | py::array::forcecast> points, double eps) {
            EpsNet net;
            net.eps = eps;
            net.points = to_rows(points);
            net.ambient_dim = net.points.empty() ? 0 : net.points[0].size();
            const auto est = net_norm_estimate(to_symmat(a), net);
            py::dict out;
            out["lower"] = est.lower;
            out["certified_upper"] = est.certified_upper;
            out["upper_is_heuristic"] = est.upper_is_heuristic;
            return out;
        },
        py::arg("matrix"), py::arg("net_points"), py::arg("eps"));

    m.def(
        "min_norm_point",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> points, double tol,
           int max_iter) {
            const auto r = min_norm_point(to_rows(points), tol, max_iter);
            return py::make_tuple(r.point, r.lambda, r.gap);
        },
        py::arg("points"), py::arg("tol") = 1e-9, py::arg("max_iter") = 200000,
        "Minimum-norm point in the convex hull; returns (v, lambda, gap).");

    m.def(
        "sample",
        [](const std::string& model_json, std::size_t N, std::uint64_t seed) {
            return from_rows(sample(VectorModel::from_json(model_json), N, seed));
        },
        py::arg("model_json"), py::arg("N"), py::arg("seed"),
        "Draw N i.i.d. samples of the model described by a JSON spec.");

    m.def(
        "certify_moments",
        [](const std::string& model_json, double q, std::size_t n_samples,
           std::size_t n_directions, std::uint64_t seed) {
            const auto c = certify_moments(VectorModel::from_json(model_json), q, n_samples,
                                           n_directions, seed);
            py::dict out;
            out["K_hat"] = c.K_hat;
            out["L_hat"] = c.L_hat;
            out["q"] = c.q;
            out["n_samples"] = c.n_samples;
            out["n_directions"] = c.n_directions;
            out["seed"] = c.seed;
            return out;
        },
        py::arg("model_json"), py::arg("q"), py::arg("n_samples") = 10000,
        py::arg("n_directions") = 32, py::arg("seed") = 1);

    m.def(
        "make_tight_frame",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> pts) {
            return from_rows(make_tight_frame(to_rows(pts)).points);
        },
        py::arg("raw_points"), "Whiten points into an exactly tight frame.");

    m.def(
        "parseval_defect",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> pts,
           std::size_t M_effective) { return parseval_defect(to_rows(pts), M_effective); },
        py::arg("points"), py::arg("M_effective"));

    m.def(
        "sample_covariance",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> samples) {
            return from_symmat(sample_covariance(to_rows(samples)));
        },
        py::arg("samples"), "(1/N) sum of x x^T over the rows.");

    m.def(
        "estimation_error",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
           py::array_t<double, py::array::c_style | py::array::forcecast> b) {
            return estimation_error(to_symmat(a), to_symmat(b));
        },
        py::arg("sigma_N"), py::arg("sigma"));

    m.def("subgaussian_predicted_error", &subgaussian_predicted_error, py::arg("n"), py::arg("N"),
          py::arg("delta"), py::arg("c_bernstein") = 0.25);

    m.def(
        "large_coeff_set",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> samples,
           py::array_t<double, py::array::c_style | py::array::forcecast> x, double B) {
            SampleSet s;
            s.samples = to_rows(samples);
            return large_coeff_set(s, to_vec(x), B);
        },
        py::arg("samples"), py::arg("x"), py::arg("B"),
        "Indices with |<X_i, x>| >= B.");

    auto profile_rows = [](const std::vector<ProfileRow>& rows) {
        py::list out;
        for (const auto& r : rows) {
            py::dict d;
            d["subset_size"] = r.subset_size;
            d["lhs_max"] = r.lhs_max;
            d["bound"] = r.bound;
            d["c_hat"] = r.c_hat;
            out.append(d);
        }
        return out;
    };

    m.def(
        "weak_l2_profile",
        [profile_rows](const std::string& model_json, std::size_t N, std::uint64_t seed,
                       const std::vector<std::size_t>& subset_sizes, std::size_t n_directions,
                       double t, double q) {
            const SampleSet s = draw_sample_set(VectorModel::from_json(model_json), N, seed);
            return profile_rows(weak_l2_profile(s, subset_sizes, n_directions, t, q, seed));
        },
        py::arg("model_json"), py::arg("N"), py::arg("seed"), py::arg("subset_sizes"),
        py::arg("n_directions") = 32, py::arg("t") = 2.0, py::arg("q") = 8.0);

    m.def(
        "orthogonality_profile",
        [profile_rows](const std::string& model_json, std::size_t N, std::uint64_t seed,
                       const std::vector<std::size_t>& subset_sizes, double t, double q) {
            const SampleSet s = draw_sample_set(VectorModel::from_json(model_json), N, seed);
            return profile_rows(orthogonality_profile(s, subset_sizes, t, q));
        },
        py::arg("model_json"), py::arg("N"), py::arg("seed"), py::arg("subset_sizes"),
        py::arg("t") = 2.0, py::arg("q") = 8.0);

    m.def(
        "subset_norm_sweep",
        [](const std::string& model_json, std::size_t N, std::uint64_t seed,
           const std::vector<std::size_t>& sizes, std::size_t trials, double p, double q,
           double t) {
            const SampleSet s = draw_sample_set(VectorModel::from_json(model_json), N, seed);
            py::list out;
            for (const auto& r : subset_norm_sweep(s, sizes, trials, p, q, t, seed)) {
                py::dict d;
                d["size"] = r.size;
                d["max_norm"] = r.max_norm;
                d["max_ratio"] = r.max_ratio;
                out.append(d);
            }
            return out;
        },
        py::arg("model_json"), py::arg("N"), py::arg("seed"), py::arg("sizes"),
        py::arg("trials") = 8, py::arg("p") = 8.0, py::arg("q") = 12.0, py::arg("t") = 1.0);

    m.def(
        "truncation_split",
        [](const std::string& model_json, std::size_t N, std::uint64_t seed, double q, double t,
           std::size_t n_directions, std::size_t resample_per_direction) {
            const SampleSet s = draw_sample_set(VectorModel::from_json(model_json), N, seed);
            const auto rep = truncation_split(s, q, t, n_directions, seed, resample_per_direction);
            py::dict out;
            out["B"] = rep.B;
            out["I1_term"] = rep.I1_term;
            out["I2_term"] = rep.I2_term;
            out["I3_term"] = rep.I3_term;
            out["I3_analytic_bound"] = rep.I3_analytic_bound;
            out["E_B_sizes"] = rep.E_B_sizes;
            return out;
        },
        py::arg("model_json"), py::arg("N"), py::arg("seed"), py::arg("q") = 8.0,
        py::arg("t") = 2.0, py::arg("n_directions") = 16,
        py::arg("resample_per_direction") = 20000);

    m.def(
        "extract_structure",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> b, double alpha,
           double K, double divergence_c) {
            StructureConfig cfg;
            cfg.divergence_c = divergence_c;
            return extract_structure(to_vec(b), alpha, K, cfg).to_json();
        },
        py::arg("b"), py::arg("alpha"), py::arg("K"), py::arg("divergence_c") = -1.0,
        "Divergent-series structure certificate as a JSON string.");

    m.def(
        "structure_pipeline",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> b,
           py::array_t<double, py::array::c_style | py::array::forcecast> lam, double alpha,
           double K, double divergence_c) {
            StructureConfig cfg;
            cfg.divergence_c = divergence_c;
            const Vec bv = to_vec(b);
            const Vec lv = to_vec(lam);
            const auto cert = extract_structure(bv, alpha, K, cfg);
            const auto refined = refine_structure(cert, lv);
            const auto rep = check_structure(cert, &refined, bv, lv, alpha, K);
            py::dict out;
            out["certificate"] = cert.to_json();
            out["report"] = rep.to_json();
            out["I2"] = refined.I2;
            out["j0"] = refined.j0;
            out["pass_with_relaxed_i2"] = rep.pass_with_relaxed_i2;
            out["pass_strict"] = rep.pass_strict;
            return out;
        },
        py::arg("b"), py::arg("lam"), py::arg("alpha"), py::arg("K"),
        py::arg("divergence_c") = -1.0,
        "Full extract/refine/check pipeline; returns certificate and report.");

    m.def(
        "decouple",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> X,
           py::array_t<double, py::array::c_style | py::array::forcecast> x,
           const std::string& params_json, std::uint64_t seed) {
            const DecouplingParams params = params_json.empty()
                                                ? DecouplingParams{}
                                                : DecouplingParams::from_json(params_json);
            const auto res = decouple(to_rows(X), to_vec(x), params, seed);
            py::dict out;
            out["status"] = to_string(res.status);
            out["message"] = res.message;
            if (res.certificate) out["certificate"] = res.certificate->to_json();
            return out;
        },
        py::arg("X"), py::arg("x"), py::arg("params_json") = std::string{}, py::arg("seed") = 1);

    m.def(
        "make_near_duplicate_instance",
        [](std::size_t n, std::size_t m_count, std::uint64_t seed) {
            const auto inst = make_near_duplicate_instance(n, m_count, seed);
            return py::make_tuple(from_rows(inst.X), inst.x);
        },
        py::arg("n"), py::arg("m"), py::arg("seed"));

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const auto cfg = ExperimentConfig::from_json(config_json);
            const auto res = run_experiment(cfg);
            py::dict out;
            out["csv"] = csv_string(res.rows);
            if (res.fit) {
                py::dict fit;
                fit["slope"] = res.fit->slope;
                fit["intercept"] = res.fit->intercept;
                fit["r_squared"] = res.fit->r_squared;
                out["fit"] = fit;
            }
            if (!res.report_json.empty()) out["report"] = res.report_json;
            return out;
        },
        py::arg("config_json"),
        "Run a seeded experiment from a JSON config; returns {'csv', 'fit'?, 'report'?}.");

    m.def(
        "fit_exponent",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> xs,
           py::array_t<double, py::array::c_style | py::array::forcecast> ys) {
            const Vec xv = to_vec(xs), yv = to_vec(ys);
            if (xv.size() != yv.size()) throw ContractError("fit_exponent: length mismatch");
            std::map<double, std::vector<double>> groups;
            for (std::size_t i = 0; i < xv.size(); ++i) groups[xv[i]].push_back(yv[i]);
            const auto f = fit_loglog(groups);
            return py::make_tuple(f.slope, f.intercept, f.r_squared);
        },
        py::arg("x"), py::arg("y"),
        "OLS of log2(median y) on log2(x); returns (slope, intercept, r2).");

    m.def("model_json", [](const std::string& kind, std::size_t n) {
        if (kind == "gaussian") return VectorModel::gaussian(n).to_json();
        if (kind == "cube") return VectorModel::cube(n).to_json();
        if (kind == "scaled_basis") return VectorModel::scaled_basis(n).to_json();
        throw ContractError("model_json helper supports gaussian|cube|scaled_basis");
    }, py::arg("kind"), py::arg("n"), "JSON spec for a few common models.");
}
