#include "covest/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <json.hpp>

#include "covest/contracts.hpp"
#include "covest/covariance.hpp"
#include "covest/rng.hpp"
#include "covest/structure.hpp"

namespace covest {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::scaling: return "scaling";
        case ExperimentKind::frame: return "frame";
        case ExperimentKind::coupon: return "coupon";
        case ExperimentKind::baiyin: return "baiyin";
        case ExperimentKind::structure_demo: return "structure";
        case ExperimentKind::decouple_demo: return "decouple";
        case ExperimentKind::truncation: return "truncation";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "scaling" || s == "sweep") return ExperimentKind::scaling;
    if (s == "frame") return ExperimentKind::frame;
    if (s == "coupon") return ExperimentKind::coupon;
    if (s == "baiyin") return ExperimentKind::baiyin;
    if (s == "structure" || s == "structure_demo") return ExperimentKind::structure_demo;
    if (s == "decouple" || s == "decouple_demo") return ExperimentKind::decouple_demo;
    if (s == "truncation") return ExperimentKind::truncation;
    throw ContractError("unknown experiment kind: " + s);
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& experiment, std::size_t n,
                         std::size_t N, long trial) {
    std::uint64_t h = seed_combine(master, seed_of_string(experiment));
    h = seed_combine(h, n);
    h = seed_combine(h, N);
    h = seed_combine(h, static_cast<std::uint64_t>(trial));
    return h;
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return (v.size() % 2) ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Runs tasks 0..count-1 on `jobs` threads; each task writes only its own
/// slots, so the result is schedule-independent.
void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(jobs, static_cast<int>(count));
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct GridPoint {
    std::size_t n, N;
    long trial;
};

std::vector<std::size_t> resolve_N_grid(const ExperimentConfig& cfg, std::size_t n) {
    std::vector<std::size_t> Ns = cfg.N_grid;
    for (std::size_t r : cfg.N_over_n_grid) Ns.push_back(r * n);
    std::sort(Ns.begin(), Ns.end());
    Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
    return Ns;
}

} // namespace

FitResult fit_exponent(const std::vector<ResultRow>& rows, const std::string& x_field,
                       const std::string& metric) {
    // One regression point per (n, N) grid cell: the median over that cell's
    // trials. Cells sharing an x value stay separate points.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
    for (const ResultRow& r : rows) {
        if (r.metric != metric || r.trial < 0) continue;
        if (r.value <= 0.0) {
            std::cerr << "fit_exponent: dropping non-positive value for " << metric << " at n="
                      << r.n << " N=" << r.N << "\n";
            continue;
        }
        cells[{r.n, r.N}].push_back(r.value);
    }
    std::vector<std::pair<double, double>> pts;
    std::size_t distinct_check = 0;
    {
        std::map<double, int> seen;
        for (const auto& [key, vals] : cells) {
            double x = 0.0;
            if (x_field == "n_over_N")
                x = static_cast<double>(key.first) / static_cast<double>(key.second);
            else if (x_field == "n")
                x = static_cast<double>(key.first);
            else if (x_field == "N")
                x = static_cast<double>(key.second);
            else
                throw ContractError("fit_exponent: unknown x_field " + x_field);
            require(x > 0.0, "fit_exponent: x must be positive");
            const double med = median(vals);
            require(med > 0.0, "fit_exponent: median must be positive");
            pts.emplace_back(std::log2(x), std::log2(med));
            seen[x] = 1;
        }
        distinct_check = seen.size();
    }
    require(distinct_check >= 2, "fit_exponent: need at least 2 distinct x values");

    const std::size_t k = pts.size();
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) mx += x, my += y;
    mx /= k, my /= k;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    FitResult f;
    f.points_used = k;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

FitResult fit_loglog(const std::map<double, std::vector<double>>& groups) {
    require(groups.size() >= 2, "fit_loglog: need at least 2 distinct x values");
    std::vector<double> xs, ys;
    for (const auto& [x, vals] : groups) {
        require(x > 0.0, "fit_loglog: x must be positive");
        const double med = median(vals);
        require(med > 0.0, "fit_loglog: median must be positive");
        xs.push_back(std::log2(x));
        ys.push_back(std::log2(med));
    }
    const std::size_t k = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < k; ++i) mx += xs[i], my += ys[i];
    mx /= k, my /= k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    FitResult f;
    f.points_used = k;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

ExperimentResult run_scaling_sweep(const ExperimentConfig& cfg) {
    require(!cfg.n_grid.empty(), "scaling: n grid must be nonempty");
    const std::string name = to_string(ExperimentKind::scaling);
    const VectorModel model_proto =
        cfg.model_json.empty() ? VectorModel::gaussian(1) : VectorModel::from_json(cfg.model_json);

    std::map<std::size_t, VectorModel> models_by_n;
    for (std::size_t n : cfg.n_grid) {
        if (model_proto.n == n) {
            models_by_n.emplace(n, model_proto);
        } else {
            json mj = json::parse(model_proto.to_json());
            mj["n"] = n;
            models_by_n.emplace(n, VectorModel::from_json(mj.dump()));
        }
    }

    std::vector<GridPoint> points;
    for (std::size_t n : cfg.n_grid) {
        for (std::size_t N : resolve_N_grid(cfg, n)) {
            if (N < n) {
                std::cerr << "scaling: skipping N=" << N << " < n=" << n << "\n";
                continue;
            }
            for (long t = 0; t < cfg.trials; ++t) points.push_back({n, N, t});
        }
    }
    ExperimentResult out;
    out.rows.resize(points.size());
    parallel_for(cfg.jobs, points.size(), [&](std::size_t idx) {
        const GridPoint& g = points[idx];
        const std::uint64_t seed = trial_seed(cfg.master_seed, name, g.n, g.N, g.trial);
        const VectorModel& model = models_by_n.at(g.n);
        const auto xs = sample(model, g.N, seed);
        const double err = estimation_error(sample_covariance(xs), SymMat::identity(g.n));
        out.rows[idx] = {name, g.n, g.N, g.trial, seed, "estimation_error", err};
    });
    out.fit = fit_exponent(out.rows, "n_over_N", "estimation_error");

    // Derived column: the sample-size form (log2 log2 n)^p * n with
    // 1/p + 1/q = 1/4. Reported for reference only; the iterated-log factor
    // is a few units at these dimensions and is not claimed to be measurable.
    if (cfg.q > 4.0) {
        const double p_exp = 1.0 / (0.25 - 1.0 / cfg.q);
        for (std::size_t n : cfg.n_grid) {
            const double ll = std::log2(std::log2(std::max<double>(4.0, n)));
            out.rows.push_back({name, n, 0, -1, cfg.master_seed, "iterated_log_sample_size_form",
                                std::pow(ll, p_exp) * static_cast<double>(n)});
        }
    }

    json rj;
    rj["slope"] = out.fit->slope;
    rj["intercept"] = out.fit->intercept;
    rj["r_squared"] = out.fit->r_squared;
    out.report_json = rj.dump();
    return out;
}

ExperimentResult run_frame_subsample(const ExperimentConfig& cfg) {
    require(!cfg.n_grid.empty(), "frame: n grid must be nonempty");
    const std::string name = to_string(ExperimentKind::frame);
    ExperimentResult out;

    struct Task {
        std::size_t n, N, M;
        long trial;
    };
    std::vector<Task> tasks;
    for (std::size_t n : cfg.n_grid) {
        std::vector<std::size_t> Ms = cfg.M_grid.empty() ? std::vector<std::size_t>{20 * n}
                                                         : cfg.M_grid;
        for (std::size_t M : Ms) {
            require(M >= n, "frame: M must be at least n");
            for (std::size_t N : resolve_N_grid(cfg, n))
                for (long t = 0; t < cfg.trials; ++t) tasks.push_back({n, N, M, t});
        }
    }
    out.rows.resize(tasks.size());
    parallel_for(cfg.jobs, tasks.size(), [&](std::size_t idx) {
        const Task& g = tasks[idx];
        // The frame itself is seeded by (master, n, M) so all trials share it.
        Rng fr = Rng::from_parts(seed_combine(cfg.master_seed, seed_of_string("frame_build")),
                                 g.n, g.M);
        std::vector<Vec> raw(g.M, Vec(g.n));
        for (Vec& p : raw)
            for (double& v : p) v = fr.normal();
        auto frame = std::make_shared<Frame>(make_tight_frame(raw));
        VectorModel model = VectorModel::discrete_frame(frame);

        const std::uint64_t seed =
            seed_combine(trial_seed(cfg.master_seed, name, g.n, g.N, g.trial), g.M);
        const auto xs = sample(model, g.N, seed);
        const double defect = parseval_defect(xs, g.N);
        // fold M into the metric name so rows stay flat
        out.rows[idx] = {name, g.n, g.N, g.trial, seed,
                         "parseval_defect_M" + std::to_string(g.M), defect};
    });
    return out;
}

ExperimentResult run_coupon(const ExperimentConfig& cfg) {
    require(!cfg.n_grid.empty(), "coupon: n grid must be nonempty");
    const std::string name = to_string(ExperimentKind::coupon);
    ExperimentResult out;

    std::vector<GridPoint> points;
    for (std::size_t n : cfg.n_grid)
        for (std::size_t N : resolve_N_grid(cfg, n))
            for (long t = 0; t < cfg.trials; ++t) points.push_back({n, N, t});

    out.rows.resize(points.size());
    parallel_for(cfg.jobs, points.size(), [&](std::size_t idx) {
        const GridPoint& g = points[idx];
        const std::uint64_t seed = trial_seed(cfg.master_seed, name, g.n, g.N, g.trial);
        VectorModel model = VectorModel::scaled_basis(g.n);
        const auto xs = sample(model, g.N, seed);
        // Basis model: the sample covariance is diagonal with entries
        // n * count_j / N, so the error is computable exactly.
        std::vector<std::size_t> counts(g.n, 0);
        for (const Vec& x : xs)
            for (std::size_t j = 0; j < g.n; ++j)
                if (x[j] != 0.0) ++counts[j];
        double err = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            const double d = static_cast<double>(g.n) * counts[j] / static_cast<double>(g.N);
            err = std::max(err, std::abs(d - 1.0));
        }
        out.rows[idx] = {name, g.n, g.N, g.trial, seed, "estimation_error", err};
    });

    // summary rows per (n, N)
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> groups;
    for (const ResultRow& r : out.rows) groups[{r.n, r.N}].push_back(r.value);
    for (auto& [key, vals] : groups) {
        double frac = 0.0;
        for (double v : vals) frac += (v >= 1.0) ? 1.0 : 0.0;
        frac /= static_cast<double>(vals.size());
        out.rows.push_back({name, key.first, key.second, -1, cfg.master_seed,
                            "fraction_error_ge_1", frac});
        out.rows.push_back({name, key.first, key.second, -1, cfg.master_seed, "median_error",
                            median(vals)});
    }
    return out;
}

ExperimentResult run_baiyin(const ExperimentConfig& cfg) {
    require(!cfg.beta_grid.empty(), "baiyin: beta grid must be nonempty");
    require(!cfg.N_grid.empty(), "baiyin: need N");
    const std::string name = to_string(ExperimentKind::baiyin);
    const std::size_t N = cfg.N_grid.front();
    for (double beta : cfg.beta_grid)
        require(beta > 0.0 && beta <= 1.0, "baiyin: beta must lie in (0, 1]");

    const VectorModel model_proto =
        cfg.model_json.empty() ? VectorModel::gaussian(1) : VectorModel::from_json(cfg.model_json);

    struct Task {
        double beta;
        std::size_t n;
        long trial;
    };
    std::vector<Task> tasks;
    std::map<std::size_t, VectorModel> models_by_n;
    for (double beta : cfg.beta_grid) {
        const std::size_t n = static_cast<std::size_t>(std::ceil(beta * N));
        if (!models_by_n.count(n)) {
            if (model_proto.n == n) {
                models_by_n.emplace(n, model_proto);
            } else {
                json mj = json::parse(model_proto.to_json());
                mj["n"] = n;
                models_by_n.emplace(n, VectorModel::from_json(mj.dump()));
            }
        }
        for (long t = 0; t < cfg.trials; ++t) tasks.push_back({beta, n, t});
    }
    ExperimentResult out;
    out.rows.resize(2 * tasks.size());
    parallel_for(cfg.jobs, tasks.size(), [&](std::size_t idx) {
        const Task& g = tasks[idx];
        const std::uint64_t seed = trial_seed(cfg.master_seed, name, g.n, N, g.trial);
        const VectorModel& model = models_by_n.at(g.n);
        const auto xs = sample(model, N, seed);
        const auto [lmax, lmin] = extreme_eigs(sample_covariance(xs), 1e-9);
        out.rows[2 * idx] = {name, g.n, N, g.trial, seed, "lambda_max", lmax};
        out.rows[2 * idx + 1] = {name, g.n, N, g.trial, seed, "lambda_min", lmin};
    });

    // reference edges and (for heavy-tailed models) the fitted envelope constant
    const bool heavy = model_proto.kind == ModelKind::pareto_product;
    double fitted_c = 0.0;
    std::map<std::size_t, std::vector<double>> lmax_by_n, lmin_by_n;
    for (const ResultRow& r : out.rows) {
        if (r.metric == "lambda_max") lmax_by_n[r.n].push_back(r.value);
        if (r.metric == "lambda_min") lmin_by_n[r.n].push_back(r.value);
    }
    for (double beta : cfg.beta_grid) {
        const std::size_t n = static_cast<std::size_t>(std::ceil(beta * N));
        const double sqb = std::sqrt(beta);
        out.rows.push_back({name, n, N, -1, cfg.master_seed, "edge_max_reference",
                            (1.0 + sqb) * (1.0 + sqb)});
        out.rows.push_back({name, n, N, -1, cfg.master_seed, "edge_min_reference",
                            (1.0 - sqb) * (1.0 - sqb)});
        out.rows.push_back({name, n, N, -1, cfg.master_seed, "median_lambda_max",
                            median(lmax_by_n[n])});
        out.rows.push_back({name, n, N, -1, cfg.master_seed, "median_lambda_min",
                            median(lmin_by_n[n])});
        if (heavy) {
            const double q = model_proto.q_tail;
            const double shape = std::log2(std::log2(std::max<double>(4.0, n))) *
                                 std::pow(beta, 0.5 - 2.0 / q);
            const double dev = std::max(std::abs(median(lmax_by_n[n]) - 1.0),
                                        std::abs(median(lmin_by_n[n]) - 1.0));
            fitted_c = std::max(fitted_c, dev / shape);
        }
    }
    if (heavy)
        out.rows.push_back({name, 0, N, -1, cfg.master_seed, "heavy_tail_envelope_c", fitted_c});
    return out;
}

namespace {

std::vector<double> fuzz_structure_sequence(std::size_t m, Rng& rng) {
    // Sparse deep-block profile: heavy blocks in the lower half of the dyadic
    // range so the level l stays small relative to log2 m.
    const int t = static_cast<int>(std::floor(std::log2(static_cast<double>(m))));
    const int jlo = 2;
    const int jhi = std::max(jlo + 1, t / 2);
    std::vector<double> b(m, 0.0);
    std::size_t pos = 0;
    for (int j = jlo; j <= jhi; ++j) {
        const double fill = 0.3 + 0.4 * rng.uniform();
        const std::size_t cap = static_cast<std::size_t>(std::ldexp(1.0, j - 1) * fill) + 1;
        for (std::size_t s = 0; s < cap && pos < m; ++s, ++pos)
            b[pos] = rng.uniform(std::ldexp(1.0, -j) * 1.05, std::ldexp(1.0, -j + 1));
    }
    const double w1 = weak_lp_norm(b, 1.0);
    if (w1 > 1.0)
        for (double& v : b) v /= w1 * (1.0 + 1e-9);
    return b;
}

} // namespace

ExperimentResult run_structure_demo(const ExperimentConfig& cfg) {
    const std::string name = to_string(ExperimentKind::structure_demo);
    ExperimentResult out;

    std::vector<double> b = cfg.sequence;
    Rng rng = Rng::from_parts(cfg.master_seed, seed_of_string("structure_demo"));
    if (b.empty()) b = fuzz_structure_sequence(cfg.m, rng);

    StructureConfig scfg;
    scfg.divergence_c = cfg.divergence_c;
    StructureCertificate cert = extract_structure(b, cfg.alpha, cfg.K, scfg);

    CoeffSeq lambda(b.size(), 0.0);
    if (cfg.lambda_kind == "uniform_small") {
        const double c = 0.9 * std::min(1.0, cert.K / (8.0 * cert.l));
        for (std::size_t i : cert.I1) lambda[i] = c / static_cast<double>(cert.I1.size());
    } else if (cfg.lambda_kind == "one_hot") {
        lambda[cert.I1[cert.I1.size() / 2]] = 1.0;
    } // zero -> all zeros

    RefinedSet refined = refine_structure(cert, lambda);
    StructureReport rep = check_structure(cert, &refined, b, lambda, cfg.alpha, cfg.K);

    for (const CheckItem& it : rep.items)
        out.rows.push_back({name, b.size(), 0, -1, cfg.master_seed, "slack_" + it.name, it.slack});
    out.rows.push_back({name, b.size(), 0, -1, cfg.master_seed, "pass_relaxed",
                        rep.pass_with_relaxed_i2 ? 1.0 : 0.0});
    out.rows.push_back({name, b.size(), 0, -1, cfg.master_seed, "pass_strict",
                        rep.pass_strict ? 1.0 : 0.0});

    json rj;
    rj["certificate"] = json::parse(cert.to_json());
    rj["report"] = json::parse(rep.to_json());
    out.report_json = rj.dump();
    return out;
}

ExperimentResult run_decouple_demo(const ExperimentConfig& cfg) {
    const std::string name = to_string(ExperimentKind::decouple_demo);
    ExperimentResult out;
    const std::size_t n = cfg.n_grid.empty() ? 32 : cfg.n_grid.front();
    const std::size_t m = cfg.m;

    DecouplingParams params = cfg.decouple_params.value_or(DecouplingParams{});
    int successes = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, name, n, m, t);
        DecoupleInstance inst = make_near_duplicate_instance(n, m, seed);
        DecoupleResult res = decouple(inst.X, inst.x, params, seed_combine(seed, 1));
        const bool ok = res.ok();
        successes += ok ? 1 : 0;
        out.rows.push_back({name, n, m, t, seed, "success", ok ? 1.0 : 0.0});
        if (ok) {
            out.rows.push_back({name, n, m, t, seed, "retries",
                                static_cast<double>(res.certificate->retries_used)});
            out.rows.push_back({name, n, m, t, seed, "I_size",
                                static_cast<double>(res.certificate->I.size())});
            out.rows.push_back({name, n, m, t, seed, "J_size",
                                static_cast<double>(res.certificate->J.size())});
            if (t == 0) out.report_json = res.certificate->to_json();
        }
    }
    out.rows.push_back({name, n, m, -1, cfg.master_seed, "success_rate",
                        static_cast<double>(successes) / std::max(1, cfg.trials)});
    return out;
}

ExperimentResult run_truncation(const ExperimentConfig& cfg) {
    const std::string name = to_string(ExperimentKind::truncation);
    require(!cfg.n_grid.empty() && !(cfg.N_grid.empty() && cfg.N_over_n_grid.empty()),
            "truncation: need n and N");
    const std::size_t n = cfg.n_grid.front();
    const std::size_t N = resolve_N_grid(cfg, n).front();
    const VectorModel model = cfg.model_json.empty()
                                  ? VectorModel::gaussian(n)
                                  : VectorModel::from_json(cfg.model_json);

    ExperimentResult out;
    for (long t = 0; t < cfg.trials; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, name, n, N, t);
        SampleSet s = draw_sample_set(model, N, seed);
        TruncationReport rep = truncation_split(s, cfg.q, cfg.t, cfg.n_directions, seed);
        out.rows.push_back({name, n, N, t, seed, "B", rep.B});
        out.rows.push_back({name, n, N, t, seed, "I1_term", rep.I1_term});
        out.rows.push_back({name, n, N, t, seed, "I2_term", rep.I2_term});
        out.rows.push_back({name, n, N, t, seed, "I3_term", rep.I3_term});
        out.rows.push_back({name, n, N, t, seed, "I3_analytic_bound", rep.I3_analytic_bound});
        const double err = estimation_error(sample_covariance(s), SymMat::identity(n));
        out.rows.push_back({name, n, N, t, seed, "estimation_error", err});
        if (t == cfg.trials - 1) {
            json rj = json::parse(to_json(rep));
            rj["estimation_error"] = err;
            out.report_json = rj.dump();
        }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::scaling: return run_scaling_sweep(cfg);
        case ExperimentKind::frame: return run_frame_subsample(cfg);
        case ExperimentKind::coupon: return run_coupon(cfg);
        case ExperimentKind::baiyin: return run_baiyin(cfg);
        case ExperimentKind::structure_demo: return run_structure_demo(cfg);
        case ExperimentKind::decouple_demo: return run_decouple_demo(cfg);
        case ExperimentKind::truncation: return run_truncation(cfg);
    }
    throw ContractError("run_experiment: bad kind");
}

std::string csv_string(const std::vector<ResultRow>& rows) {
    std::string out = "experiment,n,N,trial,seed,metric,value\n";
    char buf[64];
    for (const ResultRow& r : rows) {
        out += r.experiment;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.N);
        out += ',';
        out += std::to_string(r.trial);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += r.metric;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.value);
        out += buf;
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream f(path, std::ios::trunc);
    require(f.good(), "write_csv: cannot open " + path);
    f << csv_string(rows);
    require(f.good(), "write_csv: write failed");
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = covest::to_string(experiment);
    if (!model_json.empty()) j["model"] = json::parse(model_json);
    j["n"] = n_grid;
    j["N"] = N_grid;
    j["N_over_n"] = N_over_n_grid;
    j["beta"] = beta_grid;
    j["M"] = M_grid;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    j["output_path"] = output_path;
    j["jobs"] = jobs;
    j["q"] = q;
    j["t"] = t;
    j["p"] = p;
    j["n_directions"] = n_directions;
    j["alpha"] = alpha;
    j["K"] = K;
    j["divergence_c"] = divergence_c;
    j["lambda_kind"] = lambda_kind;
    j["m"] = m;
    if (!sequence.empty()) j["sequence"] = sequence;
    if (decouple_params) j["decouple_params"] = json::parse(decouple_params->to_json());
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ContractError(std::string("config JSON parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
        if (j.contains("model")) c.model_json = j["model"].dump();
        c.n_grid = j.value("n", std::vector<std::size_t>{});
        c.N_grid = j.value("N", std::vector<std::size_t>{});
        c.N_over_n_grid = j.value("N_over_n", std::vector<std::size_t>{});
        c.beta_grid = j.value("beta", std::vector<double>{});
        c.M_grid = j.value("M", std::vector<std::size_t>{});
        c.trials = j.value("trials", 1);
        c.master_seed = j.value("master_seed", std::uint64_t{1});
        c.output_path = j.value("output_path", std::string{});
        c.jobs = j.value("jobs", 1);
        c.q = j.value("q", 6.0);
        c.t = j.value("t", 2.0);
        c.p = j.value("p", 8.0);
        c.n_directions = j.value("n_directions", std::size_t{32});
        c.alpha = j.value("alpha", 0.9);
        c.K = j.value("K", 0.8);
        c.divergence_c = j.value("divergence_c", 0.4);
        c.lambda_kind = j.value("lambda_kind", std::string{"uniform_small"});
        c.m = j.value("m", std::size_t{256});
        c.sequence = j.value("sequence", std::vector<double>{});
        if (j.contains("decouple_params"))
            c.decouple_params = DecouplingParams::from_json(j["decouple_params"].dump());
    } catch (const json::exception& e) {
        throw ContractError(std::string("config field error: ") + e.what());
    }
    require(c.trials >= 1, "config: trials must be >= 1");
    return c;
}

} // namespace covest
