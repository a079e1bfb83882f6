#include "covest/models.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "covest/contracts.hpp"
#include "covest/rng.hpp"

namespace covest {

using nlohmann::json;

namespace {

constexpr double SQRT3 = 1.7320508075688772935274463415059;
constexpr std::uint64_t CALIBRATION_SEED = 0x636f766573743031ULL; // fixed, recorded per model

std::size_t approx_rank(const SymMat& S) {
    // Gaussian elimination with partial pivoting; counts pivots above a
    // relative floor.
    const std::size_t n = S.dim();
    std::vector<double> a = S.data();
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0;
    std::size_t rank = 0;
    std::vector<bool> used(n, false);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        double best = 1e-12 * scale;
        for (std::size_t r = 0; r < n; ++r) {
            if (!used[r] && std::abs(a[r * n + col]) > best) {
                best = std::abs(a[r * n + col]);
                piv = r;
            }
        }
        if (piv == n) continue;
        used[piv] = true;
        ++rank;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == piv || a[r * n + col] == 0.0) continue;
            const double f = a[r * n + col] / a[piv * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[piv * n + c];
        }
    }
    return rank;
}

std::vector<Vec> regular_simplex_vertices(std::size_t n) {
    // Project the n+1 standard basis vectors of R^{n+1} onto the hyperplane
    // orthogonal to the all-ones direction, then rotate that hyperplane onto
    // R^n with a Householder reflection sending u = 1/sqrt(n+1) to e_{n+1}.
    const std::size_t np1 = n + 1;
    const double inv = 1.0 / static_cast<double>(np1);
    const double un = 1.0 / std::sqrt(static_cast<double>(np1));
    // Householder vector w = (u - e_{n+1}) / ||u - e_{n+1}||
    Vec w(np1, un);
    w[np1 - 1] -= 1.0;
    const double wn = norm2(w);
    scale(w, 1.0 / wn);

    std::vector<Vec> verts;
    verts.reserve(np1);
    for (std::size_t j = 0; j < np1; ++j) {
        Vec p(np1, -inv);
        p[j] += 1.0;
        // reflect: p - 2 <w,p> w, then drop the last coordinate (which is 0
        // for vectors orthogonal to u).
        const double c = 2.0 * dot(w, p);
        Vec r(np1);
        for (std::size_t i = 0; i < np1; ++i) r[i] = p[i] - c * w[i];
        verts.emplace_back(r.begin(), r.begin() + n);
    }
    return verts;
}

} // namespace

Frame make_tight_frame(const std::vector<Vec>& raw_points) {
    require(!raw_points.empty(), "make_tight_frame: empty input");
    const std::size_t n = raw_points[0].size();
    const std::size_t M = raw_points.size();
    require(M >= n, "make_tight_frame: need at least n points");
    for (const Vec& p : raw_points) require(p.size() == n, "make_tight_frame: ragged input");

    SymMat S(n);
    for (const Vec& p : raw_points) S.add_outer(p, 1.0 / static_cast<double>(M));

    std::vector<double> L;
    std::size_t rank = 0;
    if (!cholesky(S, L, rank)) {
        const std::size_t r = approx_rank(S);
        throw ContractError("make_tight_frame: input spans only rank " + std::to_string(r) +
                            " of " + std::to_string(n) + " dimensions");
    }

    Frame f;
    f.points.reserve(M);
    for (const Vec& p : raw_points) {
        // forward substitution: L y = p
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = p[i];
            for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
            y[i] = s / L[i * n + i];
        }
        f.points.push_back(std::move(y));
    }
    return f;
}

double parseval_defect(const std::vector<Vec>& frame_subset, std::size_t M_effective) {
    require(!frame_subset.empty(), "parseval_defect: empty input");
    require(M_effective >= 1, "parseval_defect: M_effective must be >= 1");
    const std::size_t n = frame_subset[0].size();
    SymMat S(n);
    for (const Vec& p : frame_subset) S.add_outer(p, 1.0 / static_cast<double>(M_effective));
    S -= SymMat::identity(n);
    return op_norm(S, 1e-10);
}

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::gaussian: return "gaussian";
        case ModelKind::cube: return "cube";
        case ModelKind::cross_polytope: return "cross_polytope";
        case ModelKind::simplex: return "simplex";
        case ModelKind::discrete_frame: return "discrete_frame";
        case ModelKind::pareto_product: return "pareto_product";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "gaussian") return ModelKind::gaussian;
    if (s == "cube") return ModelKind::cube;
    if (s == "cross_polytope") return ModelKind::cross_polytope;
    if (s == "simplex") return ModelKind::simplex;
    if (s == "discrete_frame") return ModelKind::discrete_frame;
    if (s == "pareto_product") return ModelKind::pareto_product;
    throw ContractError("unknown model kind: " + s);
}

VectorModel VectorModel::gaussian(std::size_t n) {
    VectorModel m;
    m.kind = ModelKind::gaussian;
    m.n = n;
    m.finalize();
    return m;
}

VectorModel VectorModel::cube(std::size_t n) {
    VectorModel m;
    m.kind = ModelKind::cube;
    m.n = n;
    m.K_declared = SQRT3;
    m.finalize();
    return m;
}

VectorModel VectorModel::cross_polytope(std::size_t n, std::size_t calibration_samples) {
    VectorModel m;
    m.kind = ModelKind::cross_polytope;
    m.n = n;
    m.calibration_samples = calibration_samples;
    m.finalize();
    return m;
}

VectorModel VectorModel::simplex(std::size_t n, std::size_t calibration_samples) {
    VectorModel m;
    m.kind = ModelKind::simplex;
    m.n = n;
    m.calibration_samples = calibration_samples;
    m.finalize();
    return m;
}

VectorModel VectorModel::discrete_frame(std::shared_ptr<const Frame> frame) {
    require(frame && !frame->points.empty(), "discrete_frame: empty frame");
    VectorModel m;
    m.kind = ModelKind::discrete_frame;
    m.n = frame->dim();
    require(parseval_defect(frame->points, frame->size()) <= 1e-8,
            "discrete_frame: frame is not tight");
    m.frame = std::move(frame);
    m.K_declared = 1.0;
    m.finalize();
    return m;
}

VectorModel VectorModel::scaled_basis(std::size_t n) {
    auto f = std::make_shared<Frame>();
    f->points.reserve(n);
    const double s = std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = s;
        f->points.push_back(std::move(e));
    }
    return discrete_frame(std::move(f));
}

VectorModel VectorModel::pareto_product(std::size_t n, double q_tail, bool truncate,
                                        double trunc_K, std::size_t calibration_samples) {
    require(q_tail > 2.0, "pareto_product: q_tail must exceed 2 for unit variance");
    VectorModel m;
    m.kind = ModelKind::pareto_product;
    m.n = n;
    m.q_tail = q_tail;
    m.truncate = truncate;
    m.trunc_K = trunc_K;
    m.calibration_samples = calibration_samples;
    m.finalize();
    return m;
}

namespace {

// Raw (pre-truncation) pareto coordinate with unit variance:
// |x| = t0 * U^{-1/a}, t0 = sqrt((a-2)/a).
double pareto_coord(Rng& rng, double a, double t0) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    const double mag = t0 * std::pow(u, -1.0 / a);
    return (rng.uniform() < 0.5) ? -mag : mag;
}

} // namespace

void VectorModel::finalize() {
    require(n >= 1, "VectorModel: dimension must be >= 1");
    switch (kind) {
        case ModelKind::gaussian:
        case ModelKind::cube:
            break;
        case ModelKind::cross_polytope: {
            // Uniform vector in the unit l1 ball: (e_1..e_n)/(e_1+...+e_{n+1})
            // with random signs; calibrate the radius that makes coordinates
            // unit variance.
            calibration_seed = CALIBRATION_SEED;
            if (calibration_samples == 0) calibration_samples = 1000000;
            Rng rng = Rng::from_parts(calibration_seed, seed_of_string("cross_polytope"), n);
            double s2 = 0.0;
            std::size_t count = 0;
            std::vector<double> e(n + 1);
            for (std::size_t it = 0; it < calibration_samples; ++it) {
                double tot = 0.0;
                for (double& v : e) tot += (v = rng.exponential());
                for (std::size_t i = 0; i < n; ++i) {
                    const double c = e[i] / tot;
                    s2 += c * c;
                    ++count;
                }
            }
            radius_scale = 1.0 / std::sqrt(s2 / static_cast<double>(count));
            K_declared = radius_scale / std::sqrt(static_cast<double>(n));
            break;
        }
        case ModelKind::simplex: {
            simplex_vertices_ = std::make_shared<const std::vector<Vec>>(regular_simplex_vertices(n));
            calibration_seed = CALIBRATION_SEED;
            if (calibration_samples == 0) calibration_samples = 1000000;
            Rng rng = Rng::from_parts(calibration_seed, seed_of_string("simplex"), n);
            double s2 = 0.0;
            std::size_t count = 0;
            std::vector<double> e(n + 1);
            Vec x(n);
            for (std::size_t it = 0; it < calibration_samples; ++it) {
                double tot = 0.0;
                for (double& v : e) tot += (v = rng.exponential());
                x.assign(n, 0.0);
                for (std::size_t j = 0; j <= n; ++j) axpy(x, e[j] / tot, (*simplex_vertices_)[j]);
                for (double c : x) s2 += c * c;
                count += n;
            }
            radius_scale = 1.0 / std::sqrt(s2 / static_cast<double>(count));
            double vmax = 0.0;
            for (const Vec& v : *simplex_vertices_) vmax = std::max(vmax, norm2(v));
            K_declared = radius_scale * vmax / std::sqrt(static_cast<double>(n));
            break;
        }
        case ModelKind::discrete_frame: {
            require(frame != nullptr, "discrete_frame: frame points missing");
            require(frame->size() >= n, "discrete_frame: frame must have M >= n points");
            // Sampling weights proportional to ||x_j||^2 with directions
            // renormalized to sqrt(n) keep E XX^T equal to (1/M) sum x x^T.
            auto cdf = std::make_shared<std::vector<double>>();
            cdf->reserve(frame->size());
            double acc = 0.0;
            for (const Vec& p : frame->points) {
                const double w = dot(p, p);
                require(w > 0.0, "discrete_frame: zero frame point");
                acc += w;
                cdf->push_back(acc);
            }
            for (double& v : *cdf) v /= acc;
            frame_cdf_ = std::move(cdf);
            K_declared = 1.0;
            break;
        }
        case ModelKind::pareto_product: {
            q_declared = q_tail; // q-th moment finite strictly below q_tail
            if (truncate) {
                calibration_seed = CALIBRATION_SEED;
                if (calibration_samples == 0) calibration_samples = 200000;
                Rng rng = Rng::from_parts(calibration_seed, seed_of_string("pareto_trunc"), n);
                const double t0 = std::sqrt((q_tail - 2.0) / q_tail);
                const double rad = trunc_K * std::sqrt(static_cast<double>(n));
                double s2 = 0.0;
                std::size_t count = 0;
                Vec x(n);
                for (std::size_t it = 0; it < calibration_samples; ++it) {
                    for (double& v : x) v = pareto_coord(rng, q_tail, t0);
                    const double nx = norm2(x);
                    const double f = (nx > rad) ? rad / nx : 1.0;
                    for (double v : x) {
                        const double c = f * v;
                        s2 += c * c;
                    }
                    count += n;
                }
                post_truncation_std = std::sqrt(s2 / static_cast<double>(count));
                K_declared = trunc_K / post_truncation_std;
            }
            break;
        }
    }
}

Vec VectorModel::draw(Rng& rng) const {
    Vec x(n);
    switch (kind) {
        case ModelKind::gaussian:
            for (double& v : x) v = rng.normal();
            break;
        case ModelKind::cube:
            for (double& v : x) v = rng.uniform(-SQRT3, SQRT3);
            break;
        case ModelKind::cross_polytope: {
            double tot = 0.0;
            std::vector<double> e(n + 1);
            for (double& v : e) tot += (v = rng.exponential());
            for (std::size_t i = 0; i < n; ++i) {
                const double s = (rng.uniform() < 0.5) ? -1.0 : 1.0;
                x[i] = radius_scale * s * e[i] / tot;
            }
            break;
        }
        case ModelKind::simplex: {
            double tot = 0.0;
            std::vector<double> e(n + 1);
            for (double& v : e) tot += (v = rng.exponential());
            x.assign(n, 0.0);
            for (std::size_t j = 0; j <= n; ++j) axpy(x, e[j] / tot, (*simplex_vertices_)[j]);
            for (double& v : x) v *= radius_scale;
            break;
        }
        case ModelKind::discrete_frame: {
            const double u = rng.uniform();
            const auto& cdf = *frame_cdf_;
            const std::size_t j =
                std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            const Vec& p = frame->points[std::min(j, frame->points.size() - 1)];
            const double f = std::sqrt(static_cast<double>(n)) / norm2(p);
            for (std::size_t i = 0; i < n; ++i) x[i] = f * p[i];
            break;
        }
        case ModelKind::pareto_product: {
            const double t0 = std::sqrt((q_tail - 2.0) / q_tail);
            for (double& v : x) v = pareto_coord(rng, q_tail, t0);
            if (truncate) {
                const double rad = trunc_K * std::sqrt(static_cast<double>(n));
                const double nx = norm2(x);
                const double f = ((nx > rad) ? rad / nx : 1.0) / post_truncation_std;
                for (double& v : x) v *= f;
            }
            break;
        }
    }
    return x;
}

std::vector<Vec> sample(const VectorModel& model, std::size_t N, std::uint64_t seed) {
    require(N >= 1, "sample: N must be >= 1");
    Rng rng = Rng::from_parts(seed, seed_of_string("sample"), model.n);
    std::vector<Vec> out;
    out.reserve(N);
    for (std::size_t i = 0; i < N; ++i) out.push_back(model.draw(rng));
    return out;
}

MomentCertificate certify_moments(const VectorModel& model, double q, std::size_t n_samples,
                                  std::size_t n_directions, std::uint64_t seed) {
    require(q > 2.0, "certify_moments: q must exceed 2");
    MomentCertificate cert;
    cert.q = q;
    cert.n_samples = n_samples;
    cert.n_directions = n_directions;
    cert.seed = seed;

    const auto xs = sample(model, n_samples, seed);
    const double sqn = std::sqrt(static_cast<double>(model.n));
    for (const Vec& x : xs) cert.K_hat = std::max(cert.K_hat, norm2(x) / sqn);

    Rng dir_rng = Rng::from_parts(seed, seed_of_string("directions"));
    for (std::size_t d = 0; d < n_directions; ++d) {
        Vec u(model.n);
        double nu = 0.0;
        do {
            for (double& v : u) v = dir_rng.normal();
            nu = norm2(u);
        } while (nu == 0.0);
        scale(u, 1.0 / nu);
        double acc = 0.0;
        for (const Vec& x : xs) acc += std::pow(std::abs(dot(x, u)), q);
        cert.L_hat = std::max(cert.L_hat, std::pow(acc / n_samples, 1.0 / q));
    }
    return cert;
}

std::string VectorModel::to_json() const {
    json j;
    j["kind"] = to_string(kind);
    j["n"] = n;
    if (q_declared) j["q"] = *q_declared;
    if (K_declared) j["K"] = *K_declared;
    if (L_declared) j["L"] = *L_declared;
    j["seed"] = model_seed;
    json params = json::object();
    if (kind == ModelKind::pareto_product) {
        params["q_tail"] = q_tail;
        params["truncate"] = truncate;
        params["trunc_K"] = trunc_K;
    }
    if (kind == ModelKind::discrete_frame && frame) {
        // Round-trip the exact points unless this is the scaled basis.
        const double s = std::sqrt(static_cast<double>(n));
        bool is_basis = frame->size() == n;
        if (is_basis) {
            for (std::size_t jj = 0; jj < n && is_basis; ++jj)
                for (std::size_t i = 0; i < n && is_basis; ++i)
                    is_basis = frame->points[jj][i] == ((i == jj) ? s : 0.0);
        }
        if (is_basis) {
            params["frame"] = "scaled_basis";
        } else {
            json pts = json::array();
            for (const Vec& p : frame->points) pts.push_back(p);
            params["frame_points"] = std::move(pts);
        }
    }
    if (kind == ModelKind::cross_polytope || kind == ModelKind::simplex ||
        (kind == ModelKind::pareto_product && truncate)) {
        params["calibration_samples"] = calibration_samples;
    }
    j["params"] = std::move(params);
    return j.dump();
}

VectorModel VectorModel::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ContractError(std::string("model JSON parse error: ") + e.what());
    }
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    const std::size_t n = j.at("n").get<std::size_t>();
    const json params = j.value("params", json::object());

    VectorModel m;
    switch (kind) {
        case ModelKind::gaussian: m = gaussian(n); break;
        case ModelKind::cube: m = cube(n); break;
        case ModelKind::cross_polytope:
            m = cross_polytope(n, params.value("calibration_samples", std::size_t{1000000}));
            break;
        case ModelKind::simplex:
            m = simplex(n, params.value("calibration_samples", std::size_t{1000000}));
            break;
        case ModelKind::discrete_frame: {
            const std::string named = params.value("frame", "");
            if (named == "scaled_basis") {
                m = scaled_basis(n);
            } else if (params.contains("frame_points")) {
                auto f = std::make_shared<Frame>();
                for (const auto& row : params.at("frame_points"))
                    f->points.push_back(row.get<Vec>());
                m = discrete_frame(std::move(f));
            } else if (named == "random_tight") {
                const std::size_t M = params.at("M").get<std::size_t>();
                const std::uint64_t gseed = j.value("seed", std::uint64_t{0});
                Rng rng = Rng::from_parts(gseed, seed_of_string("random_tight"), n);
                std::vector<Vec> raw(M, Vec(n));
                for (Vec& p : raw)
                    for (double& v : p) v = rng.normal();
                m = discrete_frame(std::make_shared<Frame>(make_tight_frame(raw)));
                m.model_seed = gseed;
            } else {
                throw ContractError("discrete_frame model needs frame points or a named frame");
            }
            break;
        }
        case ModelKind::pareto_product:
            m = pareto_product(n, params.value("q_tail", 6.0), params.value("truncate", false),
                               params.value("trunc_K", 4.0),
                               params.value("calibration_samples", std::size_t{200000}));
            break;
    }
    if (j.contains("seed")) m.model_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("q")) m.q_declared = j["q"].get<double>();
    if (j.contains("L")) m.L_declared = j["L"].get<double>();
    return m;
}

} // namespace covest
