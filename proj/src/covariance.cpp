#include "covest/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "covest/contracts.hpp"
#include "covest/rng.hpp"

namespace covest {

SampleSet draw_sample_set(const VectorModel& model, std::size_t N, std::uint64_t seed) {
    SampleSet s;
    s.samples = sample(model, N, seed);
    s.model_json = model.to_json();
    s.seed = seed;
    return s;
}

SymMat sample_covariance(const std::vector<Vec>& samples) {
    require(!samples.empty(), "sample_covariance: need N >= 1");
    const std::size_t n = samples[0].size();
    SymMat sigma(n);
    const double w = 1.0 / static_cast<double>(samples.size());
    for (const Vec& x : samples) {
        require(x.size() == n, "sample_covariance: ragged sample");
        sigma.add_outer(x, w);
    }
    return sigma;
}

SymMat sample_covariance(const SampleSet& s) { return sample_covariance(s.samples); }

double estimation_error(const SymMat& sigma_N, const SymMat& sigma) {
    require(sigma_N.dim() == sigma.dim(), "estimation_error: shape mismatch");
    return op_norm(sigma_N - sigma, 1e-10);
}

double subgaussian_predicted_error(std::size_t n, std::size_t N, double delta, double c_bernstein) {
    require(n >= 1 && N >= n, "subgaussian_predicted_error: need N >= n >= 1");
    require(delta > 0.0 && delta <= 1.0, "subgaussian_predicted_error: delta in (0,1]");
    require(c_bernstein > 0.0, "subgaussian_predicted_error: c must be positive");
    return std::sqrt((4.0 / c_bernstein) * std::log2(2.0 / delta) * static_cast<double>(n) /
                     static_cast<double>(N));
}

std::vector<std::size_t> large_coeff_set(const SampleSet& s, const Vec& x, double B) {
    require(B > 0.0, "large_coeff_set: B must be positive");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        if (std::abs(dot(s.samples[i], x)) >= B) out.push_back(i);
    return out;
}

namespace {

Vec random_unit_vec(Rng& rng, std::size_t n) {
    Vec u(n);
    double nu = 0.0;
    do {
        for (double& v : u) v = rng.normal();
        nu = norm2(u);
    } while (nu == 0.0);
    scale(u, 1.0 / nu);
    return u;
}

std::vector<std::size_t> random_subset(Rng& rng, std::size_t N, std::size_t size) {
    // Floyd's sampling; order irrelevant.
    std::vector<std::size_t> out;
    std::vector<bool> in(N, false);
    for (std::size_t j = N - size; j < N; ++j) {
        std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        if (in[t]) t = j;
        in[t] = true;
        out.push_back(t);
    }
    return out;
}

double weak_l2_sq(std::vector<double>& coeffs) {
    std::sort(coeffs.begin(), coeffs.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    double best = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        best = std::max(best, coeffs[i] * coeffs[i] * static_cast<double>(i + 1));
    return best;
}

} // namespace

std::vector<ProfileRow> weak_l2_profile(const SampleSet& s,
                                        const std::vector<std::size_t>& subset_sizes,
                                        std::size_t n_directions, double t, double q,
                                        std::uint64_t seed) {
    require(q > 4.0, "weak_l2_profile: q must exceed 4");
    const std::size_t N = s.N();
    const std::size_t n = s.n();
    Rng rng = Rng::from_parts(seed, seed_of_string("weak_l2_profile"));

    std::vector<ProfileRow> rows;
    for (std::size_t size : subset_sizes) {
        require(size >= 1 && size <= N, "weak_l2_profile: subset size out of range");
        ProfileRow row;
        row.subset_size = size;
        row.bound = static_cast<double>(n) +
                    t * t * std::pow(static_cast<double>(N) / size, 4.0 / q) *
                        static_cast<double>(size);
        const auto E = random_subset(rng, N, size);

        // probe directions: random plus the top eigenvector of sum_E X X^T
        std::vector<Vec> dirs;
        for (std::size_t d = 0; d < n_directions; ++d) dirs.push_back(random_unit_vec(rng, n));
        SymMat SE(n);
        for (std::size_t i : E) SE.add_outer(s.samples[i], 1.0);
        dirs.push_back(top_eigenvector(SE));

        std::vector<double> coeffs(size);
        for (const Vec& x : dirs) {
            for (std::size_t k = 0; k < size; ++k) coeffs[k] = dot(s.samples[E[k]], x);
            row.lhs_max = std::max(row.lhs_max, weak_l2_sq(coeffs));
        }
        row.c_hat = row.lhs_max / row.bound;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ProfileRow> orthogonality_profile(const SampleSet& s,
                                              const std::vector<std::size_t>& subset_sizes,
                                              double t, double q, std::size_t trials) {
    require(q > 4.0, "orthogonality_profile: q must exceed 4");
    const std::size_t N = s.N();
    const std::size_t n = s.n();
    Rng rng = Rng::from_parts(s.seed, seed_of_string("orthogonality_profile"));

    std::vector<ProfileRow> rows;
    for (std::size_t size : subset_sizes) {
        require(size >= 1 && size <= N, "orthogonality_profile: subset size out of range");
        ProfileRow row;
        row.subset_size = size;
        row.bound = t * t * std::pow(static_cast<double>(N) / size, 4.0 / q) *
                    static_cast<double>(n);
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const auto E = random_subset(rng, N, size);
            for (std::size_t k = 0; k < N; ++k) {
                double acc = 0.0;
                for (std::size_t i : E) {
                    if (i == k) continue;
                    const double ip = dot(s.samples[i], s.samples[k]);
                    acc += ip * ip;
                }
                row.lhs_max = std::max(row.lhs_max, acc / static_cast<double>(size));
            }
        }
        row.c_hat = row.lhs_max / row.bound;
        rows.push_back(row);
    }
    return rows;
}

TruncationReport truncation_split(const SampleSet& s, double q, double t,
                                  std::size_t n_directions, std::uint64_t seed,
                                  std::size_t resample_per_direction) {
    require(q > 4.0, "truncation_split: q must exceed 4");
    const std::size_t N = s.N();
    const std::size_t n = s.n();
    require(N >= n && n >= 4, "truncation_split: need N >= n >= 4");

    TruncationReport rep;
    rep.t = t;
    rep.B = std::pow(static_cast<double>(N) / n, 2.0 / q);
    rep.I1_term = rep.B * std::sqrt(static_cast<double>(n) / N);
    rep.I3_analytic_bound = std::pow(rep.B, 2.0 - q);

    Rng rng = Rng::from_parts(seed, seed_of_string("truncation_split"));
    std::vector<Vec> dirs;
    for (std::size_t d = 0; d < n_directions; ++d) dirs.push_back(random_unit_vec(rng, n));
    dirs.push_back(top_eigenvector(sample_covariance(s)));

    const VectorModel model = VectorModel::from_json(s.model_json);
    Rng resample_rng = Rng::from_parts(seed, seed_of_string("truncation_resample"));

    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const Vec& x = dirs[d];
        double i2 = 0.0;
        std::size_t eb = 0;
        for (const Vec& xi : s.samples) {
            const double c = dot(xi, x);
            if (std::abs(c) >= rep.B) {
                i2 += c * c;
                ++eb;
            }
        }
        rep.I2_term = std::max(rep.I2_term, i2 / static_cast<double>(N));
        rep.E_B_sizes[d] = eb;

        double tail = 0.0;
        Rng sub = resample_rng.substream(d);
        for (std::size_t r = 0; r < resample_per_direction; ++r) {
            const Vec fresh = model.draw(sub);
            const double c = dot(fresh, x);
            if (std::abs(c) >= rep.B) tail += c * c;
        }
        rep.I3_term = std::max(rep.I3_term, tail / static_cast<double>(resample_per_direction));
    }
    return rep;
}

std::vector<SubsetNormRow> subset_norm_sweep(const SampleSet& s,
                                             const std::vector<std::size_t>& sizes,
                                             std::size_t trials, double p, double q, double t,
                                             std::uint64_t seed) {
    require(4.0 < p && p < q, "subset_norm_sweep: need 4 < p < q");
    const std::size_t N = s.N();
    const std::size_t n = s.n();
    Rng rng = Rng::from_parts(seed, seed_of_string("subset_norm_sweep"));

    std::vector<SubsetNormRow> rows;
    for (std::size_t size : sizes) {
        require(size >= 4 && size <= N, "subset_norm_sweep: sizes must lie in [4, N]");
        SubsetNormRow row;
        row.size = size;
        const double ll = std::log2(std::log2(static_cast<double>(size)));
        const double bound =
            t * t * ll * ll *
            (static_cast<double>(n) +
             std::pow(static_cast<double>(N) / size, 4.0 / p) * static_cast<double>(size));
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const auto E = random_subset(rng, N, size);
            SymMat SE(n);
            for (std::size_t i : E) SE.add_outer(s.samples[i], 1.0);
            const double nrm = op_norm(SE, 1e-9);
            row.max_norm = std::max(row.max_norm, nrm);
            row.max_ratio = std::max(row.max_ratio, nrm / bound);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string profile_to_json(const std::vector<ProfileRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
        j.push_back({{"subset_size", r.subset_size},
                     {"lhs_max", r.lhs_max},
                     {"bound", r.bound},
                     {"c_hat", r.c_hat}});
    return j.dump();
}

std::string subset_norms_to_json(const std::vector<SubsetNormRow>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
        j.push_back({{"size", r.size}, {"max_norm", r.max_norm}, {"max_ratio", r.max_ratio}});
    return j.dump();
}

std::string to_json(const TruncationReport& rep) {
    nlohmann::json j;
    j["B"] = rep.B;
    j["t"] = rep.t;
    j["I1_term"] = rep.I1_term;
    j["I2_term"] = rep.I2_term;
    j["I3_term"] = rep.I3_term;
    j["I3_analytic_bound"] = rep.I3_analytic_bound;
    nlohmann::json sizes = nlohmann::json::object();
    for (const auto& [d, sz] : rep.E_B_sizes) sizes[std::to_string(d)] = sz;
    j["E_B_sizes"] = std::move(sizes);
    return j.dump();
}

namespace {

constexpr char MAGIC[8] = {'C', 'O', 'V', 'S', 'A', 'M', 'P', '1'};

template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace

void write_sample_set(const std::string& path, const SampleSet& s) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), "write_sample_set: cannot open " + path);
    f.write(MAGIC, sizeof(MAGIC));
    put<std::uint64_t>(f, s.n());
    put<std::uint64_t>(f, s.N());
    put<std::uint64_t>(f, s.seed);
    put<std::uint64_t>(f, s.model_json.size());
    f.write(s.model_json.data(), static_cast<std::streamsize>(s.model_json.size()));
    for (const Vec& x : s.samples)
        f.write(reinterpret_cast<const char*>(x.data()),
                static_cast<std::streamsize>(x.size() * sizeof(double)));
    require(f.good(), "write_sample_set: write failed");
}

SampleSet read_sample_set(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "read_sample_set: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    require(f.good() && std::memcmp(magic, MAGIC, sizeof(MAGIC)) == 0,
            "read_sample_set: bad magic");
    const auto n = get<std::uint64_t>(f);
    const auto N = get<std::uint64_t>(f);
    SampleSet s;
    s.seed = get<std::uint64_t>(f);
    const auto json_len = get<std::uint64_t>(f);
    s.model_json.resize(json_len);
    f.read(s.model_json.data(), static_cast<std::streamsize>(json_len));
    s.samples.assign(N, Vec(n));
    for (Vec& x : s.samples)
        f.read(reinterpret_cast<char*>(x.data()),
               static_cast<std::streamsize>(n * sizeof(double)));
    require(f.good(), "read_sample_set: truncated file");
    return s;
}

} // namespace covest
