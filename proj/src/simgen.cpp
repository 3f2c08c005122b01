#include "imave/simgen.hpp"

#include "imave/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace imave {

namespace {

enum Stream : std::uint64_t { kPredictors = 1, kNoise = 2, kRedraw = 3 };

constexpr int kMaxRedraws = 1000;

Vector draw_uniform_row(Eigen::Index p, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector row(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        row(k) = u(rng);
    }
    return row;
}

Matrix single_pair_basis(Eigen::Index p, Eigen::Index first, Eigen::Index second) {
    Matrix b = Matrix::Zero(p, 1);
    b(first, 0) = 1.0;
    b(second, 0) = 1.0;
    return b / std::numbers::sqrt2;
}

bool is_positive_definite(const Matrix& m) {
    return Eigen::LLT<Matrix>(m).info() == Eigen::Success &&
           Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0) > 0.0;
}

}  // namespace

std::string_view to_string(ModelId id) noexcept {
    switch (id) {
        case ModelId::I1: return "I1";
        case ModelId::I2: return "I2";
        case ModelId::II1: return "II1";
        case ModelId::II2: return "II2";
        case ModelId::III: return "III";
    }
    return "?";
}

ModelId parse_model(std::string_view name) {
    if (name == "I1" || name == "I-1") return ModelId::I1;
    if (name == "I2" || name == "I-2") return ModelId::I2;
    if (name == "II1" || name == "II-1") return ModelId::II1;
    if (name == "II2" || name == "II-2") return ModelId::II2;
    if (name == "III") return ModelId::III;
    throw ValidationError("unknown model '" + std::string(name) + "' (expected I1, I2, II1, II2 or III)");
}

double default_sigma(ModelId id) noexcept {
    return (id == ModelId::I1 || id == ModelId::I2) ? 0.2 : 0.1;
}

Eigen::Index response_dim(ModelId id) noexcept {
    switch (id) {
        case ModelId::I1: return 2;
        case ModelId::I2: return 5;
        case ModelId::II1:
        case ModelId::II2: return 3;
        case ModelId::III: return 0;
    }
    return 0;
}

Eigen::Index true_dimension(ModelId id) noexcept {
    return (id == ModelId::I1 || id == ModelId::II1) ? 1 : 2;
}

Eigen::Index min_predictors(ModelId id) noexcept {
    return (id == ModelId::I1 || id == ModelId::I2) ? 4 : 2;
}

bool is_sphere_model(ModelId id) noexcept { return id == ModelId::III; }

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t r) noexcept {
    return splitmix64(master ^ splitmix64(r + 0x5eedULL));
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) + stream * 0x632be59bd9b4e019ULL);
}

SymMatrix sym_matrix_normal(const SymMatrix& mean, double sigma, Rng& rng) {
    if (sigma < 0.0) {
        throw ValidationError("sym_matrix_normal: sigma must be nonnegative");
    }
    const Eigen::Index m = mean.dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out = mean.matrix();
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = 0; l <= k; ++l) {
            const double draw = normal(rng);
            if (k == l) {
                out(k, k) += sigma * draw;
            } else {
                const double off = sigma * draw * std::numbers::sqrt2 / 2.0;
                out(k, l) += off;
                out(l, k) += off;
            }
        }
    }
    return make_sym_unchecked(std::move(out));
}

Matrix study_i_mean(ModelId variant, const Vector& x) {
    const Eigen::Index p = x.size();
    const double index1 = (x(0) + x(1)) / std::numbers::sqrt2;
    const double rho = std::tanh(index1 / 2.0);  // (e^t - 1) / (e^t + 1)
    if (variant == ModelId::I1) {
        Matrix m(2, 2);
        m << 1.0, rho, rho, 1.0;
        return m;
    }
    if (variant != ModelId::I2) {
        throw ValidationError("study_i_mean: not a Study I model");
    }
    const double index2 = (x(p - 2) + x(p - 1)) / std::numbers::sqrt2;
    const double r1 = 0.2 * rho;
    const double r2 = 0.2 * std::sin(index2);
    Matrix m(5, 5);
    m << 1.0, r1, r1, r2, r2,
         r1, 1.0, r2, r2, r2,
         r1, r2, 1.0, r2, r1,
         r2, r2, r2, 1.0, r1,
         r2, r2, r1, r1, 1.0;
    return m;
}

namespace {

// (j,l) entry exp(-1/|j-l|) sin(2 pi (s - 1/(j+l))), 1-based indices; zero on the diagonal.
Matrix periodic_component(double s, Eigen::Index m) {
    Matrix f = Matrix::Zero(m, m);
    for (Eigen::Index j = 1; j <= m; ++j) {
        for (Eigen::Index l = 1; l <= m; ++l) {
            if (j == l) continue;
            const double decay = std::exp(-1.0 / static_cast<double>(std::abs(j - l)));
            f(j - 1, l - 1) = decay * std::sin(2.0 * std::numbers::pi * (s - 1.0 / static_cast<double>(j + l)));
        }
    }
    return f;
}

}  // namespace

Matrix study_ii_mean(ModelId variant, const Vector& x) {
    constexpr Eigen::Index m = 3;
    switch (variant) {
        case ModelId::II1: return periodic_component(x(0) + x(1), m);
        case ModelId::II2: return periodic_component(x(0), m) + periodic_component(x(1), m);
        default: throw ValidationError("study_ii_mean: not a Study II model");
    }
}

Eigen::Vector3d study_iii_tangent(const Vector& x) {
    return {std::exp(x(0)) * std::sin(x(0)), std::tanh((x(0) + x(1)) / 2.0), 0.0};
}

GeneratedData gen_study_i(const ModelSpec& spec) {
    if (spec.id != ModelId::I1 && spec.id != ModelId::I2) {
        throw ValidationError("gen_study_i: not a Study I model");
    }
    const Eigen::Index p = spec.p;
    Rng x_rng(stream_seed(spec.seed, kPredictors));
    Rng noise_rng(stream_seed(spec.seed, kNoise));
    Rng redraw_rng(stream_seed(spec.seed, kRedraw));

    Matrix x(spec.n, p);
    std::vector<SpdMatrix> y;
    y.reserve(static_cast<std::size_t>(spec.n));
    std::size_t redraws = 0;
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        Vector row = draw_uniform_row(p, 0.0, 1.0, x_rng);
        Matrix mean = study_i_mean(spec.id, row);
        int attempts = 0;
        while (!is_positive_definite(mean)) {
            if (++attempts > kMaxRedraws) {
                throw GenerationError("gen_study_i: could not draw a row with positive definite M(X)");
            }
            ++redraws;
            row = draw_uniform_row(p, 0.0, 1.0, redraw_rng);
            mean = study_i_mean(spec.id, row);
        }
        x.row(i) = row.transpose();
        const SymMatrix log_mean = spd_log(SpdMatrix(mean));
        y.push_back(spd_exp(sym_matrix_normal(log_mean, spec.sigma, noise_rng)));
    }

    Matrix b0 = single_pair_basis(p, 0, 1);
    if (spec.id == ModelId::I2) {
        b0.conservativeResize(p, 2);
        b0.col(1) = single_pair_basis(p, p - 2, p - 1);
    }
    return {std::move(x), std::move(y), Basis::orthonormalize(b0), true_dimension(spec.id), redraws};
}

GeneratedData gen_study_ii(const ModelSpec& spec) {
    if (spec.id != ModelId::II1 && spec.id != ModelId::II2) {
        throw ValidationError("gen_study_ii: not a Study II model");
    }
    constexpr Eigen::Index m = 3;
    const Eigen::Index p = spec.p;
    Rng x_rng(stream_seed(spec.seed, kPredictors));
    Rng noise_rng(stream_seed(spec.seed, kNoise));
    std::normal_distribution<double> noise(0.0, 1.0);

    Matrix x(spec.n, p);
    std::vector<SpdMatrix> y;
    y.reserve(static_cast<std::size_t>(spec.n));
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const Vector row = draw_uniform_row(p, 0.0, 1.0, x_rng);
        x.row(i) = row.transpose();
        // log zeta = sum_j Z_j v_j over the vecs coordinate basis of T_I Sym+(3).
        TangentVector coords(tri_size(m));
        for (Eigen::Index k = 0; k < coords.size(); ++k) {
            coords(k) = spec.sigma * noise(noise_rng);
        }
        const Matrix log_y = study_ii_mean(spec.id, row) + unvecs(coords, m).matrix();
        y.push_back(spd_exp(SymMatrix(log_y)));
    }

    Matrix b0 = Matrix::Zero(p, 1);
    if (spec.id == ModelId::II1) {
        b0 = single_pair_basis(p, 0, 1);
    } else {
        b0 = Matrix::Identity(p, 2);
    }
    return {std::move(x), std::move(y), Basis::orthonormalize(b0), true_dimension(spec.id), 0};
}

GeneratedData gen_study_iii(const ModelSpec& spec) {
    if (spec.id != ModelId::III) {
        throw ValidationError("gen_study_iii: not a Study III model");
    }
    const Eigen::Index p = spec.p;
    Rng x_rng(stream_seed(spec.seed, kPredictors));
    Rng noise_rng(stream_seed(spec.seed, kNoise));
    std::normal_distribution<double> noise(0.0, 1.0);
    const SpherePoint north(Eigen::Vector3d::UnitZ());

    Matrix x(spec.n, p);
    std::vector<SpherePoint> y;
    y.reserve(static_cast<std::size_t>(spec.n));
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const Vector row = draw_uniform_row(p, -1.0, 1.0, x_rng);
        x.row(i) = row.transpose();
        Eigen::Vector3d tangent = study_iii_tangent(row);
        tangent(0) += spec.sigma * noise(noise_rng);
        tangent(1) += spec.sigma * noise(noise_rng);
        y.push_back(sphere_exp(north, tangent));
    }
    return {std::move(x), std::move(y), Basis(Matrix::Identity(p, 2)), true_dimension(spec.id), 0};
}

GeneratedData generate(const ModelSpec& spec) {
    if (spec.p < min_predictors(spec.id)) {
        std::ostringstream msg;
        msg << "model " << to_string(spec.id) << " needs p >= " << min_predictors(spec.id) << ", got " << spec.p;
        throw ValidationError(msg.str());
    }
    if (spec.n < 2) {
        throw ValidationError("generate: need n >= 2");
    }
    if (spec.sigma < 0.0) {
        throw ValidationError("generate: sigma must be nonnegative");
    }
    switch (spec.id) {
        case ModelId::I1:
        case ModelId::I2: return gen_study_i(spec);
        case ModelId::II1:
        case ModelId::II2: return gen_study_ii(spec);
        case ModelId::III: return gen_study_iii(spec);
    }
    throw ValidationError("generate: unknown model");
}

}  // namespace imave
