#include "imave/errors.hpp"
#include "imave/estimators.hpp"
#include "imave/simgen.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace imave;
using imave::testing::random_matrix;

namespace {

GeneratedData small_model(ModelId id, Eigen::Index p, Eigen::Index n, std::uint64_t seed, double sigma = -1.0) {
    ModelSpec spec;
    spec.id = id;
    spec.p = p;
    spec.n = n;
    spec.sigma = sigma < 0.0 ? default_sigma(id) : sigma;
    spec.seed = seed;
    return generate(spec);
}

double orthonormality_gap(const Basis& b) {
    return (b.matrix().transpose() * b.matrix() - Matrix::Identity(b.d(), b.d())).norm();
}

FitOptions quick(int iters = 10) {
    FitOptions opts;
    opts.max_iters = iters;
    return opts;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("basis validation and orthonormalization") {
    CHECK_THROWS_AS(Basis(Matrix::Ones(3, 1)), ValidationError);
    Matrix cols(3, 2);
    cols << 1, 1, 0, 1, 0, 0;
    const Basis b = Basis::orthonormalize(cols);
    CHECK(orthonormality_gap(b) < 1e-14);
    CHECK(b.matrix()(0, 0) > 0.0);
    CHECK((b.matrix().col(1) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-14);
    Matrix dependent(3, 2);
    dependent << 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS((void)Basis::orthonormalize(dependent), ValidationError);
}

TEST_CASE("subspace error") {
    const Basis e1(Matrix::Identity(2, 1));
    Matrix e2m(2, 1);
    e2m << 0, 1;
    const Basis e2(e2m);
    CHECK(subspace_error(e1, e1) == 0.0);
    CHECK(subspace_error(e1, e2) == doctest::Approx(std::sqrt(2.0)));
    CHECK(subspace_error(e1, Basis(-e1.matrix())) == 0.0);

    std::mt19937_64 rng(41);
    const Basis b = Basis::orthonormalize(random_matrix(6, 3, rng));
    const Basis rotated(b.matrix() * imave::testing::random_orthogonal(3, rng));
    CHECK(subspace_error(b, rotated) < 1e-12);
    const Basis other = Basis::orthonormalize(random_matrix(6, 3, rng));
    CHECK(subspace_error(b, other) <= std::sqrt(6.0) + 1e-12);
    CHECK_THROWS_AS((void)subspace_error(b, Basis::identity(5)), ValidationError);
}

TEST_CASE("method names") {
    for (const char* name : {"eu-iopg", "eu-imave", "ch-iopg", "ch-imave", "sphere-iopg", "sphere-imave"}) {
        CHECK(to_string(parse_method(name)) == name);
    }
    CHECK(parse_method("ch-imave") == Method{Metric::log_cholesky, EstimatorKind::imave});
    CHECK_THROWS_AS((void)parse_method("ai-imave"), ValidationError);
    CHECK_THROWS_AS((void)parse_method("eu-mave"), ValidationError);
}

TEST_CASE("embedding identity responses gives zeros") {
    const Matrix x = Matrix::Random(2, 3);
    const ResponseSet y = std::vector<SpdMatrix>{SpdMatrix::identity(3), SpdMatrix::identity(3)};
    for (const Metric metric : {Metric::log_euclidean, Metric::log_cholesky}) {
        const EmbeddedSample s = embed_responses(x, y, metric);
        CHECK(s.z.rows() == 2);
        CHECK(s.z.cols() == 6);
        CHECK(s.z.norm() < 1e-15);
        CHECK(s.m == 3);
    }
    CHECK_THROWS_AS((void)embed_responses(x, y, Metric::sphere), ValidationError);
}

TEST_CASE("embedding round trips") {
    std::mt19937_64 rng(42);
    std::vector<SpdMatrix> mats;
    for (int i = 0; i < 20; ++i) mats.push_back(imave::testing::random_spd(3, rng, 1.0));
    const Matrix x = random_matrix(20, 2, rng);
    for (const Metric metric : {Metric::log_euclidean, Metric::log_cholesky}) {
        const EmbeddedSample s = embed_responses(x, mats, metric);
        for (Eigen::Index i = 0; i < 20; ++i) {
            const auto back = std::get<SpdMatrix>(unembed(s, s.z.row(i).transpose()));
            CHECK(imave::testing::rel_frobenius(back.matrix(), mats[static_cast<std::size_t>(i)].matrix()) < 1e-10);
        }
    }
    // vecs of the matrix log, as stated
    const EmbeddedSample eu = embed_responses(x, mats, Metric::log_euclidean);
    CHECK((eu.z.row(4).transpose() - vecs(spd_log(mats[4]))).norm() < 1e-14);
    const EmbeddedSample ch = embed_responses(x, mats, Metric::log_cholesky);
    CHECK((ch.z.row(4).transpose() - vecl(chol_map(cholesky_factor(mats[4])))).norm() < 1e-14);
}

TEST_CASE("sphere embedding") {
    const SpherePoint mu(Eigen::Vector3d::UnitZ());
    const Matrix x = Matrix::Zero(3, 2);
    const EmbeddedSample same = embed_responses(x, std::vector<SpherePoint>{mu, mu, mu}, Metric::sphere);
    CHECK(same.q() == 2);
    CHECK(same.z.norm() < 1e-12);

    std::mt19937_64 rng(43);
    std::vector<SpherePoint> pts;
    std::normal_distribution<double> g(0.0, 0.3);
    for (int i = 0; i < 30; ++i) {
        pts.push_back(sphere_exp(mu, Eigen::Vector3d(g(rng), g(rng), 0.0)));
    }
    const EmbeddedSample s = embed_responses(random_matrix(30, 2, rng), pts, Metric::sphere);
    REQUIRE(s.basepoint.has_value());
    // tangent coordinates at the Frechet mean average to zero
    CHECK(s.z.colwise().mean().norm() < 1e-9);
    for (Eigen::Index i = 0; i < 30; ++i) {
        const auto back = std::get<SpherePoint>(unembed(s, s.z.row(i).transpose()));
        CHECK((back.coords() - pts[static_cast<std::size_t>(i)].coords()).norm() < 1e-10);
    }
    CHECK_THROWS_AS((void)embed_responses(random_matrix(30, 2, rng), pts, Metric::log_euclidean), ValidationError);
}

TEST_CASE("standardization") {
    Matrix x(4, 2);
    x << 1, 10, 2, 20, 3, 30, 4, 40;
    auto [xs, t] = standardize_predictors(x);
    CHECK(xs.colwise().mean().norm() < 1e-14);
    for (Eigen::Index c = 0; c < 2; ++c) {
        const double sd = std::sqrt(xs.col(c).squaredNorm() / 3.0);
        CHECK(sd == doctest::Approx(1.0));
    }
    CHECK(t.scale(1) == doctest::Approx(10.0 * t.scale(0)));
    CHECK(t.mean(0) == doctest::Approx(2.5));

    auto [again, t2] = standardize_predictors(xs);
    CHECK((again - xs).norm() < 1e-14);
    CHECK((t2.scale - Vector::Ones(2)).norm() < 1e-14);

    Matrix constant = x;
    constant.col(1).setConstant(7.0);
    try {
        (void)standardize_predictors(constant);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
}

TEST_CASE("full dimension recovers the whole space") {
    const GeneratedData data = small_model(ModelId::I1, 4, 80, 3);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    const FitResult r = iopg_fit(s, 4, quick(3));
    CHECK(subspace_error(r.basis, Basis::identity(4)) < 1e-10);
}

TEST_CASE("dimension out of range") {
    const GeneratedData data = small_model(ModelId::I1, 4, 50, 3);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    CHECK_THROWS_AS((void)iopg_fit(s, 0, quick()), ValidationError);
    CHECK_THROWS_AS((void)imave_fit(s, 5, quick()), ValidationError);
    FitOptions bad = quick();
    bad.max_iters = 0;
    CHECK_THROWS_AS((void)iopg_fit(s, 1, bad), ValidationError);
}

TEST_CASE("noiseless single-index data") {
    const GeneratedData data = small_model(ModelId::I1, 10, 400, 5, 0.0);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    const FitResult r = iopg_fit(s, 1);
    CHECK(subspace_error(r.basis, data.b0) < 0.05);
    CHECK(r.iterations == 30);
    CHECK(r.bandwidths.size() == 30);
}

TEST_CASE("iMAVE started at the truth stays there on noiseless linear data") {
    std::mt19937_64 rng(44);
    const Eigen::Index n = 150;
    const Eigen::Index p = 6;
    const Matrix x = random_matrix(n, p, rng);
    const Basis b0 = Basis::orthonormalize(random_matrix(p, 2, rng));
    const Matrix a = random_matrix(2, 3, rng);
    EmbeddedSample s;
    s.x = x;
    s.z = x * b0.matrix() * a;
    s.m = 2;
    const FitResult r = imave_fit(s, 2, quick(5), b0);
    CHECK(subspace_error(r.basis, b0) < 1e-6);
}

TEST_CASE("estimated bases are orthonormal for every metric") {
    const GeneratedData spd = small_model(ModelId::I2, 6, 100, 7);
    const GeneratedData sph = small_model(ModelId::III, 5, 100, 7);
    for (const Metric metric : {Metric::log_euclidean, Metric::log_cholesky}) {
        const EmbeddedSample s = embed_responses(spd.x, spd.y, metric);
        for (const EstimatorKind kind : {EstimatorKind::iopg, EstimatorKind::imave}) {
            const FitResult r = fit(s, kind, 2, quick(8));
            CHECK(orthonormality_gap(r.basis) <= 1e-8);
        }
    }
    const EmbeddedSample s = embed_responses(sph.x, sph.y, Metric::sphere);
    for (const EstimatorKind kind : {EstimatorKind::iopg, EstimatorKind::imave}) {
        const FitResult r = fit(s, kind, 2, quick(8));
        CHECK(orthonormality_gap(r.basis) <= 1e-8);
    }
}

TEST_CASE("rotating predictors and B0 together leaves the error unchanged") {
    std::mt19937_64 rng(45);
    const GeneratedData data = small_model(ModelId::I1, 6, 120, 9);
    const Matrix q = imave::testing::random_orthogonal(6, rng);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    EmbeddedSample rotated = s;
    rotated.x = data.x * q.transpose();
    const Basis b0_rotated(q * data.b0.matrix());
    for (const EstimatorKind kind : {EstimatorKind::iopg, EstimatorKind::imave}) {
        const double e1 = subspace_error(fit(s, kind, 1, quick(6)).basis, data.b0);
        const double e2 = subspace_error(fit(rotated, kind, 1, quick(6)).basis, b0_rotated);
        CHECK(e1 == doctest::Approx(e2).epsilon(1e-6));
    }
}

TEST_CASE("permuting samples leaves the error unchanged") {
    std::mt19937_64 rng(46);
    const GeneratedData data = small_model(ModelId::I2, 6, 100, 11);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_cholesky);
    std::vector<Eigen::Index> perm(100);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EmbeddedSample shuffled = s;
    for (Eigen::Index i = 0; i < 100; ++i) {
        shuffled.x.row(i) = s.x.row(perm[static_cast<std::size_t>(i)]);
        shuffled.z.row(i) = s.z.row(perm[static_cast<std::size_t>(i)]);
    }
    for (const EstimatorKind kind : {EstimatorKind::iopg, EstimatorKind::imave}) {
        const double e1 = subspace_error(fit(s, kind, 2, quick(6)).basis, data.b0);
        const double e2 = subspace_error(fit(shuffled, kind, 2, quick(6)).basis, data.b0);
        CHECK(std::abs(e1 - e2) <= 1e-10);
    }
}

TEST_CASE("results do not depend on the thread count") {
    const GeneratedData data = small_model(ModelId::I2, 6, 100, 13);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    for (const EstimatorKind kind : {EstimatorKind::iopg, EstimatorKind::imave}) {
        FitOptions one = quick(6);
        FitOptions many = one;
        many.threads = 4;
        const FitResult a = fit(s, kind, 2, one);
        const FitResult b = fit(s, kind, 2, many);
        CHECK(a.basis.matrix() == b.basis.matrix());
        CHECK(std::abs(subspace_error(a.basis, data.b0) - subspace_error(b.basis, data.b0)) <= 1e-12);
    }
}

TEST_CASE("too many isolated anchors is an estimation failure") {
    const GeneratedData data = small_model(ModelId::I1, 5, 60, 15);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    FitOptions opts = quick(3);
    opts.bandwidth = {BandwidthPolicy::Kind::fixed, 1e-4};
    CHECK_THROWS_AS((void)iopg_fit(s, 1, opts), EstimationError);
    CHECK_THROWS_AS((void)imave_fit(s, 1, opts, Basis(Matrix::Identity(5, 1))), EstimationError);
}

TEST_CASE("a tight bandwidth is widened per anchor") {
    const GeneratedData data = small_model(ModelId::I1, 4, 80, 17);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    FitOptions opts = quick(2);
    opts.bandwidth = {BandwidthPolicy::Kind::fixed, 0.25};
    const FitResult r = iopg_fit(s, 1, opts);
    CHECK(r.inflated_anchors > 0);
    CHECK(orthonormality_gap(r.basis) <= 1e-8);
}

TEST_CASE("standardized fits report both scales") {
    GeneratedData data = small_model(ModelId::I1, 5, 120, 19);
    data.x.col(2) *= 40.0;
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    FitOptions opts = quick(6);
    opts.standardize = true;
    const FitResult r = iopg_fit(s, 1, opts);
    REQUIRE(r.basis_standardized.has_value());
    const auto [xs, t] = standardize_predictors(data.x);
    const Basis expected = to_original_scale(*r.basis_standardized, t);
    CHECK((r.basis.matrix() - expected.matrix()).norm() < 1e-12);
    CHECK(orthonormality_gap(r.basis) <= 1e-8);
}

TEST_CASE("early stop ends the iteration once the basis settles") {
    const GeneratedData data = small_model(ModelId::I1, 5, 100, 21, 0.0);
    const EmbeddedSample s = embed_responses(data.x, data.y, Metric::log_euclidean);
    FitOptions opts;
    opts.early_stop = true;
    opts.early_stop_tol = 1e-6;
    const FitResult r = iopg_fit(s, 1, opts);
    CHECK(r.iterations < 30);
}

}  // TEST_SUITE
