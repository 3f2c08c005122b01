#include "imave/errors.hpp"
#include "imave/manifold.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace imave;
using imave::testing::random_spd;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

SpdMatrix spd2(double a, double b, double c, double d) { return SpdMatrix(mat2(a, b, c, d)); }

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("matrix log of known SPD matrices") {
    CHECK(spd_log(SpdMatrix::identity(2)).matrix().norm() < 1e-15);

    const SymMatrix l = spd_log(spd2(std::exp(1.0), 0, 0, 1));
    CHECK(l.matrix()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(l.matrix()(1, 1)) < 1e-15);

    // eigenvectors (1,1)/sqrt2, (1,-1)/sqrt2 with eigenvalues 3 and 1
    const double half_ln3 = std::log(3.0) / 2.0;
    const SymMatrix l2 = spd_log(spd2(2, 1, 1, 2));
    CHECK((l2.matrix() - Matrix::Constant(2, 2, half_ln3)).norm() < 1e-14);
    CHECK(half_ln3 == doctest::Approx(0.5493).epsilon(1e-4));
}

TEST_CASE("matrix exp of known symmetric matrices") {
    CHECK((spd_exp(SymMatrix::zero(3)).matrix() - Matrix::Identity(3, 3)).norm() < 1e-15);
    const SpdMatrix e = spd_exp(SymMatrix(mat2(1, 0, 0, 0)));
    CHECK(e.matrix()(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(e.matrix()(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("log rejects asymmetric and near-singular input") {
    CHECK_THROWS_AS(SpdMatrix(mat2(2, 1, 0, 2)), ValidationError);
    CHECK_THROWS_AS(SymMatrix(mat2(0, 1, 0.5, 0)), ValidationError);
    Matrix near = Matrix::Identity(2, 2);
    near(1, 1) = 1e-14;
    CHECK_THROWS_AS((void)spd_log(make_spd_unchecked(near)), SingularityError);
    try {
        (void)spd_log(make_spd_unchecked(near));
    } catch (const SingularityError& e) {
        CHECK(e.eigenvalue() == doctest::Approx(1e-14));
    }
}

TEST_CASE("symmetrization absorbs round-off") {
    Matrix a = mat2(2, 1, 1 + 1e-14, 2);
    const SpdMatrix s(a);
    CHECK(s.matrix()(0, 1) == s.matrix()(1, 0));
}

TEST_CASE("exp/log round trip on 1000 random SPD matrices") {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Eigen::Index m = 2 + k % 4;
        const SpdMatrix s = random_spd(m, rng);
        const Matrix back = spd_exp(spd_log(s)).matrix();
        worst = std::max(worst, (back - s.matrix()).norm() / s.matrix().norm());
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("group operation laws") {
    const SpdMatrix a = spd2(2, 0, 0, 3);
    const SpdMatrix b = spd2(5, 0, 0, 7);
    const Matrix ab = group_op(a, b).matrix();
    CHECK(ab(0, 0) == doctest::Approx(10.0).epsilon(1e-13));
    CHECK(ab(1, 1) == doctest::Approx(21.0).epsilon(1e-13));
    CHECK(std::abs(ab(0, 1)) < 1e-13);
    CHECK_THROWS_AS((void)group_op(a, SpdMatrix::identity(3)), ValidationError);

    std::mt19937_64 rng(12);
    for (int k = 0; k < 100; ++k) {
        const SpdMatrix s1 = random_spd(3, rng, 1.0);
        const SpdMatrix s2 = random_spd(3, rng, 1.0);
        const SpdMatrix s3 = random_spd(3, rng, 1.0);
        CHECK(imave::testing::rel_frobenius(group_op(s1, SpdMatrix::identity(3)).matrix(), s1.matrix()) < 1e-10);
        CHECK(imave::testing::rel_frobenius(group_op(s1, s2).matrix(), group_op(s2, s1).matrix()) < 1e-10);
        CHECK(imave::testing::rel_frobenius(group_op(group_op(s1, s2), s3).matrix(),
                                            group_op(s1, group_op(s2, s3)).matrix()) < 1e-10);
    }
}

TEST_CASE("log-Euclidean distance") {
    const SpdMatrix s = spd2(2, 1, 1, 2);
    CHECK(dist_log_euclidean(s, s) == doctest::Approx(0.0));
    CHECK(dist_log_euclidean(SpdMatrix::identity(2), spd2(std::exp(2.0), 0, 0, 1)) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)dist_log_euclidean(s, SpdMatrix::identity(3)), ValidationError);
}

TEST_CASE("Cholesky factor") {
    CHECK((cholesky_factor(SpdMatrix::identity(3)).matrix() - Matrix::Identity(3, 3)).norm() < 1e-15);
    CHECK((cholesky_factor(spd2(4, 0, 0, 9)).matrix() - mat2(2, 0, 0, 3)).norm() < 1e-15);
    const Matrix l = cholesky_factor(spd2(4, 2, 2, 5)).matrix();
    CHECK((l - mat2(2, 0, 1, 2)).norm() < 1e-14);
    CHECK((l * l.transpose() - mat2(4, 2, 2, 5)).norm() < 1e-10);
}

TEST_CASE("Cholesky chart and its inverse") {
    CHECK(chol_map(LowerTriMatrix(Matrix::Identity(2, 2))).matrix().norm() < 1e-15);
    const Matrix t = chol_map(LowerTriMatrix(mat2(1, 0, 2, 3))).matrix();
    CHECK((t - mat2(0, 0, 2, std::log(3.0))).norm() < 1e-15);
    CHECK((chol_map_inverse(LowerTriMatrix(Matrix::Zero(2, 2))).matrix() - Matrix::Identity(2, 2)).norm() < 1e-15);
    CHECK((chol_map_inverse(LowerTriMatrix(mat2(0, 0, 2, std::log(3.0)))).matrix() - mat2(1, 0, 2, 3)).norm() <
          1e-14);
    CHECK_THROWS_AS((void)chol_map(LowerTriMatrix(mat2(-1, 0, 0, 1))), DomainError);
    CHECK_THROWS_AS(LowerTriMatrix(mat2(1, 1, 0, 1)), ValidationError);

    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int k = 0; k < 100; ++k) {
        Matrix lower = Matrix::Zero(3, 3);
        for (Eigen::Index r = 0; r < 3; ++r) {
            for (Eigen::Index c = 0; c < r; ++c) lower(r, c) = g(rng);
            lower(r, r) = std::exp(g(rng));
        }
        const LowerTriMatrix lt(lower);
        CHECK((chol_map_inverse(chol_map(lt)).matrix() - lower).norm() <= 1e-12 * std::max(1.0, lower.norm()));
        Matrix tangent = lower;
        tangent.diagonal() = Vector::NullaryExpr(3, [&] { return g(rng); });
        CHECK((chol_map(chol_map_inverse(LowerTriMatrix(tangent))).matrix() - tangent).norm() < 1e-12);
    }
}

TEST_CASE("log-Cholesky distance") {
    const SpdMatrix s = spd2(4, 2, 2, 5);
    CHECK(dist_log_cholesky(s, s) == doctest::Approx(0.0));
    CHECK(dist_log_cholesky(SpdMatrix::identity(2), spd2(std::exp(2.0), 0, 0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("metric axioms for both SPD distances") {
    std::mt19937_64 rng(14);
    for (auto dist : {&dist_log_euclidean, &dist_log_cholesky}) {
        for (int k = 0; k < 100; ++k) {
            const SpdMatrix a = random_spd(3, rng, 1.5);
            const SpdMatrix b = random_spd(3, rng, 1.5);
            const SpdMatrix c = random_spd(3, rng, 1.5);
            const double ab = dist(a, b);
            CHECK(ab >= 0.0);
            CHECK(dist(a, a) < 1e-12);
            CHECK(ab == doctest::Approx(dist(b, a)).epsilon(1e-12));
            CHECK(dist(a, c) <= ab + dist(b, c) + 1e-12);
        }
    }
}

TEST_CASE("vecs and unvecs") {
    const TangentVector v = vecs(SymMatrix(mat2(1, 2, 2, 3)));
    CHECK(v.size() == 3);
    CHECK(v(0) == 1.0);
    CHECK(v(1) == 2.0);
    CHECK(v(2) == 3.0);

    Vector expected(6);
    expected << 1, 0, 1, 0, 0, 1;
    CHECK(vecs(SymMatrix(Matrix::Identity(3, 3))) == expected);

    std::mt19937_64 rng(15);
    for (Eigen::Index m = 1; m <= 5; ++m) {
        const SymMatrix a = imave::testing::random_sym(m, rng);
        CHECK(unvecs(vecs(a), m).matrix() == a.matrix());
    }
    Vector three(3);
    three << 1, 2, 3;
    CHECK(unvecs(three, 2).matrix() == mat2(1, 2, 2, 3));
    CHECK_THROWS_AS((void)unvecs(Vector::Zero(4), 2), ValidationError);
    CHECK_THROWS_AS((void)dim_from_tri_size(4), ValidationError);
    CHECK(dim_from_tri_size(15) == 5);
}

TEST_CASE("vecl and unvecl") {
    const TangentVector v = vecl(LowerTriMatrix(mat2(0, 0, 2, std::log(3.0))));
    CHECK(v(0) == 0.0);
    CHECK(v(1) == 2.0);
    CHECK(v(2) == doctest::Approx(std::log(3.0)));
    CHECK(vecl(LowerTriMatrix(Matrix::Zero(3, 3))).norm() == 0.0);

    std::mt19937_64 rng(16);
    Matrix lower = imave::testing::random_matrix(4, 4, rng).triangularView<Eigen::Lower>();
    CHECK(unvecl(vecl(LowerTriMatrix(lower)), 4).matrix() == lower);
}

TEST_CASE("sphere exponential") {
    const SpherePoint north(Eigen::Vector3d::UnitZ());
    CHECK(sphere_exp(north, Eigen::Vector3d::Zero()).coords() == north.coords());
    const Eigen::Vector3d y = sphere_exp(north, Eigen::Vector3d(std::numbers::pi / 2, 0, 0)).coords();
    CHECK((y - Eigen::Vector3d::UnitX()).norm() < 1e-15);
    CHECK_THROWS_AS((void)sphere_exp(north, Eigen::Vector3d(0, 0, 0.1)), ValidationError);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const SpherePoint p = imave::testing::random_sphere_point(rng);
        const auto frame = sphere_tangent_frame(p);
        const Eigen::Vector3d v = frame * Eigen::Vector2d(g(rng), g(rng));
        CHECK(std::abs(sphere_exp(p, v).coords().norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("sphere logarithm") {
    std::mt19937_64 rng(18);
    const SpherePoint p = imave::testing::random_sphere_point(rng);
    CHECK(sphere_log(p, p).norm() < 1e-15);
    CHECK_THROWS_AS((void)sphere_log(p, SpherePoint(-p.coords())), DomainError);
    for (int k = 0; k < 100; ++k) {
        const SpherePoint a = imave::testing::random_sphere_point(rng);
        const SpherePoint b = imave::testing::random_sphere_point(rng);
        const Eigen::Vector3d v = sphere_log(a, b);
        CHECK(std::abs(v.dot(a.coords())) < 1e-10);
        CHECK((sphere_exp(a, v).coords() - b.coords()).norm() < 1e-10);
        const double angle = std::acos(std::clamp(a.coords().dot(b.coords()), -1.0, 1.0));
        CHECK(v.norm() == doctest::Approx(angle).epsilon(1e-9));
        CHECK(sphere_distance(a, b) == doctest::Approx(angle).epsilon(1e-9));
    }
}

TEST_CASE("sphere Frechet mean") {
    const SpherePoint a(Eigen::Vector3d::UnitX());
    const std::vector<SpherePoint> same{a, a, a};
    CHECK((frechet_mean_sphere(same).coords() - a.coords()).norm() < 1e-12);

    const std::vector<SpherePoint> pair{a, SpherePoint(Eigen::Vector3d::UnitY())};
    CHECK((frechet_mean_sphere(pair).coords() - Eigen::Vector3d(1, 1, 0).normalized()).norm() < 1e-10);

    // Two points at angle 1.2 on a great circle: the mean is the point at angle 0.6,
    // located independently by bisection on the summed squared distances' derivative.
    const SpherePoint b(Eigen::Vector3d(std::cos(1.2), std::sin(1.2), 0.0));
    const std::vector<SpherePoint> arc{a, b};
    double lo = 0.0;
    double hi = 1.2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid - (1.2 - mid) < 0.0 ? lo : hi) = mid;
    }
    const Eigen::Vector3d expected(std::cos(lo), std::sin(lo), 0.0);
    CHECK((frechet_mean_sphere(arc).coords() - expected).norm() < 1e-9);

    const std::vector<SpherePoint> none;
    CHECK_THROWS_AS((void)frechet_mean_sphere(none), ValidationError);
}

TEST_CASE("tangent frame is orthonormal and deterministic") {
    std::mt19937_64 rng(19);
    for (int k = 0; k < 50; ++k) {
        const SpherePoint p = imave::testing::random_sphere_point(rng);
        const auto f = sphere_tangent_frame(p);
        CHECK((f.transpose() * f - Eigen::Matrix2d::Identity()).norm() < 1e-12);
        CHECK((f.transpose() * p.coords()).norm() < 1e-12);
        CHECK(f == sphere_tangent_frame(p));
    }
}

TEST_CASE("log-Euclidean Frechet mean is the exp of the mean log") {
    const std::vector<SpdMatrix> pts{spd2(std::exp(2.0), 0, 0, 1), spd2(1, 0, 0, std::exp(4.0))};
    const Matrix mean = frechet_mean_log_euclidean(pts).matrix();
    CHECK(mean(0, 0) == doctest::Approx(std::exp(1.0)));
    CHECK(mean(1, 1) == doctest::Approx(std::exp(2.0)));
}

}  // TEST_SUITE
