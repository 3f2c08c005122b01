#pragma once

#include "imave/manifold.hpp"

#include <cmath>
#include <random>

namespace imave::testing {

inline Matrix random_orthogonal(Eigen::Index m, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(m, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(m, m);
}

// Random SPD matrix with eigenvalues 10^U[-3, 3] (condition number at most 1e6).
inline SpdMatrix random_spd(Eigen::Index m, std::mt19937_64& rng, double log10_spread = 3.0) {
    std::uniform_real_distribution<double> u(-log10_spread, log10_spread);
    const Matrix q = random_orthogonal(m, rng);
    Vector eig(m);
    for (Eigen::Index k = 0; k < m; ++k) eig(k) = std::pow(10.0, u(rng));
    Matrix s = q * eig.asDiagonal() * q.transpose();
    s = 0.5 * (s + s.transpose()).eval();
    return SpdMatrix(s);
}

inline SymMatrix random_sym(Eigen::Index m, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix a(m, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
    return SymMatrix(0.5 * (a + a.transpose()));
}

inline SpherePoint random_sphere_point(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return SpherePoint::normalized(Eigen::Vector3d(g(rng), g(rng), g(rng)));
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
    return a;
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace imave::testing
