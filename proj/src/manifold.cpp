#include "imave/manifold.hpp"

#include "imave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace imave {

namespace {

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        std::ostringstream msg;
        msg << what << ": expected a nonempty square matrix, got " << a.rows() << "x" << a.cols();
        throw ValidationError(msg.str());
    }
}

void require_symmetric(const Matrix& a, const char* what) {
    require_square(a, what);
    if (!a.allFinite()) {
        throw ValidationError(std::string(what) + ": matrix has non-finite entries");
    }
    const double scale = std::max(1.0, a.norm());
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        std::ostringstream msg;
        msg << what << ": matrix is not symmetric (max |a_kl - a_lk| = " << asym << ")";
        throw ValidationError(msg.str());
    }
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

void require_same_dim(const SpdMatrix& a, const SpdMatrix& b, const char* what) {
    if (a.dim() != b.dim()) {
        std::ostringstream msg;
        msg << what << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
        throw ValidationError(msg.str());
    }
}

}  // namespace

Eigen::Index dim_from_tri_size(Eigen::Index q) {
    const auto m = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * static_cast<double>(q) + 1.0) - 1.0) / 2.0));
    if (q <= 0 || tri_size(m) != q) {
        throw ValidationError("vector length " + std::to_string(q) + " is not m(m+1)/2 for any m");
    }
    return m;
}

SymMatrix::SymMatrix(const Matrix& entries) {
    require_symmetric(entries, "SymMatrix");
    entries_ = symmetrized(entries);
}

SpdMatrix::SpdMatrix(const Matrix& entries) {
    require_symmetric(entries, "SpdMatrix");
    entries_ = symmetrized(entries);
    Eigen::LLT<Matrix> llt(entries_);
    if (llt.info() != Eigen::Success) {
        const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(entries_, Eigen::EigenvaluesOnly).eigenvalues()(0);
        std::ostringstream msg;
        msg << "SpdMatrix: matrix is not positive definite (smallest eigenvalue " << lmin << ")";
        throw SingularityError(msg.str(), lmin);
    }
}

LowerTriMatrix::LowerTriMatrix(const Matrix& entries) {
    require_square(entries, "LowerTriMatrix");
    for (Eigen::Index l = 1; l < entries.cols(); ++l) {
        for (Eigen::Index k = 0; k < l; ++k) {
            if (entries(k, l) != 0.0) {
                throw ValidationError("LowerTriMatrix: nonzero entry above the diagonal");
            }
        }
    }
    entries_ = entries;
}

SpherePoint::SpherePoint(const Eigen::Vector3d& coords) : coords_(coords) {
    if (!coords.allFinite() || std::abs(coords.norm() - 1.0) > 1e-12) {
        throw ValidationError("SpherePoint: coordinates are not a unit vector");
    }
}

SpherePoint SpherePoint::normalized(const Eigen::Vector3d& v) {
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw ValidationError("SpherePoint::normalized: zero or non-finite vector");
    }
    return SpherePoint(v / norm);
}

SymMatrix make_sym_unchecked(Matrix entries) { return SymMatrix(symmetrized(entries), SymMatrix::Trusted{}); }
SpdMatrix make_spd_unchecked(Matrix entries) { return SpdMatrix(symmetrized(entries), SpdMatrix::Trusted{}); }

SymMatrix spd_log(const SpdMatrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.matrix());
    const Vector& lambda = eig.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double lmin = lambda.minCoeff();
    if (!(lmin > kEigenvalueFloor * lmax)) {
        std::ostringstream msg;
        msg << "spd_log: eigenvalue " << lmin << " is below the floor " << kEigenvalueFloor * lmax;
        throw SingularityError(msg.str(), lmin);
    }
    const Matrix& q = eig.eigenvectors();
    return make_sym_unchecked(q * lambda.array().log().matrix().asDiagonal() * q.transpose());
}

SpdMatrix spd_exp(const SymMatrix& v) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(v.matrix());
    const Matrix& q = eig.eigenvectors();
    return make_spd_unchecked(q * eig.eigenvalues().array().exp().matrix().asDiagonal() * q.transpose());
}

SpdMatrix group_op(const SpdMatrix& s1, const SpdMatrix& s2) {
    require_same_dim(s1, s2, "group_op");
    return spd_exp(make_sym_unchecked(spd_log(s1).matrix() + spd_log(s2).matrix()));
}

double dist_log_euclidean(const SpdMatrix& s1, const SpdMatrix& s2) {
    require_same_dim(s1, s2, "dist_log_euclidean");
    return (spd_log(s1).matrix() - spd_log(s2).matrix()).norm();
}

SpdMatrix frechet_mean_log_euclidean(std::span<const SpdMatrix> points) {
    if (points.empty()) {
        throw ValidationError("frechet_mean_log_euclidean: no points");
    }
    Matrix acc = Matrix::Zero(points.front().dim(), points.front().dim());
    for (const auto& s : points) {
        require_same_dim(points.front(), s, "frechet_mean_log_euclidean");
        acc += spd_log(s).matrix();
    }
    return spd_exp(make_sym_unchecked(acc / static_cast<double>(points.size())));
}

LowerTriMatrix cholesky_factor(const SpdMatrix& s) {
    Eigen::LLT<Matrix> llt(s.matrix());
    if (llt.info() != Eigen::Success) {
        const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(s.matrix(), Eigen::EigenvaluesOnly).eigenvalues()(0);
        throw SingularityError("cholesky_factor: factorization failed, matrix is not positive definite", lmin);
    }
    return LowerTriMatrix(Matrix(llt.matrixL()));
}

LowerTriMatrix chol_map(const LowerTriMatrix& l) {
    Matrix out = l.matrix();
    for (Eigen::Index k = 0; k < out.rows(); ++k) {
        if (!(out(k, k) > 0.0)) {
            std::ostringstream msg;
            msg << "chol_map: diagonal entry " << k << " is " << out(k, k) << ", expected > 0";
            throw DomainError(msg.str());
        }
        out(k, k) = std::log(out(k, k));
    }
    return LowerTriMatrix(out);
}

LowerTriMatrix chol_map_inverse(const LowerTriMatrix& t) {
    Matrix out = t.matrix();
    out.diagonal() = out.diagonal().array().exp().matrix();
    return LowerTriMatrix(out);
}

double dist_log_cholesky(const SpdMatrix& s1, const SpdMatrix& s2) {
    require_same_dim(s1, s2, "dist_log_cholesky");
    return (chol_map(cholesky_factor(s1)).matrix() - chol_map(cholesky_factor(s2)).matrix()).norm();
}

namespace {

TangentVector lower_rowwise(const Matrix& a) {
    const Eigen::Index m = a.rows();
    TangentVector out(tri_size(m));
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = 0; l <= k; ++l) {
            out(idx++) = a(k, l);
        }
    }
    return out;
}

Matrix from_lower_rowwise(const TangentVector& v, Eigen::Index m, bool mirror) {
    if (m < 1 || v.size() != tri_size(m)) {
        std::ostringstream msg;
        msg << "expected a vector of length " << tri_size(m) << " for m = " << m << ", got " << v.size();
        throw ValidationError(msg.str());
    }
    Matrix out = Matrix::Zero(m, m);
    Eigen::Index idx = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = 0; l <= k; ++l) {
            out(k, l) = v(idx);
            if (mirror) {
                out(l, k) = v(idx);
            }
            ++idx;
        }
    }
    return out;
}

}  // namespace

TangentVector vecs(const SymMatrix& a) { return lower_rowwise(a.matrix()); }

SymMatrix unvecs(const TangentVector& v, Eigen::Index m) {
    return make_sym_unchecked(from_lower_rowwise(v, m, true));
}

TangentVector vecl(const LowerTriMatrix& t) { return lower_rowwise(t.matrix()); }

LowerTriMatrix unvecl(const TangentVector& v, Eigen::Index m) { return LowerTriMatrix(from_lower_rowwise(v, m, false)); }

SpherePoint sphere_exp(const SpherePoint& p, const Eigen::Vector3d& v) {
    const double norm = v.norm();
    if (!v.allFinite() || std::abs(p.coords().dot(v)) > 1e-10 * std::max(1.0, norm)) {
        throw ValidationError("sphere_exp: vector is not tangent at the base point");
    }
    if (norm == 0.0) {
        return p;
    }
    return SpherePoint::normalized(std::cos(norm) * p.coords() + std::sin(norm) * (v / norm));
}

Eigen::Vector3d sphere_log(const SpherePoint& p, const SpherePoint& y) {
    const double c = p.coords().dot(y.coords());
    const Eigen::Vector3d w = y.coords() - c * p.coords();
    const double s = w.norm();
    if (s < 1e-15) {
        if (c < 0.0) {
            throw DomainError("sphere_log: points are antipodal, the logarithm is undefined");
        }
        return Eigen::Vector3d::Zero();
    }
    const double angle = std::atan2(s, c);
    return (angle / s) * w;
}

double sphere_distance(const SpherePoint& p, const SpherePoint& y) {
    const double c = p.coords().dot(y.coords());
    const double s = p.coords().cross(y.coords()).norm();
    return std::atan2(s, c);
}

SpherePoint frechet_mean_sphere(std::span<const SpherePoint> points, const FrechetOptions& opts) {
    if (points.empty()) {
        throw ValidationError("frechet_mean_sphere: no points");
    }
    Eigen::Vector3d extrinsic = Eigen::Vector3d::Zero();
    for (const auto& y : points) {
        extrinsic += y.coords();
    }
    if (extrinsic.norm() < 1e-12) {
        throw DomainError("frechet_mean_sphere: points are not contained in an open hemisphere");
    }
    SpherePoint mean = SpherePoint::normalized(extrinsic);
    const double inv_n = 1.0 / static_cast<double>(points.size());
    for (int it = 0; it < opts.max_iters; ++it) {
        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        for (const auto& y : points) {
            step += sphere_log(mean, y);
        }
        step *= inv_n;
        // Strip the numerical normal component so the step stays tangent.
        step -= step.dot(mean.coords()) * mean.coords();
        mean = sphere_exp(mean, step);
        if (step.norm() < opts.tolerance) {
            return mean;
        }
    }
    throw ConvergenceError("frechet_mean_sphere: no convergence within " + std::to_string(opts.max_iters) +
                               " iterations",
                           mean.coords());
}

Eigen::Matrix<double, 3, 2> sphere_tangent_frame(const SpherePoint& p) {
    const Eigen::Vector3d& x = p.coords();
    Eigen::Index axis = 0;
    x.cwiseAbs().minCoeff(&axis);
    Eigen::Vector3d e1 = Eigen::Vector3d::Unit(axis) - x(axis) * x;
    e1.normalize();
    Eigen::Matrix<double, 3, 2> frame;
    frame.col(0) = e1;
    frame.col(1) = x.cross(e1);
    return frame;
}

}  // namespace imave
