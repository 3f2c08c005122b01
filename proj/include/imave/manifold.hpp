#pragma once

// Geometry of the response spaces: SPD matrices under the log-Euclidean and
// log-Cholesky metrics, and the unit sphere S^2. Every function here is pure.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace imave {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Length-q coordinates of an embedded response, q = m(m+1)/2 for SPD data.
using TangentVector = Eigen::VectorXd;

// Relative tolerance used to accept a matrix as symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;
// spd_log rejects eigenvalues below this fraction of the largest one.
inline constexpr double kEigenvalueFloor = 1e-12;

[[nodiscard]] constexpr Eigen::Index tri_size(Eigen::Index m) noexcept { return m * (m + 1) / 2; }

// Inverse of tri_size; throws ValidationError when q is not triangular.
[[nodiscard]] Eigen::Index dim_from_tri_size(Eigen::Index q);

class SymMatrix {
public:
    // Validates symmetry (relative 1e-12) and stores the symmetrized matrix.
    explicit SymMatrix(const Matrix& entries);

    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return entries_.rows(); }

    static SymMatrix zero(Eigen::Index m) { return SymMatrix(Matrix::Zero(m, m)); }

private:
    struct Trusted {};
    SymMatrix(Matrix entries, Trusted) : entries_(std::move(entries)) {}
    friend SymMatrix make_sym_unchecked(Matrix);

    Matrix entries_;
};

class SpdMatrix {
public:
    // Validates symmetry and positive definiteness (Cholesky must succeed).
    explicit SpdMatrix(const Matrix& entries);

    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return entries_.rows(); }

    static SpdMatrix identity(Eigen::Index m) { return SpdMatrix(Matrix::Identity(m, m)); }

private:
    struct Trusted {};
    SpdMatrix(Matrix entries, Trusted) : entries_(std::move(entries)) {}
    friend SpdMatrix make_spd_unchecked(Matrix);

    Matrix entries_;
};

class LowerTriMatrix {
public:
    // Throws ValidationError if any entry above the diagonal is nonzero.
    explicit LowerTriMatrix(const Matrix& entries);

    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return entries_.rows(); }

private:
    Matrix entries_;
};

class SpherePoint {
public:
    // Requires | ||coords|| - 1 | <= 1e-12.
    explicit SpherePoint(const Eigen::Vector3d& coords);

    // Normalizes any nonzero vector onto the sphere.
    static SpherePoint normalized(const Eigen::Vector3d& v);

    [[nodiscard]] const Eigen::Vector3d& coords() const noexcept { return coords_; }

private:
    Eigen::Vector3d coords_;
};

// Construct without validation. Only for values that are correct by construction.
SymMatrix make_sym_unchecked(Matrix entries);
SpdMatrix make_spd_unchecked(Matrix entries);

// ---- log-Euclidean geometry -------------------------------------------------

// Matrix logarithm through the symmetric eigendecomposition.
// Throws SingularityError when an eigenvalue is at or below the floor.
[[nodiscard]] SymMatrix spd_log(const SpdMatrix& s);
[[nodiscard]] SpdMatrix spd_exp(const SymMatrix& v);

// exp(log S1 + log S2). Abelian, identity I.
[[nodiscard]] SpdMatrix group_op(const SpdMatrix& s1, const SpdMatrix& s2);

// || log S1 - log S2 ||_F
[[nodiscard]] double dist_log_euclidean(const SpdMatrix& s1, const SpdMatrix& s2);

// exp of the average log.
[[nodiscard]] SpdMatrix frechet_mean_log_euclidean(std::span<const SpdMatrix> points);

// ---- log-Cholesky geometry --------------------------------------------------

[[nodiscard]] LowerTriMatrix cholesky_factor(const SpdMatrix& s);

// Keeps the strict lower triangle and takes the log of the diagonal.
[[nodiscard]] LowerTriMatrix chol_map(const LowerTriMatrix& l);
[[nodiscard]] LowerTriMatrix chol_map_inverse(const LowerTriMatrix& t);

// || chol_map(L1) - chol_map(L2) ||_F
[[nodiscard]] double dist_log_cholesky(const SpdMatrix& s1, const SpdMatrix& s2);

// ---- vectorization ----------------------------------------------------------

// Row-wise lower triangle: (a11, a21, a22, a31, ..., amm).
[[nodiscard]] TangentVector vecs(const SymMatrix& a);
[[nodiscard]] SymMatrix unvecs(const TangentVector& v, Eigen::Index m);

// Same ordering as vecs for a lower-triangular matrix.
[[nodiscard]] TangentVector vecl(const LowerTriMatrix& t);
[[nodiscard]] LowerTriMatrix unvecl(const TangentVector& v, Eigen::Index m);

// ---- unit sphere S^2 --------------------------------------------------------

// cos(|v|) p + sin(|v|) v/|v|. v must be tangent at p (|<p,v>| <= 1e-10).
[[nodiscard]] SpherePoint sphere_exp(const SpherePoint& p, const Eigen::Vector3d& v);

// Inverse of sphere_exp; throws DomainError for antipodal points.
[[nodiscard]] Eigen::Vector3d sphere_log(const SpherePoint& p, const SpherePoint& y);

// Geodesic distance arccos<p, y>.
[[nodiscard]] double sphere_distance(const SpherePoint& p, const SpherePoint& y);

struct FrechetOptions {
    double tolerance = 1e-10;
    int max_iters = 100;
};

// Intrinsic gradient iteration started at the normalized extrinsic mean.
// Throws ConvergenceError (carrying the last iterate) when it fails to settle.
[[nodiscard]] SpherePoint frechet_mean_sphere(std::span<const SpherePoint> points,
                                              const FrechetOptions& opts = {});

// Orthonormal basis (as columns) of the tangent plane at p. Deterministic in p.
[[nodiscard]] Eigen::Matrix<double, 3, 2> sphere_tangent_frame(const SpherePoint& p);

}  // namespace imave
