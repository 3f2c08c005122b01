#pragma once

// Intrinsic OPG and intrinsic MAVE for manifold-valued responses.
//
// Responses are first mapped to flat coordinates (matrix log, log-Cholesky
// chart, or sphere log at the Frechet mean); both estimators then run on the
// embedded n x q response matrix.

#include "imave/manifold.hpp"
#include "imave/smoothing.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace imave {

enum class Metric { log_euclidean, log_cholesky, sphere };
enum class EstimatorKind { iopg, imave };

struct Method {
    Metric metric = Metric::log_euclidean;
    EstimatorKind estimator = EstimatorKind::imave;

    friend bool operator==(const Method&, const Method&) = default;
};

[[nodiscard]] std::string_view to_string(Metric metric) noexcept;
[[nodiscard]] Metric parse_metric(std::string_view name);
// "eu-iopg", "eu-imave", "ch-iopg", "ch-imave", "sphere-iopg", "sphere-imave"
[[nodiscard]] std::string to_string(const Method& method);
[[nodiscard]] Method parse_method(std::string_view name);

// p x d matrix with orthonormal columns.
class Basis {
public:
    // Throws ValidationError unless ||B^T B - I||_F <= 1e-10.
    explicit Basis(const Matrix& entries);

    // Gram-Schmidt through Householder QR; column signs fixed so diag(R) > 0.
    // Throws ValidationError if the columns are (numerically) dependent.
    static Basis orthonormalize(const Matrix& columns);
    static Basis identity(Eigen::Index p) { return Basis(Matrix::Identity(p, p)); }

    [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index p() const noexcept { return entries_.rows(); }
    [[nodiscard]] Eigen::Index d() const noexcept { return entries_.cols(); }

private:
    Matrix entries_;
};

// || Bhat Bhat^T - B0 B0^T ||_F, in [0, sqrt(2d)].
[[nodiscard]] double subspace_error(const Basis& bhat, const Basis& b0);

using ResponseSet = std::variant<std::vector<SpdMatrix>, std::vector<SpherePoint>>;

[[nodiscard]] std::size_t response_count(const ResponseSet& y) noexcept;

struct EmbeddedSample {
    Matrix x;  // n x p predictors
    Matrix z;  // n x q embedded responses
    Metric metric = Metric::log_euclidean;
    Eigen::Index m = 0;  // SPD matrix size; 0 for sphere data
    // Sphere data only: Frechet mean and the tangent frame the coordinates refer to.
    std::optional<SpherePoint> basepoint;
    Eigen::Matrix<double, 3, 2> frame = Eigen::Matrix<double, 3, 2>::Zero();

    [[nodiscard]] Eigen::Index n() const noexcept { return x.rows(); }
    [[nodiscard]] Eigen::Index p() const noexcept { return x.cols(); }
    [[nodiscard]] Eigen::Index q() const noexcept { return z.cols(); }
};

// log_euclidean: Z_i = vecs(log Y_i); log_cholesky: Z_i = vecl(chol_map(chol Y_i));
// sphere: coordinates of log_mu(Y_i) in sphere_tangent_frame(mu), mu the Frechet mean.
[[nodiscard]] EmbeddedSample embed_responses(const Matrix& x, const ResponseSet& y, Metric metric);

// Maps an embedded coordinate vector back onto the manifold (inverse of the embedding).
[[nodiscard]] std::variant<SpdMatrix, SpherePoint> unembed(const EmbeddedSample& sample, const TangentVector& z);

struct Standardization {
    Vector mean;
    Vector scale;  // sample standard deviations (divisor n-1)
};

// Columns mapped to mean 0, sd 1. Throws ValidationError naming a constant column.
[[nodiscard]] std::pair<Matrix, Standardization> standardize_predictors(const Matrix& x);

// Direction B on the standardized scale expressed in original coordinates:
// diag(1/scale) B, re-orthonormalized.
[[nodiscard]] Basis to_original_scale(const Basis& standardized, const Standardization& transform);

struct FitOptions {
    int max_iters = 30;
    KernelSpec kernel{};
    double c0 = kDefaultC0;
    BandwidthPolicy bandwidth{};
    std::optional<double> ridge;  // absolute local ridge; default is relative (see local_fit.hpp)
    bool standardize = false;
    bool early_stop = false;  // stop once successive bases differ by < early_stop_tol
    double early_stop_tol = 1e-8;
    double max_skip_fraction = 0.2;
    int threads = 1;

    friend bool operator==(const FitOptions&, const FitOptions&) = default;
};

struct FitResult {
    Basis basis;  // on the scale of the input predictors
    std::optional<Basis> basis_standardized;
    int iterations = 0;
    std::vector<double> bandwidths;  // bandwidth used at each iteration
    std::size_t skipped_anchors = 0;  // summed over iterations
    std::size_t inflated_anchors = 0;  // anchors that needed a wider bandwidth
};

[[nodiscard]] FitResult iopg_fit(const EmbeddedSample& sample, Eigen::Index d, const FitOptions& opts = {});

// Without `init` the iOPG estimate is used as the starting basis.
[[nodiscard]] FitResult imave_fit(const EmbeddedSample& sample, Eigen::Index d, const FitOptions& opts = {},
                                  const std::optional<Basis>& init = std::nullopt);

// Dispatch on the estimator kind.
[[nodiscard]] FitResult fit(const EmbeddedSample& sample, EstimatorKind kind, Eigen::Index d,
                            const FitOptions& opts = {});

}  // namespace imave
