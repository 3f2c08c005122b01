#pragma once

// Leave-one-out cross-validation for the structural dimension.

#include "imave/estimators.hpp"
#include "imave/smoothing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace imave {

// Nadaraya-Watson prediction of Z_j from the other rows, kernel on B^T (X_i - X_j).
// Throws DegenerateNeighborhoodError when no other row has positive weight.
[[nodiscard]] TangentVector nw_loo_predict(const Matrix& z, const Matrix& x, const Basis& basis, double h,
                                           Eigen::Index j, const KernelSpec& spec);

struct CvValue {
    double value = 0.0;
    std::size_t skipped = 0;  // anchors left out for lack of neighbours
};

// (1/n') sum_j || Z_j - zhat_{-j} ||^2 over the n' anchors with a neighbourhood.
// Throws EstimationError when every anchor is skipped.
[[nodiscard]] CvValue cv_value(const Matrix& z, const Matrix& x, const Basis& basis, double h,
                               const KernelSpec& spec);

// h_l = c0 n^{-1/(l+4)}
[[nodiscard]] double cv_bandwidth(Eigen::Index n, Eigen::Index l, double c0 = kDefaultC0);

struct CvResult {
    // Entry l-1 belongs to working dimension l; NaN when that fit failed.
    std::vector<double> cv_values;
    std::vector<double> bandwidths;
    std::vector<std::size_t> skipped;
    std::vector<std::string> failures;  // empty string when dimension l succeeded
    Eigen::Index d_hat = 0;
};

// Fits B(l) for l = 1..p_max with `estimator` and returns argmin_l CV(l).
// Throws EstimationError when every working dimension fails.
[[nodiscard]] CvResult select_dimension(const EmbeddedSample& sample, EstimatorKind estimator, const FitOptions& opts,
                                        Eigen::Index p_max);

}  // namespace imave
