#pragma once

// Weighted local linear least squares at one anchor point.
//
// With regressors r_i = B^T (X_i - X_j) the full normal equations have the
// Kronecker form  sum_i w_i (I_q (x) (1, r_i^T))^T (I_q (x) (1, r_i^T)),
// i.e. q identical (1+k) x (1+k) blocks. The solver therefore factorizes one
// small Gram matrix and applies it to all q response coordinates at once.

#include "imave/manifold.hpp"

#include <optional>

namespace imave {

struct LocalFit {
    TangentVector intercept;  // a_j, length q
    Matrix slope;             // q x k; row s holds c_s^T
    Eigen::Index anchor = 0;
};

// Default Tikhonov term 1e-8 * trace(Gram) / (1 + k).
inline constexpr double kDefaultRidgeFactor = 1e-8;

// `ridge` is the absolute Tikhonov term added to the Gram diagonal; std::nullopt
// selects the default relative ridge. `regressors` holds r_i = u_i - u_j as rows.
[[nodiscard]] LocalFit local_linear_fit_regressors(const Matrix& z, const Matrix& regressors, Eigen::Index j,
                                                   const Vector& w, std::optional<double> ridge = std::nullopt);

// Convenience form: regressors are B^T (X_i - X_j), or X_i - X_j without a basis.
[[nodiscard]] LocalFit local_linear_fit(const Matrix& z, const Matrix& x, const std::optional<Matrix>& basis,
                                        Eigen::Index j, const Vector& w, std::optional<double> ridge = std::nullopt);

}  // namespace imave
