#include "imave/local_fit.hpp"

#include "imave/errors.hpp"

#include <sstream>

namespace imave {

LocalFit local_linear_fit_regressors(const Matrix& z, const Matrix& regressors, Eigen::Index j, const Vector& w,
                                     std::optional<double> ridge) {
    const Eigen::Index n = z.rows();
    const Eigen::Index q = z.cols();
    const Eigen::Index k = regressors.cols();
    if (regressors.rows() != n || w.size() != n) {
        throw ValidationError("local_linear_fit: response, design and weight sizes disagree");
    }

    Matrix gram = Matrix::Zero(k + 1, k + 1);
    Matrix moment = Matrix::Zero(k + 1, q);
    Vector design(k + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wi = w(i);
        if (wi == 0.0) {
            continue;
        }
        design(0) = 1.0;
        design.tail(k) = regressors.row(i).transpose();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(design, wi);
        moment.noalias() += (wi * design) * z.row(i);
    }
    gram = gram.selfadjointView<Eigen::Lower>();

    const double lambda = ridge.value_or(kDefaultRidgeFactor * gram.trace() / static_cast<double>(k + 1));
    gram.diagonal().array() += lambda;

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "local_linear_fit: Gram matrix at anchor " << j << " is singular";
        throw RankDeficiencyError(msg.str(), static_cast<std::size_t>(j));
    }
    const Matrix coef = llt.solve(moment);
    if (!coef.allFinite()) {
        std::ostringstream msg;
        msg << "local_linear_fit: non-finite solution at anchor " << j;
        throw RankDeficiencyError(msg.str(), static_cast<std::size_t>(j));
    }

    LocalFit fit;
    fit.intercept = coef.row(0).transpose();
    fit.slope = coef.bottomRows(k).transpose();
    fit.anchor = j;
    return fit;
}

LocalFit local_linear_fit(const Matrix& z, const Matrix& x, const std::optional<Matrix>& basis, Eigen::Index j,
                          const Vector& w, std::optional<double> ridge) {
    if (x.rows() != z.rows()) {
        throw ValidationError("local_linear_fit: X and Z have different row counts");
    }
    if (j < 0 || j >= x.rows()) {
        throw ValidationError("local_linear_fit: anchor index out of range");
    }
    if (basis && basis->rows() != x.cols()) {
        throw ValidationError("local_linear_fit: basis row count does not match the number of predictors");
    }
    Matrix diff = x.rowwise() - x.row(j);
    if (basis) {
        diff = diff * *basis;
    }
    return local_linear_fit_regressors(z, diff, j, w, ridge);
}

}  // namespace imave
