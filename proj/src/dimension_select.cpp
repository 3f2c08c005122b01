#include "imave/dimension_select.hpp"

#include "imave/errors.hpp"
#include "imave/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace imave {

namespace {

std::optional<TangentVector> try_loo_predict(const Matrix& z, const Matrix& projected, double h, Eigen::Index j,
                                             const KernelSpec& spec) {
    auto w = try_local_weights_projected(projected, j, h, spec, SelfTerm::exclude);
    if (!w) {
        return std::nullopt;
    }
    return TangentVector(z.transpose() * *w);
}

void check_shapes(const Matrix& z, const Matrix& x, const Basis& basis) {
    if (z.rows() != x.rows() || basis.p() != x.cols()) {
        throw ValidationError("cross-validation: inconsistent shapes of Z, X and B");
    }
}

}  // namespace

TangentVector nw_loo_predict(const Matrix& z, const Matrix& x, const Basis& basis, double h, Eigen::Index j,
                             const KernelSpec& spec) {
    check_shapes(z, x, basis);
    auto pred = try_loo_predict(z, x * basis.matrix(), h, j, spec);
    if (!pred) {
        std::ostringstream msg;
        msg << "nw_loo_predict: anchor " << j << " has no neighbours within bandwidth " << h;
        throw DegenerateNeighborhoodError(msg.str(), static_cast<std::size_t>(j));
    }
    return std::move(*pred);
}

CvValue cv_value(const Matrix& z, const Matrix& x, const Basis& basis, double h, const KernelSpec& spec) {
    check_shapes(z, x, basis);
    const Matrix projected = x * basis.matrix();
    CvValue out;
    double total = 0.0;
    std::size_t used = 0;
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
        const auto pred = try_loo_predict(z, projected, h, j, spec);
        if (!pred) {
            ++out.skipped;
            continue;
        }
        total += (z.row(j).transpose() - *pred).squaredNorm();
        ++used;
    }
    if (used == 0) {
        throw EstimationError("cv_value: every anchor lacks neighbours at bandwidth " + std::to_string(h));
    }
    out.value = total / static_cast<double>(used);
    return out;
}

double cv_bandwidth(Eigen::Index n, Eigen::Index l, double c0) { return bandwidth_floor(n, l, c0); }

CvResult select_dimension(const EmbeddedSample& sample, EstimatorKind estimator, const FitOptions& opts,
                          Eigen::Index p_max) {
    if (p_max < 1 || p_max > sample.p()) {
        throw ValidationError("select_dimension: p_max must lie in [1, p]");
    }
    const auto count = static_cast<std::size_t>(p_max);
    CvResult result;
    result.cv_values.assign(count, std::numeric_limits<double>::quiet_NaN());
    result.bandwidths.assign(count, 0.0);
    result.skipped.assign(count, 0);
    result.failures.assign(count, std::string{});

    // CV runs on the same predictor scale the fits were made on.
    const Matrix x_cv = opts.standardize ? standardize_predictors(sample.x).first : sample.x;

    // Dimensions run one after another; each fit parallelizes over anchors.
    for (std::size_t idx = 0; idx < count; ++idx) {
        const auto l = static_cast<Eigen::Index>(idx + 1);
        const double h = cv_bandwidth(sample.n(), l, opts.c0);
        result.bandwidths[idx] = h;
        try {
            const FitResult fitted = fit(sample, estimator, l, opts);
            const Basis& b = fitted.basis_standardized ? *fitted.basis_standardized : fitted.basis;
            const CvValue cv = cv_value(sample.z, x_cv, b, h, opts.kernel);
            result.cv_values[idx] = cv.value;
            result.skipped[idx] = cv.skipped;
        } catch (const Error& e) {
            result.failures[idx] = e.what();
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (!std::isnan(result.cv_values[idx]) && result.cv_values[idx] < best) {
            best = result.cv_values[idx];
            result.d_hat = static_cast<Eigen::Index>(idx + 1);
        }
    }
    if (result.d_hat == 0) {
        throw EstimationError("select_dimension: every working dimension failed");
    }
    return result;
}

}  // namespace imave
