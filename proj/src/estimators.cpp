#include "imave/estimators.hpp"

#include "imave/errors.hpp"
#include "imave/local_fit.hpp"
#include "imave/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace imave {

// ---- names ------------------------------------------------------------------

std::string_view to_string(Metric metric) noexcept {
    switch (metric) {
        case Metric::log_euclidean: return "log-euclidean";
        case Metric::log_cholesky: return "log-cholesky";
        case Metric::sphere: return "sphere";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    if (name == "log-euclidean" || name == "eu") return Metric::log_euclidean;
    if (name == "log-cholesky" || name == "ch") return Metric::log_cholesky;
    if (name == "sphere") return Metric::sphere;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

std::string to_string(const Method& method) {
    std::string prefix;
    switch (method.metric) {
        case Metric::log_euclidean: prefix = "eu"; break;
        case Metric::log_cholesky: prefix = "ch"; break;
        case Metric::sphere: prefix = "sphere"; break;
    }
    return prefix + (method.estimator == EstimatorKind::iopg ? "-iopg" : "-imave");
}

Method parse_method(std::string_view name) {
    const auto dash = name.rfind('-');
    if (dash == std::string_view::npos) {
        throw ValidationError("unknown method '" + std::string(name) + "'");
    }
    const auto estimator = name.substr(dash + 1);
    Method method;
    method.metric = parse_metric(name.substr(0, dash));
    if (estimator == "iopg") {
        method.estimator = EstimatorKind::iopg;
    } else if (estimator == "imave") {
        method.estimator = EstimatorKind::imave;
    } else {
        throw ValidationError("unknown method '" + std::string(name) + "'");
    }
    return method;
}

// ---- Basis ------------------------------------------------------------------

Basis::Basis(const Matrix& entries) : entries_(entries) {
    if (entries.rows() < 1 || entries.cols() < 1 || entries.cols() > entries.rows()) {
        throw ValidationError("Basis: expected a p x d matrix with 1 <= d <= p");
    }
    const Matrix gram = entries.transpose() * entries;
    if ((gram - Matrix::Identity(entries.cols(), entries.cols())).norm() > 1e-10) {
        throw ValidationError("Basis: columns are not orthonormal");
    }
}

Basis Basis::orthonormalize(const Matrix& columns) {
    if (columns.rows() < 1 || columns.cols() < 1 || columns.cols() > columns.rows() || !columns.allFinite()) {
        throw ValidationError("Basis::orthonormalize: expected a finite p x d matrix with 1 <= d <= p");
    }
    Eigen::HouseholderQR<Matrix> qr(columns);
    const Eigen::Index d = columns.cols();
    Matrix q = qr.householderQ() * Matrix::Identity(columns.rows(), d);
    const auto r_diag = qr.matrixQR().diagonal();
    const double scale = r_diag.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < d; ++k) {
        if (!(std::abs(r_diag(k)) > 1e-12 * scale)) {
            throw ValidationError("Basis::orthonormalize: columns are linearly dependent");
        }
        if (r_diag(k) < 0.0) {
            q.col(k) = -q.col(k);
        }
    }
    return Basis(q);
}

double subspace_error(const Basis& bhat, const Basis& b0) {
    if (bhat.p() != b0.p()) {
        throw ValidationError("subspace_error: bases live in spaces of different dimension");
    }
    const Matrix diff = bhat.matrix() * bhat.matrix().transpose() - b0.matrix() * b0.matrix().transpose();
    return diff.norm();
}

// ---- embedding --------------------------------------------------------------

std::size_t response_count(const ResponseSet& y) noexcept {
    return std::visit([](const auto& v) { return v.size(); }, y);
}

EmbeddedSample embed_responses(const Matrix& x, const ResponseSet& y, Metric metric) {
    const auto n = static_cast<Eigen::Index>(response_count(y));
    if (x.rows() != n) {
        std::ostringstream msg;
        msg << "embed_responses: " << x.rows() << " predictor rows but " << n << " responses";
        throw ValidationError(msg.str());
    }
    if (n == 0) {
        throw ValidationError("embed_responses: empty sample");
    }
    EmbeddedSample sample;
    sample.x = x;
    sample.metric = metric;

    if (metric == Metric::sphere) {
        const auto* points = std::get_if<std::vector<SpherePoint>>(&y);
        if (points == nullptr) {
            throw ValidationError("embed_responses: the sphere metric needs sphere-valued responses");
        }
        const SpherePoint mu = frechet_mean_sphere(*points);
        sample.basepoint = mu;
        sample.frame = sphere_tangent_frame(mu);
        sample.z.resize(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            sample.z.row(i) = (sample.frame.transpose() * sphere_log(mu, (*points)[static_cast<std::size_t>(i)]))
                                  .transpose();
        }
        return sample;
    }

    const auto* mats = std::get_if<std::vector<SpdMatrix>>(&y);
    if (mats == nullptr) {
        throw ValidationError("embed_responses: SPD metrics need SPD-valued responses");
    }
    const Eigen::Index m = mats->front().dim();
    sample.m = m;
    sample.z.resize(n, tri_size(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        const SpdMatrix& s = (*mats)[static_cast<std::size_t>(i)];
        if (s.dim() != m) {
            throw ValidationError("embed_responses: responses have different dimensions");
        }
        sample.z.row(i) = (metric == Metric::log_euclidean ? vecs(spd_log(s)) : vecl(chol_map(cholesky_factor(s))))
                              .transpose();
    }
    return sample;
}

std::variant<SpdMatrix, SpherePoint> unembed(const EmbeddedSample& sample, const TangentVector& z) {
    switch (sample.metric) {
        case Metric::log_euclidean: return spd_exp(unvecs(z, sample.m));
        case Metric::log_cholesky: {
            const Matrix l = chol_map_inverse(unvecl(z, sample.m)).matrix();
            return make_spd_unchecked(l * l.transpose());
        }
        case Metric::sphere: {
            if (!sample.basepoint || z.size() != 2) {
                throw ValidationError("unembed: sphere sample without base point or wrong coordinate length");
            }
            return sphere_exp(*sample.basepoint, sample.frame * z);
        }
    }
    throw ValidationError("unembed: unknown metric");
}

// ---- standardization --------------------------------------------------------

std::pair<Matrix, Standardization> standardize_predictors(const Matrix& x) {
    if (x.rows() < 2) {
        throw ValidationError("standardize_predictors: need at least two rows");
    }
    Standardization t;
    t.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - t.mean.transpose();
    t.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows() - 1)).cwiseSqrt().transpose();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (!(t.scale(c) > 0.0)) {
            throw ValidationError("standardize_predictors: column " + std::to_string(c + 1) +
                                  " is constant and cannot be standardized");
        }
    }
    Matrix out = centered * t.scale.cwiseInverse().asDiagonal();
    return {std::move(out), std::move(t)};
}

Basis to_original_scale(const Basis& standardized, const Standardization& transform) {
    return Basis::orthonormalize(transform.scale.cwiseInverse().asDiagonal() * standardized.matrix());
}

// ---- shared iteration machinery ---------------------------------------------

namespace {

constexpr int kMaxInflations = 5;
constexpr double kInflationFactor = 1.5;
constexpr double kPseudoInverseCutoff = 1e-12;

struct AnchorWeights {
    std::optional<Vector> w;
    bool inflated = false;
};

// An anchor whose only positive weight is its own is isolated. Widens the
// bandwidth for isolated anchors (x1.5, at most 5 times) before giving up.
AnchorWeights anchor_weights(const Matrix& projected, Eigen::Index j, double h, const KernelSpec& kernel) {
    double hh = h;
    for (int attempt = 0; attempt <= kMaxInflations; ++attempt) {
        auto w = try_local_weights_projected(projected, j, hh, kernel);
        if (w && (*w)(j) < 1.0) {
            return {std::move(w), attempt > 0};
        }
        hh *= kInflationFactor;
    }
    return {};
}

class BandwidthTracker {
public:
    BandwidthTracker(const FitOptions& opts, Eigen::Index n, Eigen::Index p, Eigen::Index d)
        : opts_(opts), n_(n), p_(p), d_(d) {
        if (opts.bandwidth.kind == BandwidthPolicy::Kind::schedule) {
            h_ = initial_bandwidth(n, p, opts.c0);
        }
    }

    // Bandwidth for an iteration whose kernel argument has `kernel_dim` components.
    [[nodiscard]] double current(Eigen::Index kernel_dim) const {
        switch (opts_.bandwidth.kind) {
            case BandwidthPolicy::Kind::schedule: return h_;
            case BandwidthPolicy::Kind::rule_of_thumb: return rule_of_thumb_bandwidth(n_, kernel_dim, d_);
            case BandwidthPolicy::Kind::fixed: return opts_.bandwidth.value;
        }
        return h_;
    }

    void advance() {
        if (opts_.bandwidth.kind == BandwidthPolicy::Kind::schedule) {
            h_ = next_bandwidth(h_, n_, p_, d_, opts_.c0);
        }
    }

private:
    const FitOptions& opts_;
    Eigen::Index n_, p_, d_;
    double h_ = 0.0;
};

void validate_fit_inputs(const EmbeddedSample& sample, Eigen::Index d, const FitOptions& opts) {
    if (sample.n() < 2 || sample.z.rows() != sample.n() || sample.q() < 1) {
        throw ValidationError("fit: sample needs at least two rows and matching X/Z sizes");
    }
    if (d < 1 || d > sample.p()) {
        std::ostringstream msg;
        msg << "fit: structural dimension d = " << d << " must lie in [1, p = " << sample.p() << "]";
        throw ValidationError(msg.str());
    }
    if (opts.max_iters < 1) {
        throw ValidationError("fit: max_iters must be at least 1");
    }
    if (opts.bandwidth.kind == BandwidthPolicy::Kind::fixed && !(opts.bandwidth.value > 0.0)) {
        throw ValidationError("fit: a fixed bandwidth must be positive");
    }
}

void check_skips(std::size_t skipped, Eigen::Index n, const FitOptions& opts, const char* who) {
    if (static_cast<double>(skipped) > opts.max_skip_fraction * static_cast<double>(n)) {
        std::ostringstream msg;
        msg << who << ": " << skipped << " of " << n << " anchors have empty neighbourhoods";
        throw EstimationError(msg.str());
    }
}

// Eigenvectors of the top-d eigenvalues, descending; each vector's largest-magnitude
// entry made positive; near-ties ordered lexicographically.
Matrix leading_eigenvectors(const Matrix& sym, Eigen::Index d) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw EstimationError("iopg: eigendecomposition failed");
    }
    const Eigen::Index p = sym.rows();
    Vector values = eig.eigenvalues().reverse();
    Matrix vectors = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index c = 0; c < p; ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) {
            vectors.col(c) = -vectors.col(c);
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start + 1;
        while (end < order.size() && values(static_cast<Eigen::Index>(end - 1)) -
                                             values(static_cast<Eigen::Index>(end)) <
                                         1e-12) {
            ++end;
        }
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end),
                  [&](Eigen::Index a, Eigen::Index b) {
                      const auto va = vectors.col(a);
                      const auto vb = vectors.col(b);
                      return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end(),
                                                          [](double x, double y) { return x > y; });
                  });
        start = end;
    }
    Matrix out(p, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        out.col(c) = vectors.col(order[static_cast<std::size_t>(c)]);
    }
    return out;
}

struct Prepared {
    Matrix x;
    std::optional<Standardization> transform;
};

Prepared prepare_predictors(const EmbeddedSample& sample, const FitOptions& opts) {
    if (!opts.standardize) {
        return {sample.x, std::nullopt};
    }
    auto [xs, t] = standardize_predictors(sample.x);
    return {std::move(xs), std::move(t)};
}

FitResult finish(Basis standardized_basis, const std::optional<Standardization>& transform, FitResult partial) {
    if (transform) {
        partial.basis = to_original_scale(standardized_basis, *transform);
        partial.basis_standardized = std::move(standardized_basis);
    } else {
        partial.basis = std::move(standardized_basis);
    }
    return partial;
}

// iOPG on already-prepared predictors; returns the basis on the prepared scale.
FitResult iopg_core(const Matrix& x, const Matrix& z, Eigen::Index d, const FitOptions& opts) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    BandwidthTracker bandwidth(opts, n, p, d);

    FitResult result{Basis::identity(p), std::nullopt, 0, {}, 0, 0};
    std::optional<Matrix> current;  // B_(t-1); empty means I_p
    std::vector<std::optional<Matrix>> gradients(static_cast<std::size_t>(n));
    std::vector<char> inflated(static_cast<std::size_t>(n));

    for (int t = 1; t <= opts.max_iters; ++t) {
        const Matrix projected = current ? Matrix(x * *current) : x;
        const double h = bandwidth.current(projected.cols());
        result.bandwidths.push_back(h);

        parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t jj) {
            const auto j = static_cast<Eigen::Index>(jj);
            auto weights = anchor_weights(projected, j, h, opts.kernel);
            inflated[jj] = weights.inflated ? 1 : 0;
            if (!weights.w) {
                gradients[jj].reset();
                return;
            }
            const Matrix diff = x.rowwise() - x.row(j);
            gradients[jj] = local_linear_fit_regressors(z, diff, j, *weights.w, opts.ridge).slope;
        });

        Matrix lambda = Matrix::Zero(p, p);
        std::size_t skipped = 0;
        for (std::size_t j = 0; j < gradients.size(); ++j) {
            if (!gradients[j]) {
                ++skipped;
                continue;
            }
            lambda.selfadjointView<Eigen::Lower>().rankUpdate(gradients[j]->transpose());
            result.inflated_anchors += static_cast<std::size_t>(inflated[j]);
        }
        check_skips(skipped, n, opts, "iopg");
        result.skipped_anchors += skipped;
        lambda = Matrix(lambda.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);

        Basis next(leading_eigenvectors(lambda, d));
        result.iterations = t;
        const bool settled = opts.early_stop && current &&
                             subspace_error(next, Basis(*current)) < opts.early_stop_tol;
        current = next.matrix();
        result.basis = std::move(next);
        if (settled) {
            break;
        }
        bandwidth.advance();
    }
    return result;
}

// Solves sym * v = rhs through the eigendecomposition, dropping eigenvalues
// below cutoff * largest (Moore-Penrose pseudo-inverse).
Vector pseudo_solve(const Matrix& sym, const Vector& rhs) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw EstimationError("imave: eigendecomposition of the basis system failed");
    }
    const Vector& values = eig.eigenvalues();
    const double largest = values.cwiseAbs().maxCoeff();
    if (!(largest > 0.0)) {
        throw EstimationError("imave: basis system is identically zero (all local slopes vanished)");
    }
    const Matrix& vectors = eig.eigenvectors();
    Vector coords = vectors.transpose() * rhs;
    for (Eigen::Index k = 0; k < coords.size(); ++k) {
        coords(k) = values(k) > kPseudoInverseCutoff * largest ? coords(k) / values(k) : 0.0;
    }
    return vectors * coords;
}

struct AnchorSystem {
    Matrix lhs;  // (C C^T) (x) S, pd x pd
    Vector rhs;  // pd
};

FitResult imave_core(const Matrix& x, const Matrix& z, Eigen::Index d, const FitOptions& opts, Basis start) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const Eigen::Index pd = p * d;
    BandwidthTracker bandwidth(opts, n, p, d);

    FitResult result{std::move(start), std::nullopt, 0, {}, 0, 0};
    std::vector<std::optional<AnchorSystem>> systems(static_cast<std::size_t>(n));
    std::vector<char> inflated(static_cast<std::size_t>(n));

    for (int t = 1; t <= opts.max_iters; ++t) {
        const Matrix& b = result.basis.matrix();
        const Matrix projected = x * b;
        const double h = bandwidth.current(d);
        result.bandwidths.push_back(h);

        parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t jj) {
            const auto j = static_cast<Eigen::Index>(jj);
            auto weights = anchor_weights(projected, j, h, opts.kernel);
            inflated[jj] = weights.inflated ? 1 : 0;
            if (!weights.w) {
                systems[jj].reset();
                return;
            }
            const Vector& w = *weights.w;
            const Matrix reduced = projected.rowwise() - projected.row(j);
            const LocalFit local = local_linear_fit_regressors(z, reduced, j, w, opts.ridge);

            // Column s of coef is c_s, the gradient of coordinate s along the d indices.
            const Matrix coef = local.slope.transpose();  // d x q
            const Matrix dx = x.rowwise() - x.row(j);     // n x p
            const Matrix weighted_dx = w.asDiagonal() * dx;
            const Matrix scatter = dx.transpose() * weighted_dx;  // sum_i w_i dx dx^T
            const Matrix residual = z.rowwise() - local.intercept.transpose();
            const Matrix cross = (weighted_dx.transpose() * residual) * coef.transpose();  // p x d

            AnchorSystem sys;
            const Matrix cc = coef * coef.transpose();
            sys.lhs.resize(pd, pd);
            for (Eigen::Index k = 0; k < d; ++k) {
                for (Eigen::Index l = 0; l < d; ++l) {
                    sys.lhs.block(k * p, l * p, p, p) = cc(k, l) * scatter;
                }
            }
            sys.rhs = cross.reshaped();
            systems[jj] = std::move(sys);
        });

        Matrix lhs = Matrix::Zero(pd, pd);
        Vector rhs = Vector::Zero(pd);
        std::size_t skipped = 0;
        for (std::size_t j = 0; j < systems.size(); ++j) {
            if (!systems[j]) {
                ++skipped;
                continue;
            }
            lhs += systems[j]->lhs;
            rhs += systems[j]->rhs;
            result.inflated_anchors += static_cast<std::size_t>(inflated[j]);
        }
        check_skips(skipped, n, opts, "imave");
        result.skipped_anchors += skipped;

        const Vector solution = pseudo_solve(lhs, rhs);
        Basis next = [&] {
            try {
                return Basis::orthonormalize(solution.reshaped(p, d));
            } catch (const ValidationError&) {
                throw EstimationError("imave: updated basis is rank deficient");
            }
        }();
        result.iterations = t;
        const bool settled = opts.early_stop && subspace_error(next, result.basis) < opts.early_stop_tol;
        result.basis = std::move(next);
        if (settled) {
            break;
        }
        bandwidth.advance();
    }
    return result;
}

}  // namespace

FitResult iopg_fit(const EmbeddedSample& sample, Eigen::Index d, const FitOptions& opts) {
    validate_fit_inputs(sample, d, opts);
    const Prepared prep = prepare_predictors(sample, opts);
    FitResult core = iopg_core(prep.x, sample.z, d, opts);
    Basis b = core.basis;
    return finish(std::move(b), prep.transform, std::move(core));
}

FitResult imave_fit(const EmbeddedSample& sample, Eigen::Index d, const FitOptions& opts,
                    const std::optional<Basis>& init) {
    validate_fit_inputs(sample, d, opts);
    const Prepared prep = prepare_predictors(sample, opts);
    Basis start = [&] {
        if (!init) {
            return iopg_core(prep.x, sample.z, d, opts).basis;
        }
        if (init->p() != sample.p() || init->d() != d) {
            throw ValidationError("imave_fit: initial basis has the wrong shape");
        }
        if (!prep.transform) {
            return *init;
        }
        // Express the caller's original-scale basis on the standardized scale.
        return Basis::orthonormalize(prep.transform->scale.asDiagonal() * init->matrix());
    }();
    FitResult core = imave_core(prep.x, sample.z, d, opts, std::move(start));
    Basis b = core.basis;
    return finish(std::move(b), prep.transform, std::move(core));
}

FitResult fit(const EmbeddedSample& sample, EstimatorKind kind, Eigen::Index d, const FitOptions& opts) {
    return kind == EstimatorKind::iopg ? iopg_fit(sample, d, opts) : imave_fit(sample, d, opts);
}

}  // namespace imave
