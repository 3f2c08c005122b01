#include "imave/smoothing.hpp"

#include "imave/errors.hpp"

#include <cmath>
#include <sstream>

namespace imave {

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::quartic: return "quartic";
        case KernelKind::gaussian: return "gaussian";
    }
    return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "quartic") return KernelKind::quartic;
    if (name == "gaussian") return KernelKind::gaussian;
    throw ValidationError("unknown kernel '" + std::string(name) + "' (expected quartic or gaussian)");
}

std::string_view to_string(BandwidthPolicy::Kind kind) noexcept {
    switch (kind) {
        case BandwidthPolicy::Kind::schedule: return "schedule";
        case BandwidthPolicy::Kind::rule_of_thumb: return "rule-of-thumb";
        case BandwidthPolicy::Kind::fixed: return "fixed";
    }
    return "?";
}

BandwidthPolicy::Kind parse_bandwidth_kind(std::string_view name) {
    if (name == "schedule") return BandwidthPolicy::Kind::schedule;
    if (name == "rule-of-thumb") return BandwidthPolicy::Kind::rule_of_thumb;
    if (name == "fixed") return BandwidthPolicy::Kind::fixed;
    throw ValidationError("unknown bandwidth policy '" + std::string(name) +
                          "' (expected schedule, rule-of-thumb or fixed)");
}

double kernel_profile(KernelKind kind, double v2) noexcept {
    switch (kind) {
        case KernelKind::quartic: {
            if (v2 >= 1.0) return 0.0;
            const double t = 1.0 - v2;
            return 15.0 / 16.0 * t * t;
        }
        case KernelKind::gaussian: return std::exp(-0.5 * v2);
    }
    return 0.0;
}

double kernel_eval(const KernelSpec& spec, const Vector& u, double h) {
    if (!(h > 0.0)) {
        throw ValidationError("kernel_eval: bandwidth must be positive");
    }
    const double v2 = u.squaredNorm() / (h * h);
    return kernel_profile(spec.kind, v2) / std::pow(h, static_cast<double>(u.size()));
}

double initial_bandwidth(Eigen::Index n, Eigen::Index p, double c0) {
    if (n < 2 || p < 1) {
        throw ValidationError("initial_bandwidth: need n >= 2 and p >= 1");
    }
    const double p0 = static_cast<double>(std::max<Eigen::Index>(p, 3));
    return c0 * std::pow(static_cast<double>(n), -1.0 / (p0 + 6.0));
}

double shrink_factor(Eigen::Index n, Eigen::Index p) {
    const double p0 = static_cast<double>(std::max<Eigen::Index>(p, 3));
    return std::pow(static_cast<double>(n), -1.0 / (2.0 * (p0 + 6.0)));
}

double bandwidth_floor(Eigen::Index n, Eigen::Index d, double c0) {
    return c0 * std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
}

double next_bandwidth(double h_t, Eigen::Index n, Eigen::Index p, Eigen::Index d, double c0) {
    if (!(h_t > 0.0)) {
        throw ValidationError("next_bandwidth: bandwidth must be positive");
    }
    return std::max(shrink_factor(n, p) * h_t, bandwidth_floor(n, d, c0));
}

double rule_of_thumb_bandwidth(Eigen::Index n, Eigen::Index dim, Eigen::Index d) {
    const double k = static_cast<double>(dim);
    return std::pow(4.0 / (k + 2.0), 1.0 / (k + 4.0)) *
           std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
}

std::optional<Vector> try_local_weights_projected(const Matrix& projected, Eigen::Index j, double h,
                                                  const KernelSpec& spec, SelfTerm self) {
    const Eigen::Index n = projected.rows();
    if (j < 0 || j >= n) {
        throw ValidationError("local_weights: anchor index out of range");
    }
    if (!(h > 0.0)) {
        throw ValidationError("local_weights: bandwidth must be positive");
    }
    const double inv_h2 = 1.0 / (h * h);
    Vector w(n);
    double total = 0.0;
    const auto anchor = projected.row(j);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == j && self == SelfTerm::exclude) {
            w(i) = 0.0;
            continue;
        }
        const double v2 = (projected.row(i) - anchor).squaredNorm() * inv_h2;
        w(i) = kernel_profile(spec.kind, v2);
        total += w(i);
    }
    if (!(total > 0.0)) {
        return std::nullopt;
    }
    w /= total;
    return w;
}

Vector local_weights_projected(const Matrix& projected, Eigen::Index j, double h, const KernelSpec& spec,
                               SelfTerm self) {
    auto w = try_local_weights_projected(projected, j, h, spec, self);
    if (!w) {
        std::ostringstream msg;
        msg << "local_weights: anchor " << j << " has no neighbours within bandwidth " << h;
        throw DegenerateNeighborhoodError(msg.str(), static_cast<std::size_t>(j));
    }
    return std::move(*w);
}

Vector local_weights(const Matrix& x, const std::optional<Matrix>& basis, Eigen::Index j, double h,
                     const KernelSpec& spec) {
    if (basis && basis->rows() != x.cols()) {
        throw ValidationError("local_weights: basis row count does not match the number of predictors");
    }
    return basis ? local_weights_projected(x * *basis, j, h, spec) : local_weights_projected(x, j, h, spec);
}

}  // namespace imave
