#pragma once

// Kernels, bandwidth schedules and normalized local weights.

#include "imave/manifold.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace imave {

enum class KernelKind { quartic, gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::quartic;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

[[nodiscard]] std::string_view to_string(KernelKind kind) noexcept;
[[nodiscard]] KernelKind parse_kernel_kind(std::string_view name);

// Kernel profile as a function of the squared scaled norm ||u/h||^2:
// quartic 15/16 (1 - v^2)^2 1(v^2 < 1), gaussian exp(-v^2 / 2).
[[nodiscard]] double kernel_profile(KernelKind kind, double scaled_sq_norm) noexcept;

// K_h(u) = K(u/h) / h^dim(u). Throws ValidationError for h <= 0.
[[nodiscard]] double kernel_eval(const KernelSpec& spec, const Vector& u, double h);

inline constexpr double kDefaultC0 = 2.34;

// h0 = c0 n^{-1/(max(p,3)+6)}
[[nodiscard]] double initial_bandwidth(Eigen::Index n, Eigen::Index p, double c0 = kDefaultC0);

// Geometric shrink factor r_n = n^{-1/(2(max(p,3)+6))}.
[[nodiscard]] double shrink_factor(Eigen::Index n, Eigen::Index p);

// Lower bound c0 n^{-1/(d+4)}.
[[nodiscard]] double bandwidth_floor(Eigen::Index n, Eigen::Index d, double c0 = kDefaultC0);

// max(r_n h_t, c0 n^{-1/(d+4)})
[[nodiscard]] double next_bandwidth(double h_t, Eigen::Index n, Eigen::Index p, Eigen::Index d,
                                    double c0 = kDefaultC0);

// Normal-reference rule {4/(dim+2)}^{1/(dim+4)} n^{-1/(d+4)}, dim the kernel argument dimension.
[[nodiscard]] double rule_of_thumb_bandwidth(Eigen::Index n, Eigen::Index dim, Eigen::Index d);

// How an estimator picks its bandwidth at each iteration.
struct BandwidthPolicy {
    enum class Kind {
        schedule,       // h0, then next_bandwidth at every iteration
        rule_of_thumb,  // rule_of_thumb_bandwidth for the current kernel dimension, no shrinking
        fixed           // constant value
    };
    Kind kind = Kind::schedule;
    double value = 0.0;  // used only by `fixed`

    friend bool operator==(const BandwidthPolicy&, const BandwidthPolicy&) = default;
};

[[nodiscard]] std::string_view to_string(BandwidthPolicy::Kind kind) noexcept;
[[nodiscard]] BandwidthPolicy::Kind parse_bandwidth_kind(std::string_view name);

enum class SelfTerm { include, exclude };

// Normalized weights w_ij proportional to K_h(u_i - u_j) where `projected` holds
// u_i = B^T X_i as rows. Throws DegenerateNeighborhoodError when every
// (non-excluded) kernel value is zero.
[[nodiscard]] Vector local_weights_projected(const Matrix& projected, Eigen::Index j, double h,
                                             const KernelSpec& spec, SelfTerm self = SelfTerm::include);

// Non-throwing variant: std::nullopt for a degenerate neighbourhood.
[[nodiscard]] std::optional<Vector> try_local_weights_projected(const Matrix& projected, Eigen::Index j, double h,
                                                                const KernelSpec& spec,
                                                                SelfTerm self = SelfTerm::include);

// Same with explicit design X (n x p) and optional basis B (p x k); no basis means identity.
[[nodiscard]] Vector local_weights(const Matrix& x, const std::optional<Matrix>& basis, Eigen::Index j,
                                   double h, const KernelSpec& spec);

}  // namespace imave
