#pragma once

// Seeded generators for the simulation models with known ground truth.
//
//   I1   2x2 SPD,  log Y ~ N(log M(X), sigma^2), single index, X ~ U[0,1]^p
//   I2   5x5 SPD,  same noise model, two indices, X ~ U[0,1]^p
//   II1  3x3 SPD,  Y = exp(f(X1 + X2)) (+) zeta, X ~ U[0,1]^p, d = 1
//   II2  3x3 SPD,  Y = exp(f1(X1) + f2(X2)) (+) zeta, d = 2
//   III  S^2,      Y = Exp_{p0}(l(X)), X ~ U[-1,1]^p, d = 2

#include "imave/estimators.hpp"
#include "imave/manifold.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace imave {

enum class ModelId { I1, I2, II1, II2, III };

[[nodiscard]] std::string_view to_string(ModelId id) noexcept;
[[nodiscard]] ModelId parse_model(std::string_view name);

struct ModelSpec {
    ModelId id = ModelId::I1;
    Eigen::Index p = 10;
    Eigen::Index n = 200;
    // Study I: scale of the symmetric matrix normal noise.
    // Studies II and III: standard deviation of the tangent-space noise.
    double sigma = 0.2;
    std::uint64_t seed = 1;
};

// Default noise level for the model (0.2 for Study I, 0.1 otherwise).
[[nodiscard]] double default_sigma(ModelId id) noexcept;
// Response matrix size (0 for sphere models).
[[nodiscard]] Eigen::Index response_dim(ModelId id) noexcept;
[[nodiscard]] Eigen::Index true_dimension(ModelId id) noexcept;
[[nodiscard]] Eigen::Index min_predictors(ModelId id) noexcept;
// Sphere models are fitted with the sphere metric; everything else defaults to log-Euclidean.
[[nodiscard]] bool is_sphere_model(ModelId id) noexcept;

struct GeneratedData {
    Matrix x;
    ResponseSet y;
    Basis b0;
    Eigen::Index d_true = 0;
    std::size_t redraws = 0;  // rejected predictor rows (Study I-2 only)
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;
// Seed of replication r (0-based) under a master seed.
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t master, std::uint64_t r) noexcept;
// Seed of a named sub-stream of one data set.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// M + sigma Z with Z having independent N(0,1) diagonal and N(0,1/2) off-diagonal entries.
[[nodiscard]] SymMatrix sym_matrix_normal(const SymMatrix& mean, double sigma, Rng& rng);

// Mean matrices M(X) of Study I.
[[nodiscard]] Matrix study_i_mean(ModelId variant, const Vector& x);
// Tangent-space mean f(X) of Study II (zero diagonal).
[[nodiscard]] Matrix study_ii_mean(ModelId variant, const Vector& x);
// Noise-free tangent vector l(X) of Study III at p0 = (0,0,1).
[[nodiscard]] Eigen::Vector3d study_iii_tangent(const Vector& x);

[[nodiscard]] GeneratedData gen_study_i(const ModelSpec& spec);
[[nodiscard]] GeneratedData gen_study_ii(const ModelSpec& spec);
[[nodiscard]] GeneratedData gen_study_iii(const ModelSpec& spec);

// Dispatches on spec.id after checking p >= min_predictors(id) and n >= 2.
[[nodiscard]] GeneratedData generate(const ModelSpec& spec);

}  // namespace imave
