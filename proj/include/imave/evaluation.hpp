#pragma once

// Monte-Carlo replication harness and CSV reporting.

#include "imave/dimension_select.hpp"
#include "imave/estimators.hpp"
#include "imave/simgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace imave {

// Fit options each simulation study was run with: quartic kernel and the
// shrinking schedule for Studies I and III, Gaussian kernel with the
// rule-of-thumb bandwidth on standardized predictors for Study II.
[[nodiscard]] FitOptions study_fit_options(ModelId id);

// The metric a method implies for a model (sphere models always use the sphere embedding).
[[nodiscard]] Metric metric_for(ModelId id, const Method& method);

struct ExperimentResult {
    ModelId model = ModelId::I1;
    Eigen::Index p = 0;
    Eigen::Index n = 0;
    double sigma = 0.0;
    std::string method;
    std::uint64_t master_seed = 0;

    std::vector<std::uint64_t> seeds;   // per replication
    std::vector<double> errors;         // NaN for failed replications
    std::vector<char> failed;
    std::vector<std::string> failure_messages;
    std::vector<double> wallclock_ms;
    std::vector<std::size_t> skipped_anchors;

    double mean = 0.0;  // over successful replications
    double sd = 0.0;    // divisor R'-1; 0 when fewer than two successes
    std::size_t failures = 0;
    bool sd_undefined = false;    // fewer than two successful replications
    bool failure_flagged = false; // more than 10% of replications failed

    [[nodiscard]] std::size_t replications() const noexcept { return errors.size(); }
};

// Recomputes mean, sd and the flags from the per-replication vectors.
void summarize(ExperimentResult& result);

struct RunSettings {
    FitOptions fit;
    int replication_threads = 1;  // replications in flight; fits inside stay serial when > 1
};

// Replication r uses data seed replication_seed(master_seed, r).
[[nodiscard]] ExperimentResult run_replications(const ModelSpec& spec, const Method& method,
                                                const RunSettings& settings, int replications);

struct CvStudyResult {
    ModelId model = ModelId::I1;
    Eigen::Index p = 0;
    Eigen::Index n = 0;
    double sigma = 0.0;
    Eigen::Index d_true = 0;
    std::vector<Eigen::Index> d_hats;  // 0 for failed replications
    std::size_t under = 0;
    std::size_t correct = 0;
    std::size_t over = 0;
    std::size_t failures = 0;
};

// Selects d by cross-validation in every replication (iOPG fits, p_max = p).
[[nodiscard]] CvStudyResult run_cv_study(const ModelSpec& spec, const RunSettings& settings, int replications);

// model,p,n,sigma,method,rep,seed,error,failed,wallclock_ms
void write_results_csv(std::ostream& out, const ExperimentResult& result, bool header = true);
// model,p,n,sigma,method,mean,sd,failures
void write_summary_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
// model,p,n,sigma,d_true,under,correct,over,failures
void write_cv_study_csv(std::ostream& out, const CvStudyResult& result, bool header = true);

}  // namespace imave
