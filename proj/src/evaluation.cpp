#include "imave/evaluation.hpp"

#include "imave/errors.hpp"
#include "imave/parallel.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace imave {

FitOptions study_fit_options(ModelId id) {
    FitOptions opts;
    if (id == ModelId::II1 || id == ModelId::II2) {
        opts.kernel.kind = KernelKind::gaussian;
        opts.bandwidth.kind = BandwidthPolicy::Kind::rule_of_thumb;
        opts.standardize = true;
    }
    return opts;
}

Metric metric_for(ModelId id, const Method& method) {
    if (is_sphere_model(id)) {
        return Metric::sphere;
    }
    if (method.metric == Metric::sphere) {
        throw ValidationError("the sphere metric cannot be used with SPD-valued model " + std::string(to_string(id)));
    }
    return method.metric;
}

void summarize(ExperimentResult& r) {
    double sum = 0.0;
    std::size_t ok = 0;
    r.failures = 0;
    for (std::size_t k = 0; k < r.errors.size(); ++k) {
        if (r.failed[k]) {
            ++r.failures;
            continue;
        }
        sum += r.errors[k];
        ++ok;
    }
    r.mean = ok > 0 ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (std::size_t k = 0; k < r.errors.size(); ++k) {
        if (!r.failed[k]) {
            ss += (r.errors[k] - r.mean) * (r.errors[k] - r.mean);
        }
    }
    r.sd_undefined = ok < 2;
    r.sd = ok < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(ok - 1));
    r.failure_flagged = static_cast<double>(r.failures) > 0.1 * static_cast<double>(r.errors.size());
}

namespace {

FitOptions inner_options(const RunSettings& settings) {
    FitOptions opts = settings.fit;
    if (settings.replication_threads > 1) {
        opts.threads = 1;
    }
    return opts;
}

}  // namespace

ExperimentResult run_replications(const ModelSpec& spec, const Method& method, const RunSettings& settings,
                                  int replications) {
    if (replications < 1) {
        throw ValidationError("run_replications: need at least one replication");
    }
    const Metric metric = metric_for(spec.id, method);
    const auto reps = static_cast<std::size_t>(replications);

    ExperimentResult r;
    r.model = spec.id;
    r.p = spec.p;
    r.n = spec.n;
    r.sigma = spec.sigma;
    r.method = to_string(method);
    r.master_seed = spec.seed;
    r.seeds.resize(reps);
    r.errors.assign(reps, std::numeric_limits<double>::quiet_NaN());
    r.failed.assign(reps, 0);
    r.failure_messages.assign(reps, std::string{});
    r.wallclock_ms.assign(reps, 0.0);
    r.skipped_anchors.assign(reps, 0);

    const FitOptions opts = inner_options(settings);
    parallel_for(reps, settings.replication_threads, [&](std::size_t k) {
        ModelSpec rep = spec;
        rep.seed = replication_seed(spec.seed, k);
        r.seeds[k] = rep.seed;
        const auto start = std::chrono::steady_clock::now();
        try {
            const GeneratedData data = generate(rep);
            const EmbeddedSample sample = embed_responses(data.x, data.y, metric);
            const FitResult fitted = fit(sample, method.estimator, data.d_true, opts);
            r.errors[k] = subspace_error(fitted.basis, data.b0);
            r.skipped_anchors[k] = fitted.skipped_anchors;
        } catch (const Error& e) {
            r.failed[k] = 1;
            r.failure_messages[k] = e.what();
        }
        r.wallclock_ms[k] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });
    summarize(r);
    return r;
}

CvStudyResult run_cv_study(const ModelSpec& spec, const RunSettings& settings, int replications) {
    if (replications < 1) {
        throw ValidationError("run_cv_study: need at least one replication");
    }
    const auto reps = static_cast<std::size_t>(replications);
    CvStudyResult out;
    out.model = spec.id;
    out.p = spec.p;
    out.n = spec.n;
    out.sigma = spec.sigma;
    out.d_true = true_dimension(spec.id);
    out.d_hats.assign(reps, 0);

    const Metric metric = is_sphere_model(spec.id) ? Metric::sphere : Metric::log_euclidean;
    const FitOptions opts = inner_options(settings);
    parallel_for(reps, settings.replication_threads, [&](std::size_t k) {
        ModelSpec rep = spec;
        rep.seed = replication_seed(spec.seed, k);
        try {
            const GeneratedData data = generate(rep);
            const EmbeddedSample sample = embed_responses(data.x, data.y, metric);
            out.d_hats[k] = select_dimension(sample, EstimatorKind::iopg, opts, spec.p).d_hat;
        } catch (const Error&) {
            out.d_hats[k] = 0;
        }
    });
    for (const Eigen::Index d : out.d_hats) {
        if (d == 0) {
            ++out.failures;
        } else if (d < out.d_true) {
            ++out.under;
        } else if (d == out.d_true) {
            ++out.correct;
        } else {
            ++out.over;
        }
    }
    return out;
}

void write_results_csv(std::ostream& out, const ExperimentResult& r, bool header) {
    if (header) {
        out << "model,p,n,sigma,method,rep,seed,error,failed,wallclock_ms\n";
    }
    const auto old_precision = out.precision(17);
    for (std::size_t k = 0; k < r.errors.size(); ++k) {
        out << to_string(r.model) << ',' << r.p << ',' << r.n << ',' << r.sigma << ',' << r.method << ',' << k + 1
            << ',' << r.seeds[k] << ',';
        if (r.failed[k]) {
            out << "nan";
        } else {
            out << r.errors[k];
        }
        out << ',' << (r.failed[k] ? 1 : 0) << ',' << std::fixed << std::setprecision(3) << r.wallclock_ms[k]
            << std::defaultfloat << std::setprecision(17) << '\n';
    }
    out.precision(old_precision);
}

void write_summary_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
    out << "model,p,n,sigma,method,mean,sd,failures\n";
    const auto old_precision = out.precision(10);
    for (const auto& r : results) {
        out << to_string(r.model) << ',' << r.p << ',' << r.n << ',' << r.sigma << ',' << r.method << ',' << r.mean
            << ',' << r.sd << ',' << r.failures << '\n';
    }
    out.precision(old_precision);
}

void write_cv_study_csv(std::ostream& out, const CvStudyResult& r, bool header) {
    if (header) {
        out << "model,p,n,sigma,d_true,under,correct,over,failures\n";
    }
    out << to_string(r.model) << ',' << r.p << ',' << r.n << ',' << r.sigma << ',' << r.d_true << ',' << r.under << ','
        << r.correct << ',' << r.over << ',' << r.failures << '\n';
}

}  // namespace imave
