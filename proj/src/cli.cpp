#include "imave/cli.hpp"

#include "imave/dataset.hpp"
#include "imave/dimension_select.hpp"
#include "imave/errors.hpp"
#include "imave/evaluation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace imave {

using Json = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr || dynamic_cast<const ValidationError*>(&e) != nullptr) {
        return kExitUsage;
    }
    if (dynamic_cast<const DataError*>(&e) != nullptr) {
        return kExitData;
    }
    if (dynamic_cast<const Error*>(&e) != nullptr) {
        return kExitNumerical;
    }
    return kExitNumerical;
}

namespace {

struct Loaded {
    EmbeddedSample sample;
    std::optional<GeneratedData> generated;
};

ModelSpec model_spec(const RunConfig& c) {
    ModelSpec spec;
    spec.id = *c.model;
    spec.p = c.p;
    spec.n = c.n;
    spec.sigma = c.sigma;
    spec.seed = c.seed;
    return spec;
}

Metric data_metric(const ResponseSet& y, const Method& method) {
    const bool sphere = std::holds_alternative<std::vector<SpherePoint>>(y);
    if (sphere) {
        return Metric::sphere;
    }
    if (method.metric == Metric::sphere) {
        throw ValidationError("method " + to_string(method) + " needs sphere-valued responses");
    }
    return method.metric;
}

Loaded load_sample(const RunConfig& c) {
    if (c.model) {
        GeneratedData data = generate(model_spec(c));
        EmbeddedSample sample = embed_responses(data.x, data.y, data_metric(data.y, c.method));
        return {std::move(sample), std::move(data)};
    }
    Dataset data = read_dataset(*c.dataset);
    return {embed_responses(data.x, data.y, data_metric(data.y, c.method)), std::nullopt};
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(r, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Json config_json(const RunConfig& c) {
    std::stringstream ss;
    write_config(ss, c);
    const ConfigEntries entries = read_config_entries(ss);
    Json j = Json::object();
    for (const auto& key : config_keys()) {
        if (const auto it = entries.find(key); it != entries.end()) {
            j[key] = it->second.value;
        }
    }
    return j;
}

Json cv_json(const CvResult& cv) {
    Json j;
    j["d_hat"] = cv.d_hat;
    Json rows = Json::array();
    for (std::size_t k = 0; k < cv.cv_values.size(); ++k) {
        Json row;
        row["l"] = k + 1;
        row["cv"] = std::isnan(cv.cv_values[k]) ? Json(nullptr) : Json(cv.cv_values[k]);
        row["bandwidth"] = cv.bandwidths[k];
        row["skipped"] = cv.skipped[k];
        if (!cv.failures[k].empty()) {
            row["failure"] = cv.failures[k];
        }
        rows.push_back(std::move(row));
    }
    j["dimensions"] = std::move(rows);
    return j;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    return out;
}

// Writes to `path`, or to `fallback` when the path is empty.
template <class Write>
void emit(const std::string& path, std::ostream& fallback, Write write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream out = open_output(path);
    write(out);
    if (!out) {
        throw DataError("failed while writing '" + path + "'");
    }
}

void write_report(const std::string& path, const Json& report) {
    if (path.empty()) {
        return;
    }
    std::ofstream out = open_output(path);
    out << report.dump(2) << '\n';
}

void write_basis_csv(std::ostream& out, const FitResult& r) {
    out << "scale,row";
    for (Eigen::Index k = 1; k <= r.basis.d(); ++k) {
        out << ",b" << k;
    }
    out << '\n';
    const auto old_precision = out.precision(17);
    auto block = [&](const char* scale, const Matrix& b) {
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
            out << scale << ',' << i + 1;
            for (Eigen::Index k = 0; k < b.cols(); ++k) {
                out << ',' << b(i, k);
            }
            out << '\n';
        }
    };
    block("original", r.basis.matrix());
    if (r.basis_standardized) {
        block("standardized", r.basis_standardized->matrix());
    }
    out.precision(old_precision);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const Loaded loaded = load_sample(c);
    const EmbeddedSample& sample = loaded.sample;

    Json report;
    report["subcommand"] = "fit";
    report["config"] = config_json(c);
    report["master_seed"] = c.seed;

    Eigen::Index d = 0;
    if (c.d) {
        d = *c.d;
    } else {
        const CvResult cv = select_dimension(sample, EstimatorKind::iopg, c.fit, sample.p());
        report["cross_validation"] = cv_json(cv);
        d = cv.d_hat;
    }
    if (d > sample.p()) {
        throw ValidationError("d = " + std::to_string(d) + " exceeds the number of predictors " +
                              std::to_string(sample.p()));
    }
    const FitResult result = fit(sample, c.method.estimator, d, c.fit);

    emit(c.output, out, [&](std::ostream& s) { write_basis_csv(s, result); });

    report["n"] = sample.n();
    report["p"] = sample.p();
    report["d"] = d;
    report["method"] = to_string(c.method);
    report["iterations"] = result.iterations;
    report["bandwidths"] = result.bandwidths;
    report["skipped_anchors"] = result.skipped_anchors;
    report["inflated_anchors"] = result.inflated_anchors;
    report["basis"] = matrix_json(result.basis.matrix());
    if (result.basis_standardized) {
        report["basis_standardized"] = matrix_json(result.basis_standardized->matrix());
    }
    if (loaded.generated) {
        const double err = subspace_error(result.basis, loaded.generated->b0);
        report["subspace_error"] = err;
        report["redraws"] = loaded.generated->redraws;
        if (!c.output.empty()) {
            out << "subspace error vs B0: " << err << '\n';
        }
    }
    report["wallclock_ms"] = elapsed_ms(start);
    write_report(c.report, report);
    return kExitOk;
}

int cmd_generate(const RunConfig& c, std::ostream& out) {
    const GeneratedData data = generate(model_spec(c));
    write_dataset(c.output, data.x, data.y);

    Json report;
    report["subcommand"] = "generate";
    report["config"] = config_json(c);
    report["master_seed"] = c.seed;
    report["d_true"] = data.d_true;
    report["b0"] = matrix_json(data.b0.matrix());
    report["redraws"] = data.redraws;
    write_report(c.report, report);
    out << "wrote " << data.x.rows() << " rows to " << c.output << '\n';
    return kExitOk;
}

int cmd_replicate(const RunConfig& c, std::ostream& out) {
    RunSettings settings;
    settings.fit = c.fit;
    settings.replication_threads = c.threads;
    const ExperimentResult r = run_replications(model_spec(c), c.method, settings, c.replications);

    emit(c.output, out, [&](std::ostream& s) { write_results_csv(s, r); });
    if (!c.summary.empty()) {
        emit(c.summary, out, [&](std::ostream& s) { write_summary_csv(s, {r}); });
    }

    Json report;
    report["subcommand"] = "replicate";
    report["config"] = config_json(c);
    report["master_seed"] = c.seed;
    report["replications"] = r.replications();
    report["mean"] = r.mean;
    report["sd"] = r.sd_undefined ? Json(nullptr) : Json(r.sd);
    report["failures"] = r.failures;
    report["failure_flagged"] = r.failure_flagged;
    Json failures = Json::array();
    for (std::size_t k = 0; k < r.failed.size(); ++k) {
        if (r.failed[k]) {
            failures.push_back({{"rep", k + 1}, {"seed", r.seeds[k]}, {"error", r.failure_messages[k]}});
        }
    }
    report["failed_replications"] = std::move(failures);
    write_report(c.report, report);

    if (!c.output.empty()) {
        out << to_string(r.model) << ' ' << r.method << " (p=" << r.p << ", n=" << r.n << "): mean " << r.mean
            << ", sd " << r.sd << ", failures " << r.failures << '/' << r.replications() << '\n';
    }
    return r.failure_flagged ? kExitNumerical : kExitOk;
}

int cmd_select_dim(const RunConfig& c, std::ostream& out) {
    const Loaded loaded = load_sample(c);
    const CvResult cv = select_dimension(loaded.sample, c.method.estimator, c.fit, loaded.sample.p());

    emit(c.output, out, [&](std::ostream& s) {
        s << "l,cv,bandwidth,skipped,status\n";
        const auto old_precision = s.precision(17);
        for (std::size_t k = 0; k < cv.cv_values.size(); ++k) {
            s << k + 1 << ',';
            if (std::isnan(cv.cv_values[k])) {
                s << "nan";
            } else {
                s << cv.cv_values[k];
            }
            s << ',' << cv.bandwidths[k] << ',' << cv.skipped[k] << ',' << (cv.failures[k].empty() ? "ok" : "failed")
              << '\n';
        }
        s.precision(old_precision);
    });

    Json report;
    report["subcommand"] = "select-dim";
    report["config"] = config_json(c);
    report["master_seed"] = c.seed;
    report["cross_validation"] = cv_json(cv);
    if (loaded.generated) {
        report["d_true"] = loaded.generated->d_true;
    }
    write_report(c.report, report);
    if (!c.output.empty()) {
        out << "d_hat = " << cv.d_hat << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out) {
    switch (config.subcommand) {
        case Subcommand::fit: return cmd_fit(config, out);
        case Subcommand::generate: return cmd_generate(config, out);
        case Subcommand::replicate: return cmd_replicate(config, out);
        case Subcommand::select_dim: return cmd_select_dim(config, out);
    }
    return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sufficient dimension reduction for manifold-valued responses (iOPG / iMAVE)", "imave"};
    app.require_subcommand(1);

    struct Flags {
        std::map<std::string, std::string> values;
        std::string config_file;
        std::string emit_config;
    };
    std::map<std::string, Flags> flags;
    const std::vector<std::pair<std::string, std::string>> subcommands = {
        {"fit", "Estimate a basis of the dimension reduction subspace"},
        {"generate", "Write a simulated dataset"},
        {"replicate", "Monte-Carlo replications of a simulation model"},
        {"select-dim", "Choose the structural dimension by cross-validation"}};
    for (const auto& [name, help] : subcommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        Flags& f = flags[name];
        sub->add_option("--config", f.config_file, "key = value configuration file");
        sub->add_option("--emit-config", f.emit_config, "write the effective configuration to this file");
        for (const auto& key : config_keys()) {
            if (key == "subcommand") {
                continue;
            }
            sub->add_option("--" + key, f.values[key]);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        const Flags& f = flags[name];

        ConfigEntries entries;
        if (!f.config_file.empty()) {
            std::ifstream in(f.config_file);
            if (!in) {
                throw ConfigError("cannot open config file '" + f.config_file + "'", "config");
            }
            entries = read_config_entries(in);
        }
        entries["subcommand"] = ConfigEntry{name, 0};
        for (const auto& key : config_keys()) {
            if (key != "subcommand" && chosen->count("--" + key) > 0) {
                entries[key] = ConfigEntry{f.values.at(key), 0};
            }
        }
        const RunConfig config = build_config(entries);
        if (!f.emit_config.empty()) {
            std::ofstream cfg = open_output(f.emit_config);
            write_config(cfg, config);
        }
        return run_command(config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace imave
