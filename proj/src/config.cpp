#include "imave/config.hpp"

#include "imave/errors.hpp"
#include "imave/evaluation.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

namespace imave {

std::string_view to_string(Subcommand s) noexcept {
    switch (s) {
        case Subcommand::fit: return "fit";
        case Subcommand::generate: return "generate";
        case Subcommand::replicate: return "replicate";
        case Subcommand::select_dim: return "select-dim";
    }
    return "fit";
}

Subcommand parse_subcommand(std::string_view name) {
    if (name == "fit") return Subcommand::fit;
    if (name == "generate") return Subcommand::generate;
    if (name == "replicate") return Subcommand::replicate;
    if (name == "select-dim") return Subcommand::select_dim;
    throw ValidationError("unknown subcommand '" + std::string(name) + "' (fit, generate, replicate, select-dim)");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "subcommand", "model",     "dataset",         "method",        "d",
        "p",          "n",         "sigma",           "seed",          "replications",
        "kernel",     "c0",        "bandwidth",       "bandwidth_value", "max_iters",
        "ridge",      "standardize", "early_stop",    "early_stop_tol", "max_skip_fraction",
        "threads",    "output",    "report",          "summary"};
    return keys;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool known_key(const std::string& key) {
    const auto& keys = config_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::string where(const std::string& key, const ConfigEntry& e) {
    if (e.line == 0) {
        return "option --" + key;
    }
    return "key '" + key + "' on line " + std::to_string(e.line);
}

[[noreturn]] void fail(const std::string& key, const ConfigEntry& e, const std::string& message) {
    throw ConfigError(where(key, e) + ": " + message, key, e.line);
}

long long to_integer(const std::string& key, const ConfigEntry& e) {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        fail(key, e, "expected an integer, got '" + e.value + "'");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const ConfigEntry& e) {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        fail(key, e, "expected a non-negative integer, got '" + e.value + "'");
    }
    return v;
}

double to_real(const std::string& key, const ConfigEntry& e) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (e.value.empty() || end != begin + e.value.size() || errno == ERANGE || !std::isfinite(v)) {
        fail(key, e, "expected a finite number, got '" + e.value + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(key, e, "expected true or false, got '" + e.value + "'");
}

template <class Parse>
auto to_enum(const std::string& key, const ConfigEntry& e, Parse parse) {
    try {
        return parse(e.value);
    } catch (const ValidationError& err) {
        fail(key, e, err.what());
    }
}

long long positive(const std::string& key, const ConfigEntry& e) {
    const long long v = to_integer(key, e);
    if (v < 1) {
        fail(key, e, "must be at least 1");
    }
    return v;
}

}  // namespace

ConfigEntries read_config_entries(std::istream& in) {
    ConfigEntries entries;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(std::string_view(raw).substr(0, hash));
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value', got '" + text + "'", text,
                              line);
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (!known_key(key)) {
            throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line), key, line);
        }
        if (const auto it = entries.find(key); it != entries.end()) {
            throw ConfigError("key '" + key + "' on line " + std::to_string(line) + " was already set on line " +
                                  std::to_string(it->second.line),
                              key, line);
        }
        entries.emplace(key, ConfigEntry{value, line});
    }
    return entries;
}

RunConfig build_config(const ConfigEntries& entries) {
    for (const auto& [key, entry] : entries) {
        if (!known_key(key)) {
            fail(key, entry, "unknown key");
        }
    }
    auto get = [&](const std::string& key) -> const ConfigEntry* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    RunConfig c;
    const ConfigEntry* sub = get("subcommand");
    if (sub == nullptr) {
        throw ConfigError("missing required key 'subcommand'", "subcommand");
    }
    c.subcommand = to_enum("subcommand", *sub, parse_subcommand);

    const ConfigEntry* model = get("model");
    const ConfigEntry* dataset = get("dataset");
    if (model != nullptr && dataset != nullptr) {
        const bool dataset_later = dataset->line >= model->line;
        fail(dataset_later ? "dataset" : "model", dataset_later ? *dataset : *model,
             "'model' and 'dataset' are mutually exclusive");
    }
    if (model != nullptr) {
        c.model = to_enum("model", *model, parse_model);
    }
    if (dataset != nullptr) {
        if (dataset->value.empty()) {
            fail("dataset", *dataset, "empty path");
        }
        c.dataset = dataset->value;
    }
    const bool needs_model = c.subcommand == Subcommand::generate || c.subcommand == Subcommand::replicate;
    if (needs_model && !c.model) {
        if (dataset != nullptr) {
            fail("dataset", *dataset, std::string(to_string(c.subcommand)) + " needs 'model', not a dataset");
        }
        throw ConfigError(std::string(to_string(c.subcommand)) + ": missing required key 'model'", "model");
    }
    if (!c.model && !c.dataset) {
        throw ConfigError(std::string(to_string(c.subcommand)) + ": one of 'model' or 'dataset' is required",
                          "model");
    }

    if (c.model) {
        c.fit = study_fit_options(*c.model);
        c.sigma = default_sigma(*c.model);
        c.d = true_dimension(*c.model);
        if (is_sphere_model(*c.model)) {
            c.method.metric = Metric::sphere;
        }
    }
    if (c.subcommand == Subcommand::select_dim) {
        c.method.estimator = EstimatorKind::iopg;
    }
    if (const auto* e = get("method")) {
        c.method = to_enum("method", *e, parse_method);
        if (c.model && is_sphere_model(*c.model) != (c.method.metric == Metric::sphere)) {
            fail("method", *e, "metric does not match the response manifold of model " +
                                   std::string(to_string(*c.model)));
        }
    }
    if (const auto* e = get("d")) {
        if (e->value == "auto") {
            c.d.reset();
        } else {
            c.d = static_cast<Eigen::Index>(positive("d", *e));
        }
    } else if (!c.model && c.subcommand == Subcommand::fit) {
        throw ConfigError("fit on a dataset: missing required key 'd' (an integer or auto)", "d");
    }

    if (const auto* e = get("p")) c.p = static_cast<Eigen::Index>(positive("p", *e));
    if (const auto* e = get("n")) c.n = static_cast<Eigen::Index>(positive("n", *e));
    if (c.model && c.p < min_predictors(*c.model)) {
        const auto* e = get("p");
        const std::string msg = "model " + std::string(to_string(*c.model)) + " needs p >= " +
                                std::to_string(min_predictors(*c.model));
        if (e != nullptr) fail("p", *e, msg);
        throw ConfigError(msg, "p");
    }
    if (c.d && c.model && *c.d > c.p) {
        const auto* e = get("d");
        if (e != nullptr) fail("d", *e, "d cannot exceed p");
        throw ConfigError("d cannot exceed p", "d");
    }
    if (const auto* e = get("sigma")) {
        c.sigma = to_real("sigma", *e);
        if (c.sigma < 0.0) fail("sigma", *e, "must be non-negative");
    }
    if (const auto* e = get("seed")) c.seed = to_unsigned("seed", *e);
    if (const auto* e = get("replications")) c.replications = static_cast<int>(positive("replications", *e));

    if (const auto* e = get("kernel")) c.fit.kernel.kind = to_enum("kernel", *e, parse_kernel_kind);
    if (const auto* e = get("c0")) {
        c.fit.c0 = to_real("c0", *e);
        if (c.fit.c0 <= 0.0) fail("c0", *e, "must be positive");
    }
    if (const auto* e = get("bandwidth")) c.fit.bandwidth.kind = to_enum("bandwidth", *e, parse_bandwidth_kind);
    if (const auto* e = get("bandwidth_value")) {
        c.fit.bandwidth.value = to_real("bandwidth_value", *e);
        if (c.fit.bandwidth.value < 0.0) fail("bandwidth_value", *e, "must be non-negative");
    }
    if (c.fit.bandwidth.kind == BandwidthPolicy::Kind::fixed && c.fit.bandwidth.value <= 0.0) {
        const auto* e = get("bandwidth");
        const std::string msg = "bandwidth = fixed requires a positive 'bandwidth_value'";
        if (e != nullptr) fail("bandwidth", *e, msg);
        throw ConfigError(msg, "bandwidth_value");
    }
    if (const auto* e = get("max_iters")) c.fit.max_iters = static_cast<int>(positive("max_iters", *e));
    if (const auto* e = get("ridge")) {
        if (e->value == "default") {
            c.fit.ridge.reset();
        } else {
            c.fit.ridge = to_real("ridge", *e);
            if (*c.fit.ridge < 0.0) fail("ridge", *e, "must be non-negative");
        }
    }
    if (const auto* e = get("standardize")) c.fit.standardize = to_bool("standardize", *e);
    if (const auto* e = get("early_stop")) c.fit.early_stop = to_bool("early_stop", *e);
    if (const auto* e = get("early_stop_tol")) {
        c.fit.early_stop_tol = to_real("early_stop_tol", *e);
        if (c.fit.early_stop_tol <= 0.0) fail("early_stop_tol", *e, "must be positive");
    }
    if (const auto* e = get("max_skip_fraction")) {
        c.fit.max_skip_fraction = to_real("max_skip_fraction", *e);
        if (c.fit.max_skip_fraction < 0.0 || c.fit.max_skip_fraction > 1.0) {
            fail("max_skip_fraction", *e, "must lie in [0, 1]");
        }
    }
    if (const auto* e = get("threads")) c.threads = static_cast<int>(positive("threads", *e));
    c.fit.threads = c.threads;

    if (const auto* e = get("output")) c.output = e->value;
    if (const auto* e = get("report")) c.report = e->value;
    if (const auto* e = get("summary")) c.summary = e->value;
    if (c.subcommand == Subcommand::generate && c.output.empty()) {
        throw ConfigError("generate: missing required key 'output'", "output");
    }
    return c;
}

RunConfig parse_config(std::istream& in) { return build_config(read_config_entries(in)); }

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'", "config");
    }
    return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& c) {
    const auto old_precision = out.precision(17);
    out << "subcommand = " << to_string(c.subcommand) << '\n';
    if (c.model) out << "model = " << to_string(*c.model) << '\n';
    if (c.dataset) out << "dataset = " << *c.dataset << '\n';
    out << "method = " << to_string(c.method) << '\n';
    out << "d = ";
    if (c.d) {
        out << *c.d << '\n';
    } else {
        out << "auto\n";
    }
    out << "p = " << c.p << '\n';
    out << "n = " << c.n << '\n';
    out << "sigma = " << c.sigma << '\n';
    out << "seed = " << c.seed << '\n';
    out << "replications = " << c.replications << '\n';
    out << "kernel = " << to_string(c.fit.kernel.kind) << '\n';
    out << "c0 = " << c.fit.c0 << '\n';
    out << "bandwidth = " << to_string(c.fit.bandwidth.kind) << '\n';
    out << "bandwidth_value = " << c.fit.bandwidth.value << '\n';
    out << "max_iters = " << c.fit.max_iters << '\n';
    out << "ridge = ";
    if (c.fit.ridge) {
        out << *c.fit.ridge << '\n';
    } else {
        out << "default\n";
    }
    out << "standardize = " << (c.fit.standardize ? "true" : "false") << '\n';
    out << "early_stop = " << (c.fit.early_stop ? "true" : "false") << '\n';
    out << "early_stop_tol = " << c.fit.early_stop_tol << '\n';
    out << "max_skip_fraction = " << c.fit.max_skip_fraction << '\n';
    out << "threads = " << c.threads << '\n';
    if (!c.output.empty()) out << "output = " << c.output << '\n';
    if (!c.report.empty()) out << "report = " << c.report << '\n';
    if (!c.summary.empty()) out << "summary = " << c.summary << '\n';
    out.precision(old_precision);
}

}  // namespace imave
