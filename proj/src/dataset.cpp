#include "imave/dataset.hpp"

#include "imave/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace imave {

ManifoldKind Dataset::manifold() const noexcept {
    return std::holds_alternative<std::vector<SpherePoint>>(y) ? ManifoldKind::sphere : ManifoldKind::spd;
}

Eigen::Index Dataset::m() const {
    if (manifold() == ManifoldKind::sphere) {
        return 3;
    }
    const auto& mats = std::get<std::vector<SpdMatrix>>(y);
    return mats.empty() ? 0 : mats.front().dim();
}

std::vector<std::string> dataset_columns(Eigen::Index p, ManifoldKind manifold, Eigen::Index m) {
    std::vector<std::string> cols;
    for (Eigen::Index k = 1; k <= p; ++k) {
        cols.push_back("x" + std::to_string(k));
    }
    if (manifold == ManifoldKind::sphere) {
        cols.insert(cols.end(), {"y1", "y2", "y3"});
        return cols;
    }
    for (Eigen::Index r = 1; r <= m; ++r) {
        for (Eigen::Index c = 1; c <= r; ++c) {
            cols.push_back("y" + std::to_string(r) + std::to_string(c));
        }
    }
    return cols;
}

namespace {

constexpr double kUnitNormTolerance = 1e-8;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size() || errno == ERANGE || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(row) + ", column " + column + ": cannot parse '" + field +
                            "' as a finite number",
                        row);
    }
    return v;
}

struct Header {
    ManifoldKind manifold = ManifoldKind::spd;
    Eigen::Index m = 0;
};

Header parse_manifold_tag(const std::string& line) {
    std::stringstream ss(line.substr(1));
    std::string token;
    Header h;
    bool seen = false;
    while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "manifold") {
            seen = true;
            if (value == "spd") {
                h.manifold = ManifoldKind::spd;
            } else if (value == "sphere") {
                h.manifold = ManifoldKind::sphere;
            } else {
                throw DataError("unknown manifold tag '" + value + "' (expected spd or sphere)");
            }
        } else if (key == "m") {
            try {
                h.m = std::stol(value);
            } catch (const std::exception&) {
                throw DataError("manifold tag: m must be a positive integer, got '" + value + "'");
            }
        }
    }
    if (!seen) {
        throw DataError("missing '# manifold=...' line before the header");
    }
    if (h.manifold == ManifoldKind::spd && h.m < 1) {
        throw DataError("manifold=spd requires m >= 1 in the manifold line");
    }
    return h;
}

Eigen::Index predictor_count(const std::vector<std::string>& names) {
    Eigen::Index p = 0;
    while (static_cast<std::size_t>(p + 1) < names.size() && !names[static_cast<std::size_t>(p + 1)].empty() &&
           names[static_cast<std::size_t>(p + 1)][0] == 'x') {
        ++p;
    }
    return p;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
    std::string line;
    std::optional<Header> header;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t[0] != '#') {
            break;
        }
        if (t.find("manifold=") != std::string::npos) {
            header = parse_manifold_tag(t);
        }
    }
    if (!header) {
        throw DataError("missing '# manifold=...' line before the header");
    }
    const std::vector<std::string> names = split_csv(trim(line));
    if (names.empty() || names[0] != "id") {
        throw DataError("header: first column must be 'id', got '" + (names.empty() ? std::string{} : names[0]) + "'");
    }
    const Eigen::Index p = predictor_count(names);
    if (p < 1) {
        throw DataError("header: no predictor columns x1..xp found");
    }
    const std::vector<std::string> expected = dataset_columns(p, header->manifold, header->m);
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (k + 1 >= names.size()) {
            throw DataError("header: missing column '" + expected[k] + "'");
        }
        if (names[k + 1] != expected[k]) {
            throw DataError("header: column " + std::to_string(k + 2) + " is '" + names[k + 1] + "', expected '" +
                            expected[k] + "'");
        }
    }
    if (names.size() > expected.size() + 1) {
        throw DataError("header: unexpected extra column '" + names[expected.size() + 1] + "'");
    }

    std::vector<Vector> rows;
    std::vector<SpdMatrix> spd;
    std::vector<SpherePoint> sphere;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        ++row;
        const std::vector<std::string> fields = split_csv(t);
        if (fields.size() != names.size()) {
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(names.size()) +
                                " fields, found " + std::to_string(fields.size()),
                            row);
        }
        Vector xr(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            xr(k) = parse_number(fields[static_cast<std::size_t>(k + 1)], row, expected[static_cast<std::size_t>(k)]);
        }
        rows.push_back(std::move(xr));
        auto value = [&](std::size_t k) {
            return parse_number(fields[static_cast<std::size_t>(p) + 1 + k], row,
                                expected[static_cast<std::size_t>(p) + k]);
        };
        if (header->manifold == ManifoldKind::sphere) {
            const Eigen::Vector3d v(value(0), value(1), value(2));
            if (std::abs(v.norm() - 1.0) > kUnitNormTolerance) {
                std::ostringstream msg;
                msg << "row " << row << ": sphere response has norm " << v.norm() << ", not 1";
                throw DataError(msg.str(), row);
            }
            sphere.push_back(SpherePoint::normalized(v));
            continue;
        }
        const Eigen::Index m = header->m;
        Matrix y(m, m);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c <= r; ++c) {
                y(r, c) = y(c, r) = value(k++);
            }
        }
        const double smallest = Eigen::SelfAdjointEigenSolver<Matrix>(y, Eigen::EigenvaluesOnly).eigenvalues()(0);
        try {
            spd.emplace_back(y);
        } catch (const Error&) {
            std::ostringstream msg;
            msg << "row " << row << ": response is not positive definite (smallest eigenvalue " << smallest << ")";
            throw DataError(msg.str(), row);
        }
    }
    if (rows.empty()) {
        throw DataError("dataset has no data rows");
    }

    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    if (header->manifold == ManifoldKind::sphere) {
        d.y = std::move(sphere);
    } else {
        d.y = std::move(spd);
    }
    return d;
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset '" + path + "'");
    }
    return read_dataset(in);
}

void write_dataset(std::ostream& out, const Matrix& x, const ResponseSet& y) {
    if (response_count(y) != static_cast<std::size_t>(x.rows())) {
        throw ValidationError("write_dataset: X and Y have different numbers of rows");
    }
    const bool is_sphere = std::holds_alternative<std::vector<SpherePoint>>(y);
    Eigen::Index m = 3;
    if (is_sphere) {
        out << "# manifold=sphere\n";
    } else {
        const auto& mats = std::get<std::vector<SpdMatrix>>(y);
        m = mats.empty() ? 0 : mats.front().dim();
        out << "# manifold=spd m=" << m << '\n';
    }
    out << "id";
    for (const auto& c : dataset_columns(x.cols(), is_sphere ? ManifoldKind::sphere : ManifoldKind::spd, m)) {
        out << ',' << c;
    }
    out << '\n';
    const auto old_precision = out.precision(17);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out << i + 1;
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            out << ',' << x(i, k);
        }
        if (is_sphere) {
            const auto& v = std::get<std::vector<SpherePoint>>(y)[static_cast<std::size_t>(i)].coords();
            out << ',' << v(0) << ',' << v(1) << ',' << v(2);
        } else {
            const Matrix& s = std::get<std::vector<SpdMatrix>>(y)[static_cast<std::size_t>(i)].matrix();
            if (s.rows() != m) {
                throw ValidationError("write_dataset: responses have different sizes");
            }
            for (Eigen::Index r = 0; r < m; ++r) {
                for (Eigen::Index c = 0; c <= r; ++c) {
                    out << ',' << s(r, c);
                }
            }
        }
        out << '\n';
    }
    out.precision(old_precision);
}

void write_dataset(const std::string& path, const Matrix& x, const ResponseSet& y) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    write_dataset(out, x, y);
    if (!out) {
        throw DataError("failed while writing '" + path + "'");
    }
}

}  // namespace imave
