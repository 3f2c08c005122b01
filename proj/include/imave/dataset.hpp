#pragma once

// Dataset CSV files.
//
//   # manifold=spd m=3
//   id,x1,...,xp,y11,y21,y22,y31,y32,y33
//
// SPD responses are stored as the row-wise lower triangle of Y itself; sphere
// responses (`# manifold=sphere`) as the columns y1,y2,y3.

#include "imave/estimators.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace imave {

enum class ManifoldKind { spd, sphere };

struct Dataset {
    Matrix x;
    ResponseSet y;

    [[nodiscard]] ManifoldKind manifold() const noexcept;
    // Matrix size of SPD responses; 3 for sphere responses (ambient dimension).
    [[nodiscard]] Eigen::Index m() const;
    [[nodiscard]] Eigen::Index n() const noexcept { return x.rows(); }
    [[nodiscard]] Eigen::Index p() const noexcept { return x.cols(); }
};

// Column names in file order, without the leading "id".
[[nodiscard]] std::vector<std::string> dataset_columns(Eigen::Index p, ManifoldKind manifold, Eigen::Index m);

// Throws DataError for malformed headers (naming the column), wrong field counts,
// unparsable numbers, non-SPD matrices (row and smallest eigenvalue) and
// sphere rows that are not unit vectors. Rows are numbered from 1 after the header.
[[nodiscard]] Dataset read_dataset(std::istream& in);
[[nodiscard]] Dataset read_dataset(const std::string& path);

void write_dataset(std::ostream& out, const Matrix& x, const ResponseSet& y);
void write_dataset(const std::string& path, const Matrix& x, const ResponseSet& y);

}  // namespace imave
