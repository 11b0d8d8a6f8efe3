#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hmsom {

/// Row-major dense matrix; one observation per row.
using row_matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using engine_id = std::int64_t;
using timestamp = std::int64_t;

/// Accumulates non-fatal diagnostics produced by a stage.
using warning_list = std::vector<std::string>;

}  // namespace hmsom
