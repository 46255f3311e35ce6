#pragma once

#include <Eigen/Dense>
#include <string>

namespace qnc {

// Dense text format: header "rows cols", then one row per line, entries at
// 17 significant digits (lossless double round-trip).
void save_matrix(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd load_matrix(const std::string& path);

}  // namespace qnc
