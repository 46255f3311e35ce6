#include "qnc/matrix_io.hpp"

#include <cstdio>
#include <stdexcept>

namespace qnc {

void save_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("save_matrix: cannot open " + path);
  std::fprintf(f, "%ld %ld\n", static_cast<long>(m.rows()),
               static_cast<long>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      std::fprintf(f, j ? " %.17g" : "%.17g", m(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("load_matrix: cannot open " + path);
  long rows = 0, cols = 0;
  if (std::fscanf(f, "%ld %ld", &rows, &cols) != 2 || rows < 0 || cols < 0) {
    std::fclose(f);
    throw std::runtime_error("load_matrix: bad header in " + path);
  }
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (std::fscanf(f, "%lg", &m(i, j)) != 1) {
        std::fclose(f);
        throw std::runtime_error("load_matrix: truncated data in " + path);
      }
  std::fclose(f);
  return m;
}

}  // namespace qnc
