#include <algorithm>
#include <cmath>

#include "afdetect/classify.hpp"
#include "afdetect/error.hpp"

namespace afdetect::classify {

Standardizer fit_standardizer(const Matrix& rows) {
  if (rows.rows() < 2) throw Error(ErrorKind::TooFewRows, "standardizer needs at least 2 rows");
  const std::size_t n = rows.rows();
  const std::size_t p = rows.cols();
  Standardizer st;
  st.mean.assign(p, 0.0);
  st.std.assign(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    bool constant = true;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += rows(r, c);
      constant = constant && rows(r, c) == rows(0, c);
    }
    if (constant) {
      st.mean[c] = rows(0, c);
      st.std[c] = Standardizer::kStdFloor;
      continue;
    }
    double mean = sum / static_cast<double>(n);
    double correction = 0.0;
    for (std::size_t r = 0; r < n; ++r) correction += rows(r, c) - mean;
    mean += correction / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (rows(r, c) - mean) * (rows(r, c) - mean);
    st.mean[c] = mean;
    st.std[c] = std::max(std::sqrt(ss / static_cast<double>(n - 1)), Standardizer::kStdFloor);
  }
  return st;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / std[c];
  return out;
}

Matrix Standardizer::apply(const Matrix& rows) const {
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = (rows(r, c) - mean[c]) / std[c];
  }
  return out;
}

}  // namespace afdetect::classify
