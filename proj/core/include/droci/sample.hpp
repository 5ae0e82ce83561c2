#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "droci/errors.hpp"

namespace droci {

// n observations of dimension d, row-major.
class Sample {
 public:
  Sample(std::vector<double> data, std::size_t n, std::size_t d)
      : data_(std::move(data)), n_(n), d_(d) {
    if (n_ < 2) throw EmptyData("sample needs at least 2 observations");
    if (data_.size() != n_ * d_) throw EmptyData("sample size mismatch");
    for (double v : data_) {
      if (!std::isfinite(v)) throw DomainError("sample entries must be finite");
    }
  }

  static Sample from_scalars(const std::vector<double>& xs) {
    return Sample(xs, xs.size(), 1);
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * d_ + j]; }
  const double* row(std::size_t i) const { return data_.data() + i * d_; }
  const std::vector<double>& data() const { return data_; }

  // Mean-square data magnitude, used as the scale in degeneracy checks.
  double scale2() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return data_.empty() ? 0.0 : s / static_cast<double>(data_.size());
  }

 private:
  std::vector<double> data_;
  std::size_t n_;
  std::size_t d_;
};

}  // namespace droci
