#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace equilib {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Kernel matrix failed the positive-definiteness certificate.
struct PdError : Error {
  double pivot;
  int minor_size;
  PdError(double pivot_, int minor_size_)
      : Error("kernel matrix is not positive definite: pivot " +
              std::to_string(pivot_) + " at leading minor of size " +
              std::to_string(minor_size_)),
        pivot(pivot_),
        minor_size(minor_size_) {}
};

struct ConfigError : Error {
  using Error::Error;
};

// Sorted, duplicate-free indices into a PointSet / matrix carrier.
using IndexSet = std::vector<int>;

inline IndexSet make_index_set(std::vector<int> idx, int carrier_size) {
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= carrier_size)
      throw Error("index " + std::to_string(idx[i]) + " out of range [0, " +
                  std::to_string(carrier_size) + ")");
    if (i > 0 && idx[i] == idx[i - 1])
      throw Error("duplicate index " + std::to_string(idx[i]));
  }
  return idx;
}

inline IndexSet full_index_set(int n) {
  IndexSet all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return all;
}

inline bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Signed weight vector over a carrier; positive measures have w >= 0.
struct DiscreteMeasure {
  VectorXd weights;

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(VectorXd w) : weights(std::move(w)) {}

  double total_mass() const { return weights.sum(); }

  IndexSet support(double eps = 0.0) const {
    IndexSet s;
    for (int i = 0; i < weights.size(); ++i)
      if (std::abs(weights[i]) > eps) s.push_back(i);
    return s;
  }

  bool is_positive(double eps = 0.0) const {
    return weights.size() == 0 || weights.minCoeff() >= -eps;
  }
};

}  // namespace equilib
