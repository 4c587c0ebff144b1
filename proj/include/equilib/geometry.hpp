#pragma once

#include <algorithm>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "equilib/common.hpp"

namespace equilib {

/// Finite carrier: N pairwise-distinct points in R^n, stored row-wise.
class PointSet {
 public:
  PointSet(MatrixXd points, double min_sep_factor = 1e-9)
      : pts_(std::move(points)) {
    if (pts_.rows() < 1) throw Error("PointSet: need at least one point");
    if (pts_.cols() < 1) throw Error("PointSet: ambient dimension must be >= 1");
    validate_separation(min_sep_factor);
    id_ = next_id();
  }

  int size() const { return static_cast<int>(pts_.rows()); }
  int dim() const { return static_cast<int>(pts_.cols()); }
  const MatrixXd& coords() const { return pts_; }
  Eigen::RowVectorXd point(int i) const { return pts_.row(i); }
  std::uint64_t id() const { return id_; }

  double diameter() const {
    double d = 0;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        d = std::max(d, (pts_.row(i) - pts_.row(j)).norm());
    return d;
  }

  /// Half the nearest-neighbor distance of each point (the cell radius
  /// used by the singular-kernel diagonal rule).
  VectorXd cell_radii() const {
    const int n = size();
    VectorXd delta(n);
    if (n == 1) {
      delta[0] = 0.5;
      return delta;
    }
    for (int i = 0; i < n; ++i) {
      double best = kInf;
      for (int j = 0; j < n; ++j)
        if (j != i) best = std::min(best, (pts_.row(i) - pts_.row(j)).norm());
      delta[i] = 0.5 * best;
    }
    return delta;
  }

  /// Returns a copy with every coordinate scaled by r.
  PointSet scaled(double r) const {
    if (r <= 0) throw Error("PointSet::scaled: factor must be positive");
    return PointSet(pts_ * r);
  }

  /// Returns a copy with extra rows appended (e.g. exterior field charges).
  PointSet with_extra(const MatrixXd& extra) const {
    if (extra.cols() != pts_.cols())
      throw Error("with_extra: dimension mismatch");
    MatrixXd m(pts_.rows() + extra.rows(), pts_.cols());
    m << pts_, extra;
    return PointSet(m);
  }

 private:
  void validate_separation(double factor) {
    const int n = size();
    if (n == 1) return;
    const double thresh = factor * diameter();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((pts_.row(i) - pts_.row(j)).norm() <= thresh)
          throw Error("PointSet: points " + std::to_string(i) + " and " +
                      std::to_string(j) + " closer than separation threshold");
  }

  static std::uint64_t next_id() {
    static std::uint64_t counter = 0;
    return ++counter;
  }

  MatrixXd pts_;
  std::uint64_t id_ = 0;
};

/// Strictly nested stages exhausting a target index set from inside.
struct ExhaustionChain {
  IndexSet target;
  std::vector<IndexSet> stages;
};

enum class ShapeKind { Sphere, Ball, Circle, RotationBody };
enum class RotationProfile { Power, Exp };  // x^{-s} and exp(-x^s)

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;
  double radius = 1.0;   // sphere/ball/circle
  int dim = 3;           // ambient dimension for sphere/ball
  RotationProfile profile = RotationProfile::Power;  // rotation body
  double s = 1.0;
  double x_min = 1.0;
  double x_max = 8.0;
};

namespace detail {

inline MatrixXd fibonacci_sphere(double r, int n_points) {
  MatrixXd m(n_points, 3);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_points; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n_points;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * i;
    m.row(i) << r * rho * std::cos(th), r * rho * std::sin(th), r * z;
  }
  return m;
}

inline MatrixXd circle_points(double r, int n_points) {
  MatrixXd m(n_points, 2);
  for (int i = 0; i < n_points; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_points;
    m.row(i) << r * std::cos(th), r * std::sin(th);
  }
  return m;
}

inline MatrixXd random_sphere(double r, int dim, int n_points,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd m(n_points, dim);
  for (int i = 0; i < n_points; ++i) {
    VectorXd v(dim);
    do {
      for (int d = 0; d < dim; ++d) v[d] = gauss(rng);
    } while (v.norm() < 1e-12);
    m.row(i) = r * v.transpose() / v.norm();
  }
  return m;
}

inline MatrixXd ball_points(double r, int dim, int n_points,
                            std::uint64_t seed) {
  // Directions from the deterministic sphere layouts, radii by the
  // volume-uniform power law.
  MatrixXd dirs;
  if (dim == 3)
    dirs = fibonacci_sphere(1.0, n_points);
  else if (dim == 2)
    dirs = circle_points(1.0, n_points);
  else
    dirs = random_sphere(1.0, dim, n_points, seed);
  for (int i = 0; i < n_points; ++i) {
    const double u = (i + 0.5) / n_points;
    dirs.row(i) *= r * std::pow(u, 1.0 / dim);
  }
  return dirs;
}

inline double rotation_radius(const ShapeSpec& sp, double x) {
  if (sp.profile == RotationProfile::Power) return std::pow(x, -sp.s);
  return std::exp(-std::pow(x, sp.s));
}

inline MatrixXd rotation_body_points(const ShapeSpec& sp, int n_points) {
  if (sp.x_max <= sp.x_min)
    throw Error("rotation body: truncation requires x_max > x_min");
  if (sp.x_min <= 0)
    throw Error("rotation body: x_min must be positive");
  // Antipodal pairs on the cross-section circles. Axial spacing follows
  // max(2 a(x), h): where the budget resolves the local thickness the
  // cells (half nearest-neighbor balls) stay inside the body, and where
  // it cannot, the pair separation 2a keeps the self-energy honest about
  // how little charge a thin cross-section can hold.
  const double r_floor = 1e-6 * sp.x_max;
  auto radius = [&](double x) {
    return std::max(rotation_radius(sp, x), r_floor);
  };
  const int n_pairs = (n_points + 1) / 2;
  const double span = sp.x_max - sp.x_min;

  const int G = 20000;  // integration grid for the spacing density
  auto pair_budget = [&](double h) {
    double total = 0, prev = 1.0 / std::max(2.0 * radius(sp.x_min), h);
    for (int g = 1; g <= G; ++g) {
      const double x = sp.x_min + span * g / G;
      const double cur = 1.0 / std::max(2.0 * radius(x), h);
      total += 0.5 * (prev + cur) * span / G;
      prev = cur;
    }
    return total;
  };
  double h = 0;
  if (n_pairs > 1 && pair_budget(0.0) > n_pairs - 1) {
    double lo = 0, hi = 2.0 * span;
    for (int it = 0; it < 100; ++it) {
      h = 0.5 * (lo + hi);
      (pair_budget(h) > n_pairs - 1 ? lo : hi) = h;
    }
  }

  // Pair positions at the quantiles of the spacing density.
  std::vector<double> xs(n_pairs, sp.x_min);
  if (n_pairs > 1) {
    std::vector<double> cum(G + 1, 0.0);
    double prev = 1.0 / std::max(2.0 * radius(sp.x_min), h);
    for (int g = 1; g <= G; ++g) {
      const double x = sp.x_min + span * g / G;
      const double cur = 1.0 / std::max(2.0 * radius(x), h);
      cum[g] = cum[g - 1] + 0.5 * (prev + cur) * span / G;
      prev = cur;
    }
    int g = 0;
    for (int j = 0; j < n_pairs; ++j) {
      const double target = cum[G] * j / (n_pairs - 1);
      while (g < G && cum[g + 1] < target) ++g;
      const double seg = cum[g + 1] - cum[g];
      const double t = seg > 0 ? (target - cum[g]) / seg : 0.0;
      xs[j] = sp.x_min + span * (g + t) / G;
    }
    xs.back() = sp.x_max;
  }

  MatrixXd m(n_points, 3);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  int row = 0;
  for (int j = 0; j < n_pairs && row < n_points; ++j) {
    const double a = radius(xs[j]);
    const double th = golden * j;
    m.row(row++) << xs[j], a * std::cos(th), a * std::sin(th);
    if (row < n_points)
      m.row(row++) << xs[j], -a * std::cos(th), -a * std::sin(th);
  }
  return m;
}

}  // namespace detail

/// Deterministic quasi-uniform sampling of the test geometries.
inline PointSet sample_shape(const ShapeSpec& sp, int n_points,
                             std::uint64_t seed = 0) {
  if (n_points < 2) throw Error("sample_shape: N must be >= 2");
  switch (sp.kind) {
    case ShapeKind::Sphere: {
      if (sp.radius <= 0) throw Error("sample_shape: radius must be positive");
      if (sp.dim < 2) throw Error("sample_shape: sphere needs dim >= 2");
      if (sp.dim == 2) return PointSet(detail::circle_points(sp.radius, n_points));
      if (sp.dim == 3) return PointSet(detail::fibonacci_sphere(sp.radius, n_points));
      return PointSet(detail::random_sphere(sp.radius, sp.dim, n_points, seed));
    }
    case ShapeKind::Ball: {
      if (sp.radius <= 0) throw Error("sample_shape: radius must be positive");
      if (sp.dim < 2) throw Error("sample_shape: ball needs dim >= 2");
      return PointSet(detail::ball_points(sp.radius, sp.dim, n_points, seed));
    }
    case ShapeKind::Circle: {
      if (sp.radius <= 0) throw Error("sample_shape: radius must be positive");
      return PointSet(detail::circle_points(sp.radius, n_points));
    }
    case ShapeKind::RotationBody:
      return PointSet(detail::rotation_body_points(sp, n_points));
  }
  throw Error("sample_shape: unknown shape kind");
}

/// Dyadic-type radial partition A_k = {i : q^k <= |x_i - origin| < q^{k+1}}.
/// Only nonempty blocks are returned; points exactly at the origin land in
/// `at_origin`.
struct AnnuliPartition {
  std::map<int, IndexSet> blocks;
  IndexSet at_origin;
};

inline AnnuliPartition annuli_partition(const PointSet& ps, double q,
                                        const VectorXd& origin) {
  if (q <= 1.0) throw Error("annuli_partition: q must be > 1");
  if (origin.size() != ps.dim())
    throw Error("annuli_partition: origin dimension mismatch");
  AnnuliPartition part;
  const double lq = std::log(q);
  for (int i = 0; i < ps.size(); ++i) {
    const double r = (ps.point(i).transpose() - origin).norm();
    if (r == 0.0) {
      part.at_origin.push_back(i);
      continue;
    }
    int k = static_cast<int>(std::floor(std::log(r) / lq));
    // Guard the floating-point edge r == q^k.
    if (std::pow(q, k + 1) <= r) ++k;
    if (std::pow(q, k) > r) --k;
    part.blocks[k].push_back(i);
  }
  return part;
}

enum class ChainRule { ByIndex, ByDistance, Random };

/// Nested index-set stages growing toward `target`; stage sizes as equal
/// as divisibility allows, final stage equal to target.
inline ExhaustionChain exhaustion_chain(const PointSet& ps,
                                        const IndexSet& target,
                                        ChainRule rule, int stages,
                                        std::uint64_t seed = 0) {
  if (stages < 1) throw Error("exhaustion_chain: stages must be >= 1");
  const int n = static_cast<int>(target.size());
  if (stages > n) throw Error("exhaustion_chain: more stages than indices");
  std::vector<int> order(target);
  switch (rule) {
    case ChainRule::ByIndex:
      break;  // target is already sorted
    case ChainRule::ByDistance: {
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return ps.point(a).norm() < ps.point(b).norm();
      });
      break;
    }
    case ChainRule::Random: {
      std::mt19937_64 rng(seed);
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
  }
  ExhaustionChain chain;
  chain.target = target;
  for (int j = 1; j <= stages; ++j) {
    const int count = static_cast<int>(
        std::llround(static_cast<double>(j) * n / stages));
    IndexSet st(order.begin(), order.begin() + count);
    std::sort(st.begin(), st.end());
    chain.stages.push_back(std::move(st));
  }
  return chain;
}

}  // namespace equilib
