#pragma once

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cstdint>
#include <vector>

#include "equilib/common.hpp"

namespace equilib::qp {

enum class Status { Converged, MaxIter };

struct Solution {
  VectorXd x;
  double objective = 0;
  double kkt_residual = 0;
  double multiplier = 0;  // equilibrium-constant level for the simplex QP
  int iterations = 0;
  Status status = Status::Converged;
};

struct Options {
  double tol = 1e-9;
  int max_iter = 100000;
};

namespace detail {

inline MatrixXd submatrix(const MatrixXd& Q, const std::vector<int>& idx) {
  const int m = static_cast<int>(idx.size());
  MatrixXd S(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) S(a, b) = Q(idx[a], idx[b]);
  return S;
}

inline VectorXd subvector(const VectorXd& v, const std::vector<int>& idx) {
  VectorXd s(static_cast<int>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) s[a] = v[idx[a]];
  return s;
}

}  // namespace detail

/// Minimize w'Qw + 2b'w over the probability simplex restricted to
/// `support`, with variables pinned to zero wherever b_i = +inf.
/// Primal active-set method; each subproblem is the equality-constrained
/// KKT system on the free variables, solved through the Cholesky factor
/// of the free principal submatrix.
inline Solution solve_simplex_qp(const MatrixXd& Q, const VectorXd& b,
                                 const IndexSet& support,
                                 const Options& opt = {}) {
  const int n = static_cast<int>(Q.rows());
  if (b.size() != n) throw Error("simplex qp: b length mismatch");
  if (support.empty()) throw Error("simplex qp: empty support");
  std::vector<int> finite;
  for (int i : support) {
    if (i < 0 || i >= n) throw Error("simplex qp: support index out of range");
    if (b[i] == -kInf) throw Error("simplex qp: b must never be -inf");
    if (!std::isinf(b[i])) finite.push_back(i);
  }
  if (finite.empty())
    throw Error(
        "simplex qp: admissible class empty (field is +inf on the whole "
        "support), extremal value +inf");

  const int m = static_cast<int>(finite.size());
  VectorXd w = VectorXd::Zero(n);
  for (int i : finite) w[i] = 1.0 / m;

  std::vector<char> active(m, 0);  // active zero bounds, in local coords
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  const double step_eps = 1e-13 * scale;

  Solution sol;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    std::vector<int> freeg;  // global indices of free variables
    std::vector<int> freel;  // their local positions
    for (int a = 0; a < m; ++a)
      if (!active[a]) {
        freeg.push_back(finite[a]);
        freel.push_back(a);
      }
    // Target of the current equality-constrained subproblem:
    // Q_FF w* + b_F = c 1, sum w* = 1.
    MatrixXd QFF = detail::submatrix(Q, freeg);
    Eigen::LLT<MatrixXd> llt(QFF);
    if (llt.info() != Eigen::Success)
      throw Error("simplex qp: free submatrix lost positive definiteness");
    const VectorXd ones = VectorXd::Ones(static_cast<int>(freeg.size()));
    const VectorXd u = llt.solve(ones);
    const VectorXd v = llt.solve(detail::subvector(b, freeg));
    const double c = (1.0 + ones.dot(v)) / ones.dot(u);
    const VectorXd wstar = c * u - v;

    VectorXd p = VectorXd::Zero(n);
    double pmax = 0;
    for (std::size_t a = 0; a < freeg.size(); ++a) {
      p[freeg[a]] = wstar[a] - w[freeg[a]];
      pmax = std::max(pmax, std::abs(p[freeg[a]]));
    }

    if (pmax <= step_eps) {
      // Stationary on the free set; inspect bound multipliers.
      const VectorXd grad = Q * w + b;  // extended-real safe: b finite here
      int worst = -1;
      double worst_mu = -1e-11 * scale;
      for (int a = 0; a < m; ++a) {
        if (!active[a]) continue;
        const double mu = grad[finite[a]] - c;
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = a;
        }
      }
      if (worst < 0) {
        sol.status = Status::Converged;
        break;
      }
      active[worst] = 0;
      continue;
    }

    double alpha = 1.0;
    int blocker = -1;
    for (std::size_t a = 0; a < freeg.size(); ++a) {
      const int gi = freeg[a];
      if (p[gi] < 0) {
        const double step = w[gi] / (-p[gi]);
        if (step < alpha) {
          alpha = step;
          blocker = freel[a];
        }
      }
    }
    w += alpha * p;
    if (blocker >= 0) {
      w[finite[blocker]] = 0.0;
      active[blocker] = 1;
    }
  }
  if (iter >= opt.max_iter) sol.status = Status::MaxIter;

  // KKT certificate recomputed from scratch on the returned weights.
  const VectorXd grad = Q * w + b;
  double c_hat = 0;
  for (int i : finite) c_hat += w[i] * grad[i];
  double res = std::abs(w.sum() - 1.0);
  res = std::max(res, std::max(0.0, -w.minCoeff()));
  for (int i : finite) res = std::max(res, c_hat - grad[i]);
  sol.x = w;
  sol.objective = w.dot(Q * w) + 2.0 * [&] {
    double s = 0;
    for (int i : finite) s += b[i] * w[i];
    return s;
  }();
  sol.kkt_residual = res;
  sol.multiplier = c_hat;
  sol.iterations = iter;
  return sol;
}

/// Projection of `target` onto the cone of positive measures supported on
/// `support`, in the Q-energy metric: minimize (w-t)'Q(w-t) over w >= 0
/// with w = 0 off the support. Lawson-Hanson style active set.
inline Solution solve_cone_projection(const MatrixXd& Q, const VectorXd& target,
                                      const IndexSet& support,
                                      const Options& opt = {}) {
  const int n = static_cast<int>(Q.rows());
  if (target.size() != n) throw Error("cone projection: target length mismatch");
  const VectorXd qt = Q * target;
  const double scale = std::max(1.0, qt.cwiseAbs().maxCoeff());
  const double enter_tol = 0.5 * opt.tol * scale;

  VectorXd w = VectorXd::Zero(n);
  std::vector<int> passive;
  std::vector<char> in_passive(n, 0);
  Solution sol;

  auto solve_passive = [&]() -> VectorXd {
    MatrixXd QPP = detail::submatrix(Q, passive);
    Eigen::LLT<MatrixXd> llt(QPP);
    if (llt.info() != Eigen::Success)
      throw Error("cone projection: passive submatrix lost positive definiteness");
    return llt.solve(detail::subvector(qt, passive));
  };

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    const VectorXd r = Q * w - qt;  // gradient/2
    int best = -1;
    double best_r = -enter_tol;
    for (int i : support) {
      if (in_passive[i]) continue;
      if (r[i] < best_r) {
        best_r = r[i];
        best = i;
      }
    }
    if (best < 0) {
      sol.status = Status::Converged;
      break;
    }
    passive.push_back(best);
    in_passive[best] = 1;

    VectorXd z = solve_passive();
    while (z.minCoeff() <= 0) {
      double alpha = 1.0;
      for (std::size_t a = 0; a < passive.size(); ++a)
        if (z[a] <= 0) {
          const double wi = w[passive[a]];
          alpha = std::min(alpha, wi / (wi - z[a]));
        }
      for (std::size_t a = 0; a < passive.size(); ++a) {
        const int gi = passive[a];
        w[gi] += alpha * (z[a] - w[gi]);
      }
      std::vector<int> keep;
      for (int gi : passive) {
        if (w[gi] <= 1e-14) {
          w[gi] = 0.0;
          in_passive[gi] = 0;
        } else {
          keep.push_back(gi);
        }
      }
      passive = std::move(keep);
      if (passive.empty()) break;
      z = solve_passive();
    }
    for (std::size_t a = 0; a < passive.size(); ++a) w[passive[a]] = z[a];
  }
  if (iter >= opt.max_iter) sol.status = Status::MaxIter;

  const VectorXd r = Q * (w - target);
  double res = std::max(0.0, -w.minCoeff());
  for (int i : support) res = std::max(res, -r[i]);
  for (int i = 0; i < n; ++i)
    if (w[i] > 1e-12) res = std::max(res, std::abs(r[i]));
  sol.x = w;
  sol.objective = (w - target).dot(Q * (w - target));
  sol.kkt_residual = res;
  sol.iterations = iter;
  return sol;
}

/// Minimize v'Qv over {v >= 0 everywhere, (Qv)_i >= g_i for i in
/// obstacle_set}. Primal active-set method over the mixed constraint set,
/// started from a feasible point built by one cone projection.
inline Solution solve_obstacle_qp(const MatrixXd& Q, const VectorXd& g,
                                  const IndexSet& obstacle_set,
                                  const Options& opt = {}) {
  const int n = static_cast<int>(Q.rows());
  if (g.size() != n) throw Error("obstacle qp: g length mismatch");
  for (int i : obstacle_set)
    if (std::isinf(g[i])) throw Error("obstacle qp: g must be finite on the obstacle set");

  Eigen::LLT<MatrixXd> qllt(Q);
  if (qllt.info() != Eigen::Success)
    throw Error("obstacle qp: Q is not positive definite");

  // Constraint rows: 0..n-1 are the bounds e_i'v >= 0, then the obstacle
  // rows q_i'v >= g_i.
  const int n_cons = n + static_cast<int>(obstacle_set.size());
  auto row_dot = [&](int c, const VectorXd& v) -> double {
    return c < n ? v[c] : Q.row(obstacle_set[c - n]).dot(v);
  };
  auto rhs = [&](int c) -> double { return c < n ? 0.0 : g[obstacle_set[c - n]]; };

  // Feasible start: the cone projection of Q^{-1} max(g, 0) dominates the
  // obstacle everywhere and is nonnegative.
  VectorXd gplus = VectorXd::Zero(n);
  bool any_pos = false;
  for (int i : obstacle_set)
    if (g[i] > 0) {
      gplus[i] = g[i];
      any_pos = true;
    }
  VectorXd v = VectorXd::Zero(n);
  if (any_pos) {
    const VectorXd t0 = qllt.solve(gplus);
    v = solve_cone_projection(Q, t0, full_index_set(n), opt).x;
  }

  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  std::vector<int> W;  // working set of active constraints
  std::vector<char> inW(n_cons, 0);
  Solution sol;

  auto kkt_step = [&](VectorXd& vhat, VectorXd& mult) {
    // minimize x'Qx s.t. A_W x = b_W via the Schur complement on the
    // cached factor of Q.
    const int k = static_cast<int>(W.size());
    if (k == 0) {
      vhat = VectorXd::Zero(n);
      mult = VectorXd();
      return;
    }
    MatrixXd At(n, k);
    VectorXd bW(k);
    for (int a = 0; a < k; ++a) {
      const int c = W[a];
      if (c < n)
        At.col(a) = VectorXd::Unit(n, c);
      else
        At.col(a) = Q.row(obstacle_set[c - n]).transpose();
      bW[a] = rhs(c);
    }
    const MatrixXd Y = qllt.solve(At);
    const MatrixXd S = At.transpose() * Y;
    Eigen::FullPivLU<MatrixXd> slu(S);
    slu.setThreshold(1e-12);
    const VectorXd z = slu.solve(bW);
    vhat = Y * z;
    mult = 2.0 * z;
  };

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    VectorXd vhat, mult;
    kkt_step(vhat, mult);
    const VectorXd p = vhat - v;
    if (p.cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
      int worst = -1;
      double worst_mu = -1e-11 * scale;
      for (int a = 0; a < static_cast<int>(W.size()); ++a)
        if (mult[a] < worst_mu) {
          worst_mu = mult[a];
          worst = a;
        }
      if (worst < 0) {
        sol.status = Status::Converged;
        break;
      }
      inW[W[worst]] = 0;
      W.erase(W.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    int blocker = -1;
    for (int c = 0; c < n_cons; ++c) {
      if (inW[c]) continue;
      const double ap = row_dot(c, p);
      if (ap < -1e-14 * scale) {
        const double slack = row_dot(c, v) - rhs(c);
        const double step = std::max(0.0, slack) / (-ap);
        if (step < alpha) {
          alpha = step;
          blocker = c;
        }
      }
    }
    v += alpha * p;
    if (blocker >= 0) {
      W.push_back(blocker);
      inW[blocker] = 1;
      if (blocker < n) v[blocker] = 0.0;
    }
  }
  if (iter >= opt.max_iter) sol.status = Status::MaxIter;

  // Certificate rebuilt from the active set implied by v itself.
  const VectorXd qv = Q * v;
  double res = std::max(0.0, -v.minCoeff());
  for (int i : obstacle_set) res = std::max(res, g[i] - qv[i]);
  {
    std::vector<int> act;
    for (int c = 0; c < n_cons; ++c) {
      const double slack = row_dot(c, v) - rhs(c);
      if (slack <= 1e-8 * scale) act.push_back(c);
    }
    const int k = static_cast<int>(act.size());
    MatrixXd At(n, k);
    for (int a = 0; a < k; ++a) {
      const int c = act[a];
      if (c < n)
        At.col(a) = VectorXd::Unit(n, c);
      else
        At.col(a) = Q.row(obstacle_set[c - n]).transpose();
    }
    VectorXd y;
    if (k > 0) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(At);
      y = cod.solve(2.0 * qv);
      res = std::max(res, (2.0 * qv - At * y).cwiseAbs().maxCoeff() / scale);
      if (y.size() > 0) res = std::max(res, -y.minCoeff() / scale);
    } else if (n > 0) {
      res = std::max(res, qv.cwiseAbs().maxCoeff() / scale);
    }
  }
  sol.x = v;
  sol.objective = v.dot(qv);
  sol.kkt_residual = res;
  sol.iterations = iter;
  return sol;
}

// ---------------------------------------------------------------------------
// Exact enumeration oracle for small instances.

struct OracleConstraint {
  VectorXd a;
  double b = 0;
  bool equality = false;
};

struct OracleProblem {
  MatrixXd H;  // objective x'Hx + 2c'x, H SPD
  VectorXd c;
  std::vector<OracleConstraint> cons;
};

/// Exact optimum by enumerating active sets: every subset of the
/// inequality constraints is treated as binding, the equality-constrained
/// KKT system is solved, and the feasible candidate with sign-correct
/// multipliers and smallest objective wins. Ties keep the candidate with
/// the lexicographically smallest active set (subsets are enumerated in
/// increasing bitmask order).
inline Solution active_set_oracle(const OracleProblem& prob, int max_size = 12) {
  const int n = static_cast<int>(prob.H.rows());
  if (n > max_size) throw Error("active_set_oracle: dimension too large");
  std::vector<int> ineq, eq;
  for (int i = 0; i < static_cast<int>(prob.cons.size()); ++i)
    (prob.cons[i].equality ? eq : ineq).push_back(i);
  if (ineq.size() > 22) throw Error("active_set_oracle: too many inequality constraints");

  const double feas_tol = 1e-8;
  const double mult_tol = 1e-9;
  Solution best;
  bool found = false;

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ineq.size()); ++mask) {
    std::vector<int> act(eq);
    for (std::size_t j = 0; j < ineq.size(); ++j)
      if (mask & (std::uint64_t{1} << j)) act.push_back(ineq[j]);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;  // more binding constraints than dimensions

    MatrixXd kkt = MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = 2.0 * prob.H;
    VectorXd rhs(n + k);
    rhs.head(n) = -2.0 * prob.c;
    for (int a = 0; a < k; ++a) {
      kkt.block(0, n + a, n, 1) = -prob.cons[act[a]].a;
      kkt.block(n + a, 0, 1, n) = prob.cons[act[a]].a.transpose();
      rhs[n + a] = prob.cons[act[a]].b;
    }
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) continue;
    const VectorXd xy = lu.solve(rhs);
    const VectorXd x = xy.head(n);

    bool ok = true;
    for (const auto& con : prob.cons) {
      const double slack = con.a.dot(x) - con.b;
      if (con.equality ? std::abs(slack) > feas_tol : slack < -feas_tol) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int a = 0; a < k && ok; ++a)
      if (!prob.cons[act[a]].equality && xy[n + a] < -mult_tol) ok = false;
    if (!ok) continue;

    const double obj = x.dot(prob.H * x) + 2.0 * prob.c.dot(x);
    if (!found || obj < best.objective - 1e-12) {
      best.x = x;
      best.objective = obj;
      found = true;
    }
  }
  if (!found) throw Error("active_set_oracle: no feasible candidate");
  best.status = Status::Converged;
  best.kkt_residual = 0;
  return best;
}

/// Oracle wrapper matching solve_simplex_qp's contract.
inline Solution oracle_simplex_qp(const MatrixXd& Q, const VectorXd& b,
                                  const IndexSet& support, int max_size = 12) {
  const int n = static_cast<int>(Q.rows());
  OracleProblem p;
  p.H = Q;
  p.c = b;
  std::vector<char> in_support(n, 0);
  for (int i : support) in_support[i] = 1;
  for (int i = 0; i < n; ++i) p.c[i] = std::isinf(b[i]) ? 0.0 : b[i];
  OracleConstraint simplex;
  simplex.a = VectorXd::Ones(n);
  simplex.b = 1.0;
  simplex.equality = true;
  p.cons.push_back(simplex);
  for (int i = 0; i < n; ++i) {
    OracleConstraint c;
    c.a = VectorXd::Unit(n, i);
    c.b = 0.0;
    c.equality = !in_support[i] || std::isinf(b[i]);  // pinned to zero
    p.cons.push_back(c);
  }
  Solution s = active_set_oracle(p, max_size);
  // Pinned variables carry no field term; recompute the contract objective.
  double lin = 0;
  for (int i = 0; i < n; ++i)
    if (!std::isinf(b[i])) lin += b[i] * s.x[i];
  s.objective = s.x.dot(Q * s.x) + 2.0 * lin;
  return s;
}

inline Solution oracle_cone_projection(const MatrixXd& Q, const VectorXd& target,
                                       const IndexSet& support,
                                       int max_size = 12) {
  const int n = static_cast<int>(Q.rows());
  OracleProblem p;
  p.H = Q;
  p.c = -(Q * target);
  std::vector<char> in_support(n, 0);
  for (int i : support) in_support[i] = 1;
  for (int i = 0; i < n; ++i) {
    OracleConstraint c;
    c.a = VectorXd::Unit(n, i);
    c.b = 0.0;
    c.equality = !in_support[i];
    p.cons.push_back(c);
  }
  Solution s = active_set_oracle(p, max_size);
  s.objective = (s.x - target).dot(Q * (s.x - target));
  return s;
}

inline Solution oracle_obstacle_qp(const MatrixXd& Q, const VectorXd& g,
                                   const IndexSet& obstacle_set,
                                   int max_size = 12) {
  const int n = static_cast<int>(Q.rows());
  OracleProblem p;
  p.H = Q;
  p.c = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    OracleConstraint c;
    c.a = VectorXd::Unit(n, i);
    c.b = 0.0;
    p.cons.push_back(c);
  }
  for (int i : obstacle_set) {
    OracleConstraint c;
    c.a = Q.row(i).transpose();
    c.b = g[i];
    p.cons.push_back(c);
  }
  return active_set_oracle(p, max_size);
}

}  // namespace equilib::qp
