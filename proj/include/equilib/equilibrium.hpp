#pragma once

#include "equilib/measures.hpp"
#include "equilib/qp.hpp"

namespace equilib {

namespace detail {

// Screen for Frostman-type maximum principles on A: the linear system
// K_AA y = rhs|_A must have a nonnegative solution. When it does, the
// continuum equality statements transfer verbatim to the discrete model.
inline bool nonnegative_system_solution(const KernelMatrix& K, const IndexSet& A,
                                        const VectorXd& rhs_on_A,
                                        VectorXd* solution = nullptr) {
  MatrixXd KAA = qp::detail::submatrix(K.matrix(), A);
  Eigen::LLT<MatrixXd> llt(KAA);
  if (llt.info() != Eigen::Success) return false;
  VectorXd y = llt.solve(rhs_on_A);
  if (solution) *solution = y;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  return y.minCoeff() >= -1e-10 * scale;
}

inline bool frostman_screen(const KernelMatrix& K, const IndexSet& A) {
  return nonnegative_system_solution(
      K, A, VectorXd::Ones(static_cast<int>(A.size())));
}

}  // namespace detail

/// Robin-problem output: extremal energy w(A), capacity 1/w, the unit
/// equilibrium measure and the capacitary measure gamma_A = lambda_A / w.
struct CapacityReport {
  double w_value = 0;
  double capacity = 0;
  DiscreteMeasure equilibrium;
  DiscreteMeasure capacitary;
  double frostman_residual = 0;
  bool frostman_screen = false;
  double kkt_residual = 0;
  int iterations = 0;
};

inline CapacityReport robin_capacity(const KernelMatrix& K, const IndexSet& A,
                                     const qp::Options& opt = {}) {
  if (A.empty()) throw Error("robin_capacity: empty set");
  const int n = K.size();
  qp::Solution sol =
      qp::solve_simplex_qp(K.matrix(), VectorXd::Zero(n), A, opt);
  CapacityReport rep;
  rep.w_value = sol.objective;
  rep.capacity = 1.0 / sol.objective;
  rep.equilibrium = DiscreteMeasure(sol.x);
  rep.capacitary = DiscreteMeasure(sol.x / sol.objective);
  rep.kkt_residual = sol.kkt_residual;
  rep.iterations = sol.iterations;
  rep.frostman_screen = detail::frostman_screen(K, A);
  const VectorXd u = K.potential(rep.capacitary.weights);
  double res = 0;
  for (int i : A) res = std::max(res, 1.0 - u[i]);
  for (int i : A)
    if (rep.capacitary.weights[i] > 1e-12) res = std::max(res, u[i] - 1.0);
  rep.frostman_residual = std::max(0.0, res);
  return rep;
}

/// Direct route: the minimum-energy member of {nu >= 0 : U^nu >= 1 on A},
/// variables over the full carrier.
inline DiscreteMeasure capacitary_direct(const KernelMatrix& K, const IndexSet& A,
                                         const qp::Options& opt = {}) {
  if (A.empty()) throw Error("capacitary_direct: empty set");
  VectorXd g = VectorXd::Zero(K.size());
  for (int i : A) g[i] = 1.0;
  qp::Solution sol = qp::solve_obstacle_qp(K.matrix(), g, A, opt);
  return DiscreteMeasure(sol.x);
}

/// Per-stage capacities along a nested chain. Each stage solution is
/// compared against the previous one (feasible by inclusion) and the
/// better of the two is kept, so the reported sequence is exactly
/// monotone.
inline std::vector<double> capacity_monotone_check(const KernelMatrix& K,
                                                   const ExhaustionChain& chain,
                                                   const qp::Options& opt = {}) {
  std::vector<double> caps;
  double prev_w = kInf;
  for (const IndexSet& stage : chain.stages) {
    qp::Solution sol =
        qp::solve_simplex_qp(K.matrix(), VectorXd::Zero(K.size()), stage, opt);
    const double w = std::min(K.energy(sol.x), prev_w);
    caps.push_back(1.0 / w);
    prev_w = w;
  }
  return caps;
}

}  // namespace equilib
