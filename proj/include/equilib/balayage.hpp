#pragma once

#include <optional>

#include "equilib/equilibrium.hpp"

namespace equilib {

/// Inner balayage mu^A realized as the energy-orthogonal projection of mu
/// onto the cone of positive measures supported on A.
struct BalayageReport {
  DiscreteMeasure swept;
  double equality_residual_on_A = 0;  // |U^{mu^A} - U^mu| on supp mu^A plus
                                      // one-sided deficit over A
  double domination_residual = 0;     // max(0, U^{mu^A} - U^mu) over all points
  double mass_in = 0;
  double mass_out = 0;
  std::optional<double> rest_residual;
  bool domination_screen = false;
  double kkt_residual = 0;
  int iterations = 0;
};

inline BalayageReport sweep(const KernelMatrix& K, const VectorXd& mu,
                            const IndexSet& A, const qp::Options& opt = {}) {
  if (A.empty()) throw Error("sweep: empty target set");
  K.check(mu);
  if (mu.size() > 0 && mu.minCoeff() < 0)
    throw Error("sweep: measure must be positive");
  qp::Solution sol = qp::solve_cone_projection(K.matrix(), mu, A, opt);
  BalayageReport rep;
  rep.swept = DiscreteMeasure(sol.x);
  rep.kkt_residual = sol.kkt_residual;
  rep.iterations = sol.iterations;
  rep.mass_in = mu.sum();
  rep.mass_out = sol.x.sum();
  const VectorXd us = K.potential(sol.x);
  const VectorXd umu = K.potential(mu);
  double eq = 0;
  for (int i : A) eq = std::max(eq, umu[i] - us[i]);
  for (int i : A)
    if (sol.x[i] > 1e-12) eq = std::max(eq, std::abs(us[i] - umu[i]));
  rep.equality_residual_on_A = std::max(0.0, eq);
  rep.domination_residual = std::max(0.0, (us - umu).maxCoeff());
  rep.domination_screen = detail::nonnegative_system_solution(
      K, A, qp::detail::subvector(umu, A));
  return rep;
}

/// Cross-check route: minimum energy norm over the discrete
/// Gamma_{A,mu} = {nu >= 0 : U^nu >= U^mu on A}.
inline DiscreteMeasure sweep_min_norm(const KernelMatrix& K, const VectorXd& mu,
                                      const IndexSet& A,
                                      const qp::Options& opt = {}) {
  K.check(mu);
  const VectorXd umu = K.potential(mu);
  qp::Solution sol = qp::solve_obstacle_qp(K.matrix(), umu, A, opt);
  return DiscreteMeasure(sol.x);
}

/// Battery of continuum balayage properties. Mass inequality, the rest
/// property (iterated sweep), and pointwise domination are meaningful
/// discretely only under the maximum-principle screens; they are measured
/// always, asserted by callers only when `screens_hold`.
struct BalayagePropertyRecord {
  double rest_residual = 0;     // ||mu^A - (mu^Q)^A||_K
  double mass_in = 0;
  double mass_out = 0;
  double domination_residual = 0;
  bool screen_A = false;
  bool screen_Q = false;
  bool screens_hold = false;
};

inline BalayagePropertyRecord verify_balayage_props(const KernelMatrix& K,
                                                    const VectorXd& mu,
                                                    const IndexSet& A,
                                                    const IndexSet& Q_super,
                                                    const qp::Options& opt = {}) {
  if (!is_subset(A, Q_super))
    throw Error("verify_balayage_props: A must be a subset of Q_super");
  BalayageReport onto_A = sweep(K, mu, A, opt);
  BalayageReport onto_Q = sweep(K, mu, Q_super, opt);
  BalayageReport two_step = sweep(K, onto_Q.swept.weights, A, opt);
  BalayagePropertyRecord rec;
  rec.rest_residual =
      K.distance(onto_A.swept.weights, two_step.swept.weights);
  rec.mass_in = onto_A.mass_in;
  rec.mass_out = onto_A.mass_out;
  rec.domination_residual = onto_A.domination_residual;
  rec.screen_A = onto_A.domination_screen;
  rec.screen_Q = onto_Q.domination_screen;
  rec.screens_hold = rec.screen_A && rec.screen_Q;
  return rec;
}

}  // namespace equilib
