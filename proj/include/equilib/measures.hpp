#pragma once

#include "equilib/kernels.hpp"

namespace equilib {

/// U^mu = K w, the potential of a discrete measure.
inline VectorXd potential(const KernelMatrix& K, const VectorXd& w) {
  return K.potential(w);
}

/// Energy inner product <mu, nu> = w' K v.
inline double inner_product(const KernelMatrix& K, const VectorXd& w,
                            const VectorXd& v) {
  return K.inner(w, v);
}

inline double energy_norm(const KernelMatrix& K, const VectorXd& w) {
  return K.norm(w);
}

/// External field: either f = psi + U^theta (psi entries in (-inf, +inf],
/// theta a signed finite-energy measure), or f = -U^zeta with zeta >= 0 of
/// total mass <= 1.
struct ExternalField {
  enum class Form { PsiPlusPotential, MinusPotential };

  Form form = Form::PsiPlusPotential;
  VectorXd psi;    // may contain +inf entries
  VectorXd theta;  // signed weights
  VectorXd zeta;   // nonnegative weights, mass <= 1

  static ExternalField zero(int n) {
    ExternalField f;
    f.form = Form::PsiPlusPotential;
    f.psi = VectorXd::Zero(n);
    f.theta = VectorXd::Zero(n);
    return f;
  }

  static ExternalField psi_plus_potential(VectorXd psi_, VectorXd theta_) {
    ExternalField f;
    f.form = Form::PsiPlusPotential;
    f.psi = std::move(psi_);
    f.theta = std::move(theta_);
    for (int i = 0; i < f.psi.size(); ++i)
      if (f.psi[i] == -kInf)
        throw Error("external field: psi must never be -inf");
    return f;
  }

  static ExternalField minus_potential(VectorXd zeta_) {
    ExternalField f;
    f.form = Form::MinusPotential;
    f.zeta = std::move(zeta_);
    if (f.zeta.size() > 0 && f.zeta.minCoeff() < 0)
      throw Error("external field: zeta must be a positive measure");
    if (f.zeta.sum() > 1.0 + 1e-12)
      throw Error("external field: zeta total mass must be <= 1");
    return f;
  }

  /// Per-point field values f_i; entries may be +inf, never -inf.
  VectorXd values(const KernelMatrix& K) const {
    if (form == Form::MinusPotential) return -K.potential(zeta);
    VectorXd f = K.potential(theta);
    if (psi.size() != f.size()) throw Error("external field: psi length mismatch");
    for (int i = 0; i < f.size(); ++i) f[i] += psi[i];
    return f;
  }
};

/// U_f^mu = U^mu + f, extended-real elementwise.
inline VectorXd weighted_potential(const KernelMatrix& K, const VectorXd& f,
                                   const VectorXd& w) {
  VectorXd u = K.potential(w);
  if (f.size() != u.size()) throw Error("weighted_potential: field length mismatch");
  return u + f;
}

/// Field integral \int f dmu, summed over the support only so that +inf
/// field values off the support do not poison the result. Positive weight
/// on an infinite-field index is an admissibility violation.
inline double field_integral(const VectorXd& f, const VectorXd& w) {
  if (f.size() != w.size()) throw Error("field_integral: length mismatch");
  double s = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (std::isinf(f[i]))
      throw Error("measure puts weight on an index with infinite field");
    s += f[i] * w[i];
  }
  return s;
}

/// Gauss functional I_f(mu) = ||mu||^2 + 2 \int f dmu.
inline double gauss_functional(const KernelMatrix& K, const VectorXd& f,
                               const VectorXd& w) {
  return K.energy(w) + 2.0 * field_integral(f, w);
}

}  // namespace equilib
