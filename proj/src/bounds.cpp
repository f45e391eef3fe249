#include "qkdfr/bounds.hpp"

#include <cmath>

namespace qkdfr {

namespace {

double spectral_norm(const HermitianMatrix& h) {
  if (h.dim() == 0) return 0.0;
  const SpectralDecomposition s = eigh(h);
  return std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(h.dim() - 1)));
}

// Moves the identity coefficient of y until Z_bar is PSD. `identity_op` is the
// constraint operator equal to I. Returns false if the slack is beyond tolerance.
bool repair_with_identity(HermitianMatrix& z_bar, RVector& y, Index identity_row,
                          BoundsCertificate& cert) {
  const double tol = psd_repair_tolerance(spectral_norm(z_bar));
  double lmin = min_eigenvalue(z_bar);
  if (lmin >= 0.0) return true;
  if (lmin < -tol) return false;
  const Index n = z_bar.dim();
  // A second pass absorbs eigensolver roundoff on the shifted matrix.
  for (int pass = 0; pass < 3 && lmin < 0.0; ++pass) {
    y(identity_row) -= lmin;
    z_bar -= lmin * HermitianMatrix::identity(n);
    cert.shift_applied -= lmin;
    lmin = min_eigenvalue(z_bar);
  }
  return lmin >= 0.0;
}

}  // namespace

double psd_repair_tolerance(double z_bar_norm2) { return 1e-8 * std::max(1.0, z_bar_norm2); }

std::optional<double> upper_bound(const ReducedModel& model, const HermitianMatrix& rho,
                                  const NullspaceRep& null) {
  const HermitianMatrix projected = rho - null.feasibility_correction(rho, model.gamma_v);
  if (min_eigenvalue(projected) < 0.0) return std::nullopt;
  // Truncated spectra stay valid on the boundary of the cone.
  const double g = entropy_term(eigh(model.g_hat.apply(projected)).eigenvalues);
  const double z = entropy_term(eigh(model.z_hat.apply(projected)).eigenvalues);
  return g - z;
}

BoundsCertificate lower_bound_fr(const ReducedModel& model, const HermitianMatrix& rho_hat,
                                 const RVector& y_hat, const ObjectiveEvaluation& at) {
  BoundsCertificate cert;
  cert.context = BoundContext::reduced;
  RVector y = y_hat;
  HermitianMatrix z_bar = at.gradient + model.adjoint_constraints(y);
  cert.z_bar_min_eig = min_eigenvalue(z_bar);
  if (!repair_with_identity(z_bar, y, model.trace_row, cert)) return cert;
  const RVector infeas = model.apply_constraints(rho_hat) - model.gamma_v;
  cert.lower = at.value + y.dot(infeas) - real_inner(rho_hat, z_bar);
  cert.lower_valid = std::isfinite(cert.lower);
  cert.y_certified = std::move(y);
  return cert;
}

BoundsCertificate lower_bound_fr(const ReducedModel& model, const HermitianMatrix& rho_hat,
                                 const RVector& y_hat) {
  return lower_bound_fr(model, rho_hat, y_hat, eval_with_gradient(model, rho_hat));
}

BoundsCertificate lower_bound_original(const ProblemInstance& inst, const ReducedModel& model,
                                       const HermitianMatrix& r_hat, const RVector& y_hat,
                                       const OriginalBoundOptions& opts) {
  BoundsCertificate cert;
  cert.context = BoundContext::original;
  const Index n = inst.n;
  const HermitianMatrix lifted = lift(model, r_hat);
  const double eps =
      opts.epsilon_perturb >= 0.0 ? opts.epsilon_perturb : 1e-9 * lifted.trace() / double(n);

  HermitianMatrix rho_phi = lifted;
  const CMatrix comp = face_complement(model);
  if (comp.cols() > 0) rho_phi += HermitianMatrix::symmetrized(eps * comp * comp.adjoint());

  RVector y = RVector::Zero(inst.m());
  for (std::size_t j = 0; j < model.kept_constraints.size(); ++j) {
    y(model.kept_constraints[j]) = y_hat(static_cast<Index>(j));
  }

  const ReducedModel image = build_image_model(inst);
  const UnreducedEvaluation ev = eval_unreduced(image, rho_phi);

  auto dual_slack = [&](const RVector& yy) {
    CMatrix acc = ev.gradient.matrix();
    for (Index i = 0; i < inst.m(); ++i) acc += yy(i) * inst.constraints[i].op.matrix();
    return HermitianMatrix::symmetrized(acc);
  };
  HermitianMatrix z_bar = dual_slack(y);
  cert.z_bar_min_eig = min_eigenvalue(z_bar);

  // Off the face the gradient is unbounded below; adding multiples of the exposing
  // vector W (x) I_B costs nothing in the bound since <W (x) I_B, feasible rho> = 0.
  if (opts.use_exposing_vector && cert.z_bar_min_eig < 0.0 && inst.reduced_density &&
      model.exposing.size() > 0 && comp.cols() > 0) {
    const Index n_b = inst.reduced_density->n_b;
    const HermitianMatrix w = HermitianMatrix::symmetrized(
        kron(model.exposing, CMatrix::Identity(n_b, n_b)));
    if (const auto y_w = span_coefficients(inst, w)) {
      double t = std::max(1.0, spectral_norm(z_bar));
      for (int tries = 0; tries < 40; ++tries, t *= 2.0) {
        const HermitianMatrix trial = z_bar + t * w;
        if (min_eigenvalue(trial) >= -psd_repair_tolerance(spectral_norm(trial))) {
          y += t * (*y_w);
          z_bar = dual_slack(y);
          cert.exposing_weight = t;
          break;
        }
      }
    }
  }

  if (!repair_with_identity(z_bar, y, 0, cert)) return cert;
  double pairing = 0.0;
  for (Index i = 0; i < inst.m(); ++i) {
    pairing += y(i) * (real_inner(inst.constraints[i].op, rho_phi) - inst.constraints[i].value);
  }
  cert.lower = ev.value + pairing - real_inner(rho_phi, z_bar);
  cert.lower_valid = std::isfinite(cert.lower);
  cert.y_certified = std::move(y);
  return cert;
}

double rel_gap(double bestub, double bestlb) {
  return (bestub - bestlb) / (1.0 + 0.5 * (std::abs(bestub) + std::abs(bestlb)));
}

}  // namespace qkdfr
