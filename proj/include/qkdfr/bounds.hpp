#pragma once

#include <limits>
#include <optional>

#include "qkdfr/nullspace.hpp"
#include "qkdfr/objective.hpp"

namespace qkdfr {

enum class BoundContext { reduced, original };

struct BoundsCertificate {
  double upper = std::numeric_limits<double>::quiet_NaN();
  double lower = -std::numeric_limits<double>::infinity();
  bool lower_valid = false;
  double z_bar_min_eig = std::numeric_limits<double>::quiet_NaN();  // before any repair
  double shift_applied = 0.0;     // amount subtracted from the identity coefficient of y
  double exposing_weight = 0.0;   // multiple of W (x) I_B added to Z_bar (original context)
  BoundContext context = BoundContext::reduced;
  RVector y_certified;            // dual vector the bound was computed with
};

/// Tolerance for the identity-shift repair of a mildly indefinite Z_bar.
double psd_repair_tolerance(double z_bar_norm2);

/// f at the least-norm projection of rho onto Gamma_V(rho) = gamma_V, if that point is PSD.
std::optional<double> upper_bound(const ReducedModel& model, const HermitianMatrix& rho,
                                  const NullspaceRep& null);

/// Weak-duality bound for the reduced problem from (rho_hat, y_hat). `at` must hold the
/// value and gradient at rho_hat.
BoundsCertificate lower_bound_fr(const ReducedModel& model, const HermitianMatrix& rho_hat,
                                 const RVector& y_hat, const ObjectiveEvaluation& at);
BoundsCertificate lower_bound_fr(const ReducedModel& model, const HermitianMatrix& rho_hat,
                                 const RVector& y_hat);

struct OriginalBoundOptions {
  double epsilon_perturb = -1.0;  // < 0: 1e-9 * Tr(lift(R_hat)) / n
  bool use_exposing_vector = true;
};

/// Bound valid for the unreduced problem: perturbs lift(R_hat) off the face and
/// re-certifies with the zero-extended dual vector.
BoundsCertificate lower_bound_original(const ProblemInstance& inst, const ReducedModel& model,
                                       const HermitianMatrix& r_hat, const RVector& y_hat,
                                       const OriginalBoundOptions& opts = {});

double rel_gap(double bestub, double bestlb);

}  // namespace qkdfr
