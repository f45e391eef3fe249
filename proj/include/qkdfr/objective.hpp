#pragma once

#include <string>
#include <vector>

#include "qkdfr/facial_reduction.hpp"

namespace qkdfr {

/// f(rho) = Tr G(rho) log G(rho) - Tr Z(rho) log Z(rho) for the reduced maps.
struct ObjectiveEvaluation {
  double value = 0.0;
  HermitianMatrix gradient;        // filled by grad_f / eval_with_gradient only
  SpectralDecomposition g_spec;    // spectrum of g_hat(rho)
  SpectralDecomposition z_spec;    // spectrum of z_hat(rho)
  RMatrix g_divdiff;               // cached divided differences (Hessian)
  RMatrix z_divdiff;
  bool ill_conditioned = false;    // an image eigenvalue fell below 1e-14 * lambda_max
};

struct HessianRep {
  RMatrix matrix;  // n_rho^2 x n_rho^2, hvec coordinates
};

ObjectiveEvaluation eval_f(const ReducedModel& model, const HermitianMatrix& rho);
ObjectiveEvaluation eval_with_gradient(const ReducedModel& model, const HermitianMatrix& rho);
HermitianMatrix grad_f(const ReducedModel& model, const HermitianMatrix& rho);

HermitianMatrix hess_apply_f(const ReducedModel& model, const ObjectiveEvaluation& at,
                             const HermitianMatrix& delta);
HermitianMatrix hess_apply_f(const ReducedModel& model, const HermitianMatrix& rho,
                             const HermitianMatrix& delta);

/// Dense Hessian; column assembly runs in parallel when `parallel` is set.
HessianRep hess_matrix_f(const ReducedModel& model, const ObjectiveEvaluation& at, bool parallel = true);
HessianRep hess_matrix_f(const ReducedModel& model, const HermitianMatrix& rho, bool parallel = true);

struct UnreducedEvaluation {
  double value = 0.0;
  HermitianMatrix gradient;  // n x n
};

/// Objective and gradient on the full n x n space, using image reduction of the
/// original maps so every logarithm has a PD argument. rho must be PD.
UnreducedEvaluation eval_unreduced(const ProblemInstance& inst, const HermitianMatrix& rho);
UnreducedEvaluation eval_unreduced(const ReducedModel& image_model, const HermitianMatrix& rho);

}  // namespace qkdfr
