#include "qkdfr/objective.hpp"

#include "qkdfr/kernels.hpp"

namespace qkdfr {

namespace {

void require_pd(const HermitianMatrix& rho, const char* who) {
  Eigen::LLT<CMatrix> llt(rho.matrix());
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(who) + ": argument is not positive definite");
  }
}

SpectralDecomposition image_spectrum(const HermitianMatrix& img, const char* which, bool& ill) {
  SpectralDecomposition s = eigh(img);
  const Index k = s.eigenvalues.size();
  if (k == 0) return s;
  const double lmin = s.eigenvalues(k - 1);
  if (lmin <= 0.0) {
    throw NumericalError(std::string("objective: ") + which +
                         "(rho) is not positive definite; the face reduction is inconsistent");
  }
  if (lmin <= 1e-14 * s.eigenvalues(0)) ill = true;
  return s;
}

HermitianMatrix log_plus_identity(const SpectralDecomposition& s) {
  const RVector l = s.eigenvalues.array().log() + 1.0;
  return HermitianMatrix::symmetrized(s.unitary * l.asDiagonal() * s.unitary.adjoint());
}

}  // namespace

ObjectiveEvaluation eval_f(const ReducedModel& model, const HermitianMatrix& rho) {
  if (rho.dim() != model.n_rho) throw DimensionError("eval_f: dimension mismatch");
  require_pd(rho, "eval_f");
  ObjectiveEvaluation ev;
  ev.g_spec = image_spectrum(model.g_hat.apply(rho), "G", ev.ill_conditioned);
  ev.z_spec = image_spectrum(model.z_hat.apply(rho), "Z", ev.ill_conditioned);
  ev.value = entropy_term(ev.g_spec.eigenvalues) - entropy_term(ev.z_spec.eigenvalues);
  ev.g_divdiff = divided_difference_matrix(ev.g_spec.eigenvalues);
  ev.z_divdiff = divided_difference_matrix(ev.z_spec.eigenvalues);
  return ev;
}

ObjectiveEvaluation eval_with_gradient(const ReducedModel& model, const HermitianMatrix& rho) {
  ObjectiveEvaluation ev = eval_f(model, rho);
  ev.gradient = model.g_hat.adjoint_apply(log_plus_identity(ev.g_spec)) -
                model.z_hat.adjoint_apply(log_plus_identity(ev.z_spec));
  return ev;
}

HermitianMatrix grad_f(const ReducedModel& model, const HermitianMatrix& rho) {
  return eval_with_gradient(model, rho).gradient;
}

HermitianMatrix hess_apply_f(const ReducedModel& model, const ObjectiveEvaluation& at,
                             const HermitianMatrix& delta) {
  if (delta.dim() != model.n_rho) throw DimensionError("hess_apply_f: dimension mismatch");
  const HermitianMatrix g_part =
      model.g_hat.adjoint_apply(log_frechet(at.g_spec, at.g_divdiff, model.g_hat.apply(delta)));
  const HermitianMatrix z_part =
      model.z_hat.adjoint_apply(log_frechet(at.z_spec, at.z_divdiff, model.z_hat.apply(delta)));
  return g_part - z_part;
}

HermitianMatrix hess_apply_f(const ReducedModel& model, const HermitianMatrix& rho,
                             const HermitianMatrix& delta) {
  return hess_apply_f(model, eval_f(model, rho), delta);
}

HessianRep hess_matrix_f(const ReducedModel& model, const ObjectiveEvaluation& at, bool parallel) {
  const Index d = model.n_rho * model.n_rho;
  auto column = [&](Index j) {
    RVector e = RVector::Zero(d);
    e(j) = 1.0;
    return hvec(hess_apply_f(model, at, hmat(e)));
  };
  HessianRep h;
  h.matrix = kernels::assemble_columns(d, d, column, parallel);
  h.matrix = 0.5 * (h.matrix + h.matrix.transpose()).eval();
  return h;
}

HessianRep hess_matrix_f(const ReducedModel& model, const HermitianMatrix& rho, bool parallel) {
  return hess_matrix_f(model, eval_f(model, rho), parallel);
}

UnreducedEvaluation eval_unreduced(const ReducedModel& image_model, const HermitianMatrix& rho) {
  if (image_model.n_rho != rho.dim()) throw DimensionError("eval_unreduced: dimension mismatch");
  const ObjectiveEvaluation ev = eval_with_gradient(image_model, rho);
  return {ev.value, ev.gradient};
}

UnreducedEvaluation eval_unreduced(const ProblemInstance& inst, const HermitianMatrix& rho) {
  return eval_unreduced(build_image_model(inst), rho);
}

}  // namespace qkdfr
