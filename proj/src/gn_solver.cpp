#include "qkdfr/gn_solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "qkdfr/kernels.hpp"

namespace qkdfr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HermitianMatrix clamp_spectrum(const HermitianMatrix& x, double floor) {
  SpectralDecomposition s = eigh(x);
  s.eigenvalues = s.eigenvalues.cwiseMax(floor);
  return HermitianMatrix::symmetrized(s.unitary * s.eigenvalues.asDiagonal() * s.unitary.adjoint());
}

HermitianMatrix inverse_pd(const HermitianMatrix& x) {
  Eigen::LLT<CMatrix> llt(x.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("inverse_pd: not positive definite");
  return HermitianMatrix::symmetrized(llt.solve(CMatrix::Identity(x.dim(), x.dim())));
}

bool is_pd(const HermitianMatrix& x) {
  Eigen::LLT<CMatrix> llt(x.matrix());
  return llt.info() == Eigen::Success;
}

HermitianMatrix hess_times(const RMatrix& hessian, const HermitianMatrix& x) {
  return hmat(hessian * hvec(x));
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::gap_met: return "gap_met";
    case Termination::max_iters: return "max_iters";
    case Termination::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double SolveResult::gap() const {
  if (!has_upper || !lower_valid) return kInf;
  return rel_gap(best_upper, best_lower);
}

Residuals residuals(const ReducedModel& model, const NullspaceRep& null, const SolverState& state,
                    const HermitianMatrix& gradient) {
  Residuals r;
  r.dual = gradient + model.adjoint_constraints(state.y) - state.z;
  r.primal = null.apply(state.v) + null.particular - state.rho;
  const Index n = state.rho.dim();
  r.complementarity = state.z.matrix() * state.rho.matrix() - state.mu * CMatrix::Identity(n, n);
  return r;
}

GnSystem build_gn_system(const ReducedModel& model, const NullspaceRep& null,
                         const SolverState& state, const Residuals& res, const RMatrix& hessian,
                         bool parallel) {
  const Index n = model.n_rho;
  const Index d = n * n;
  const Index nv = null.dim();
  const CMatrix& rho = state.rho.matrix();
  const CMatrix& z = state.z.matrix();
  const RMatrix hn = hessian * null.basis;

  auto column = [&](Index j) -> RVector {
    if (j < nv) {
      const CMatrix ni = hmat(null.basis.col(j)).matrix();
      const CMatrix hni = hmat(hn.col(j)).matrix();
      return cvec(z * ni + hni * rho);
    }
    return cvec(model.gamma_ops[j - nv].matrix() * rho);
  };

  GnSystem sys;
  sys.matrix = kernels::assemble_columns(2 * d, d, column, parallel);
  const CMatrix hfp = hess_times(hessian, res.primal).matrix();
  sys.rhs = -cvec(res.complementarity + z * res.primal.matrix() + (res.dual.matrix() + hfp) * rho);
  return sys;
}

GnSolution precondition_and_solve(const GnSystem& sys, Index n_v) {
  const Index cols = sys.matrix.cols();
  RVector scale = sys.matrix.colwise().norm().transpose();
  std::vector<Index> active;
  for (Index j = 0; j < cols; ++j)
    if (scale(j) > 0.0) active.push_back(j);

  RMatrix scaled(sys.matrix.rows(), static_cast<Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a) {
    scaled.col(static_cast<Index>(a)) = sys.matrix.col(active[a]) / scale(active[a]);
  }
  GnSolution sol;
  RVector x_scaled;
  Eigen::ColPivHouseholderQR<RMatrix> qr(scaled);
  if (qr.rank() < scaled.cols()) {
    sol.rank_deficient = true;
    x_scaled = Eigen::CompleteOrthogonalDecomposition<RMatrix>(scaled).solve(sys.rhs);
  } else {
    x_scaled = qr.solve(sys.rhs);
  }
  RVector x = RVector::Zero(cols);
  for (std::size_t a = 0; a < active.size(); ++a) {
    x(active[a]) = x_scaled(static_cast<Index>(a)) / scale(active[a]);
  }
  sol.dv = x.head(n_v);
  sol.dy = x.tail(cols - n_v);
  return sol;
}

Direction back_substitute(const ReducedModel& model, const NullspaceRep& null, const Residuals& res,
                          const RMatrix& hessian, const GnSolution& sol) {
  Direction dir;
  dir.drho = res.primal + null.apply(sol.dv);
  dir.dz = res.dual + hess_times(hessian, dir.drho) + model.adjoint_constraints(sol.dy);
  return dir;
}

double max_step_to_boundary(const HermitianMatrix& x, const HermitianMatrix& d) {
  Eigen::LLT<CMatrix> llt(x.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("max_step_to_boundary: x is not PD");
  const auto l = llt.matrixL();
  CMatrix s = l.solve(d.matrix());
  s = l.solve(CMatrix(s.adjoint())).adjoint();
  const double lmin = min_eigenvalue(HermitianMatrix::symmetrized(s));
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

StepLengths step_length(const SolverState& state, const Direction& dir, double gradient_dot,
                        double curvature, const SolverConfig& cfg) {
  const double amax_p = max_step_to_boundary(state.rho, dir.drho);
  const double amax_d = max_step_to_boundary(state.z, dir.dz);
  const double model_step = curvature > 0.0 ? -gradient_dot / curvature : kInf;

  StepLengths st;
  if (amax_p > 1.0) {
    st.alpha_p = 1.0;
    // Longer primal steps only once the affine constraints hold exactly.
    if (state.unit_step_taken && model_step > 1.0) st.alpha_p = std::min(model_step, cfg.tau * amax_p);
  } else {
    st.alpha_p = cfg.tau * amax_p;
    if (model_step > 0.0 && model_step < st.alpha_p) st.alpha_p = model_step;
  }
  st.alpha_d = amax_d > 1.0 ? 1.0 : cfg.tau * amax_d;
  if (!(st.alpha_p > 0.0) || !(st.alpha_d > 0.0)) {
    throw NumericalError("step_length: no positive step keeps the iterate interior");
  }
  return st;
}

HermitianMatrix initial_rho(const ReducedModel& model, const NullspaceRep& null) {
  const Index n = model.n_rho;
  const double tr = null.particular.trace();
  const double trace = tr > 0.0 ? tr : 1.0;
  const HermitianMatrix clamped = clamp_spectrum(null.particular, 1e-3 * trace / double(n));
  const HermitianMatrix refit = clamped - null.feasibility_correction(clamped, model.gamma_v);
  if (is_pd(refit)) return refit;

  // Infeasible start: the least blend of rho_hat toward trace * I/n that is PD.
  if (is_pd(null.particular)) return null.particular;
  const HermitianMatrix center = (trace / double(n)) * HermitianMatrix::identity(n);
  auto blend = [&](double t) { return (1.0 - t) * null.particular + t * center; };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (is_pd(blend(mid)) ? hi : lo) = mid;
  }
  // Step a little past the boundary so the start is not numerically singular.
  return blend(std::min(1.0, hi + 1e-3 * (1.0 - hi)));
}

SolveResult solve(const ReducedModel& model, const SolverConfig& cfg) {
  SolveResult result;
  const NullspaceRep null = build_nullspace(model);
  const Index n = model.n_rho;

  SolverState st;
  st.rho = initial_rho(model, null);
  st.v = null.coordinates(st.rho);
  st.y = RVector::Zero(model.m_v());
  st.mu = cfg.mu0;
  st.z = cfg.mu0 * inverse_pd(st.rho);

  double bestub = kInf;
  double bestlb = -kInf;
  bool have_lb = false;
  result.termination = Termination::numerical_failure;

  try {
    for (int it = 0;; ++it) {
      st.iteration = it;
      const ObjectiveEvaluation ev = eval_with_gradient(model, st.rho);
      const Residuals res = residuals(model, null, st, ev.gradient);

      IterationRecord rec;
      rec.iteration = it;
      rec.mu = st.mu;
      rec.norm_fd = res.dual.norm();
      rec.norm_fp = res.primal.norm();
      rec.norm_fc = res.complementarity.norm();
      rec.primal_infeasibility = (model.apply_constraints(st.rho) - model.gamma_v).lpNorm<Eigen::Infinity>();
      rec.unit_step_taken = st.unit_step_taken;
      rec.lambda_min_rho = min_eigenvalue(st.rho);
      rec.lambda_min_z = min_eigenvalue(st.z);

      if (const auto ub = upper_bound(model, st.rho, null)) {
        rec.has_upper = true;
        rec.upper = *ub;
        if (*ub < bestub) bestub = *ub;
      }
      const BoundsCertificate cert = lower_bound_fr(model, st.rho, st.y, ev);
      if (cert.lower_valid) {
        rec.lower_valid = true;
        rec.lower = cert.lower;
        if (!have_lb || cert.lower > bestlb) bestlb = cert.lower;
        have_lb = true;
      }
      rec.bestub = bestub;
      rec.bestlb = bestlb;
      rec.bestlb_valid = have_lb;

      const RMatrix hessian = hess_matrix_f(model, ev, cfg.parallel).matrix;
      const GnSystem sys = build_gn_system(model, null, st, res, hessian, cfg.parallel);

      double relstop = kInf;
      if (std::isfinite(bestub) && have_lb) {
        const double denom = 1.0 + 0.5 * std::min(st.rho.norm() + st.z.norm(),
                                                  std::abs(bestub) + std::abs(bestlb));
        relstop = std::max(bestub - bestlb, sys.rhs.norm()) / denom;
      }
      rec.relstopgap = relstop;
      result.relstopgap = relstop;
      result.iterations = it;
      result.rho_opt = st.rho;
      result.y_opt = st.y;
      result.z_opt = st.z;

      if (cfg.verbosity > 0) {
        std::fprintf(stderr, "%3d mu=%9.2e fd=%9.2e fp=%9.2e fc=%9.2e ub=%.15g lb=%.15g rsg=%9.2e\n",
                     it, st.mu, rec.norm_fd, rec.norm_fp, rec.norm_fc, bestub, bestlb, relstop);
      }
      if (relstop < cfg.epsilon) {
        result.termination = Termination::gap_met;
        result.history.push_back(rec);
        break;
      }
      if (it >= cfg.max_iters) {
        result.termination = Termination::max_iters;
        result.history.push_back(rec);
        break;
      }

      const GnSolution sol = precondition_and_solve(sys, null.dim());
      const Direction dir = back_substitute(model, null, res, hessian, sol);
      const double gdot = real_inner(ev.gradient, dir.drho);
      const double curv = real_inner(dir.drho, hess_times(hessian, dir.drho));
      StepLengths step = step_length(st, dir, gdot, curv, cfg);

      // Once feasible, rho is rebuilt from v so the affine constraints stay exact.
      auto primal_trial = [&](double a) {
        if (st.unit_step_taken || a == 1.0) return null.particular + null.apply(st.v + a * sol.dv);
        return st.rho + a * dir.drho;
      };
      // Backtrack if the images lose definiteness in floating point.
      HermitianMatrix rho_next = primal_trial(step.alpha_p);
      for (int bt = 0;; ++bt) {
        bool ok = is_pd(rho_next);
        if (ok) {
          try {
            (void)eval_f(model, rho_next);
          } catch (const NumericalError&) {
            ok = false;
          }
        }
        if (ok) break;
        if (bt >= 60) throw NumericalError("backtracking failed to find an interior primal point");
        step.alpha_p *= cfg.backtrack;
        rho_next = primal_trial(step.alpha_p);
      }
      HermitianMatrix z_next = st.z + step.alpha_d * dir.dz;
      for (int bt = 0; !is_pd(z_next); ++bt) {
        if (bt >= 60) throw NumericalError("dual step left the PD cone");
        step.alpha_d *= cfg.backtrack;
        z_next = st.z + step.alpha_d * dir.dz;
      }

      rec.alpha_p = step.alpha_p;
      rec.alpha_d = step.alpha_d;
      if (cfg.verbosity > 1) {
        std::fprintf(stderr, "    alpha_p=%.3e alpha_d=%.3e model=%.3e infeas=%.2e\n", step.alpha_p,
                     step.alpha_d, curv > 0 ? -gdot / curv : 0.0, rec.primal_infeasibility);
      }
      result.history.push_back(rec);

      st.rho = std::move(rho_next);
      st.z = std::move(z_next);
      st.v += step.alpha_p * sol.dv;
      st.y += step.alpha_d * sol.dy;
      if (step.alpha_p == 1.0) st.unit_step_taken = true;
      // Capped by the previous mu so the barrier parameter decreases monotonically.
      st.mu = cfg.eta * std::min(real_inner(st.rho, st.z) / double(n), st.mu);
    }
  } catch (const NumericalError& e) {
    result.termination = Termination::numerical_failure;
    result.diagnostic = e.what();
  }

  result.best_upper = bestub;
  result.has_upper = std::isfinite(bestub);
  result.best_lower = bestlb;
  result.lower_valid = have_lb;
  return result;
}

}  // namespace qkdfr
