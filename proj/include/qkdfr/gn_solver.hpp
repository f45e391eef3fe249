#pragma once

#include <string>
#include <vector>

#include "qkdfr/bounds.hpp"

namespace qkdfr {

struct SolverConfig {
  double epsilon = 1e-12;   // stop when relstopgap < epsilon
  int max_iters = 80;
  double eta = 0.5;         // mu <- eta * <rho, Z> / n_rho
  double tau = 0.99;        // fraction to the boundary
  double mu0 = 1.0;
  double rank_tol = 1e-10;
  double backtrack = 0.8;
  int verbosity = 0;
  bool parallel = true;     // OpenMP column assembly
};

struct Residuals {
  HermitianMatrix dual;     // grad f + Gamma_V^dag(y) - Z
  HermitianMatrix primal;   // N^dag(v) + rho_hat - rho
  CMatrix complementarity;  // Z rho - mu I
};

struct SolverState {
  HermitianMatrix rho;
  RVector v;
  RVector y;
  HermitianMatrix z;
  double mu = 1.0;
  int iteration = 0;
  bool unit_step_taken = false;
};

struct IterationRecord {
  int iteration = 0;
  double mu = 0.0;
  double norm_fd = 0.0;
  double norm_fp = 0.0;
  double norm_fc = 0.0;
  double alpha_p = 0.0;   // step taken from this iterate (0 on the final record)
  double alpha_d = 0.0;
  bool has_upper = false;
  double upper = 0.0;
  bool lower_valid = false;
  double lower = 0.0;
  double bestub = 0.0;
  double bestlb = 0.0;
  bool bestlb_valid = false;
  double relstopgap = 0.0;
  double primal_infeasibility = 0.0;  // ||Gamma_V(rho) - gamma_V||_inf
  bool unit_step_taken = false;
  double lambda_min_rho = 0.0;
  double lambda_min_z = 0.0;
};

enum class Termination { gap_met, max_iters, numerical_failure };
std::string to_string(Termination t);

struct SolveResult {
  double best_upper = 0.0;
  double best_lower = 0.0;
  bool has_upper = false;
  bool lower_valid = false;
  HermitianMatrix rho_opt;
  RVector y_opt;
  HermitianMatrix z_opt;
  int iterations = 0;
  Termination termination = Termination::numerical_failure;
  double relstopgap = 0.0;
  std::string diagnostic;
  std::vector<IterationRecord> history;

  /// rel_gap(best_upper, best_lower), +inf if either bound is missing.
  double gap() const;
};

Residuals residuals(const ReducedModel& model, const NullspaceRep& null, const SolverState& state,
                    const HermitianMatrix& gradient);

struct GnSystem {
  RMatrix matrix;  // 2 n_rho^2 x n_rho^2, unknowns (dv; dy)
  RVector rhs;
};

GnSystem build_gn_system(const ReducedModel& model, const NullspaceRep& null,
                         const SolverState& state, const Residuals& res, const RMatrix& hessian,
                         bool parallel = true);

struct GnSolution {
  RVector dv;
  RVector dy;
  bool rank_deficient = false;
};

/// Column-scaled dense least squares; zero columns are fixed at 0.
GnSolution precondition_and_solve(const GnSystem& sys, Index n_v);

struct Direction {
  HermitianMatrix drho;
  HermitianMatrix dz;
};

Direction back_substitute(const ReducedModel& model, const NullspaceRep& null, const Residuals& res,
                          const RMatrix& hessian, const GnSolution& sol);

/// Largest alpha with x + alpha d positive definite (+inf if unbounded).
double max_step_to_boundary(const HermitianMatrix& x, const HermitianMatrix& d);

struct StepLengths {
  double alpha_p = 0.0;
  double alpha_d = 0.0;
};

/// gradient_dot = <grad f, drho>, curvature = <drho, Hess f drho>.
StepLengths step_length(const SolverState& state, const Direction& dir, double gradient_dot,
                        double curvature, const SolverConfig& cfg);

/// Initial interior point: the particular solution pushed into the PD cone.
HermitianMatrix initial_rho(const ReducedModel& model, const NullspaceRep& null);

SolveResult solve(const ReducedModel& model, const SolverConfig& cfg = {});

}  // namespace qkdfr
