#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qkdfr/cp_maps.hpp"

namespace qkdfr {

struct LinearConstraint {
  HermitianMatrix op;
  double value = 0.0;
};

struct ReducedDensity {
  HermitianMatrix rho_a;
  Index n_b = 0;
};

/// min D(G(rho) || Z(G(rho))) s.t. <Gamma_i, rho> = gamma_i, rho >= 0.
struct ProblemInstance {
  std::string label;
  Index n = 0;
  std::vector<LinearConstraint> constraints;  // constraints[0] is the unit-trace row
  KrausMap g_map;
  PinchingMap z_map;
  std::optional<ReducedDensity> reduced_density;

  Index m() const { return static_cast<Index>(constraints.size()); }
  Index k() const { return g_map.out_dim(); }
};

/// Throws InstanceError with a field-level message on the first violation.
void validate_instance(const ProblemInstance& inst);

struct ReducedModel {
  Index n_rho = 0;
  std::vector<HermitianMatrix> gamma_ops;
  RVector gamma_v;
  std::vector<Index> kept_constraints;     // original index of each retained row
  std::vector<Index> dropped_constraints;
  Index trace_row = 0;                      // position of the reduced unit-trace row
  KrausMap g_hat;                           // n_rho -> k_delta
  ComposedMap z_hat;                        // n_rho -> k_delta -> k_sigma
  CMatrix v_rho;                            // n x n_rho
  CMatrix v_delta;                          // k x k_delta
  CMatrix v_sigma;                          // k x k_sigma
  CMatrix exposing;                         // W (n_A x n_A); empty without reduced density

  Index m_v() const { return static_cast<Index>(gamma_ops.size()); }
  Index k_delta() const { return g_hat.out_dim(); }
  Index k_sigma() const { return z_hat.out_dim(); }

  /// Gamma_V(rho) as a vector of length m_V.
  RVector apply_constraints(const HermitianMatrix& rho) const;
  /// sum_i y_i Gamma_V,i.
  HermitianMatrix adjoint_constraints(const RVector& y) const;
  /// m_V x n_rho^2 matrix whose rows are hvec(Gamma_V,i).
  RMatrix constraint_matrix() const;
};

struct FaceReduction {
  CMatrix v_rho;     // P (x) I_B
  CMatrix exposing;  // Q Q^H with Q spanning nul(rho_A)
  Index rank = 0;
};

FaceReduction fr_reduced_density(const HermitianMatrix& rho_a, Index n_b, double rank_tol = 1e-10);

/// Orthonormal basis of range(map(I)).
template <LinearMap M>
CMatrix minimal_face_of_image(const M& map, double rank_tol = 1e-10) {
  return compact_decomp(map.apply(HermitianMatrix::identity(map.in_dim())), rank_tol).basis;
}

/// Kraus factors V_delta^H K_j of g_v; throws if range(g_v(I)) is not inside range(V_delta).
KrausMap rotate_g(const KrausMap& g_v, const CMatrix& v_delta, double tol = 1e-9);
/// Kraus factors V_sigma^H K_j of z_v, same range check.
KrausMap rotate_z(const KrausMap& z_v, const CMatrix& v_sigma, double tol = 1e-9);

struct RedundancyResult {
  std::vector<Index> kept;
  std::vector<Index> dropped;
};

/// Greedy pivoted selection of a maximal independent subset of rows.
/// Row `priority` (if in range) is always kept first. Throws InstanceError when a
/// dropped row's value disagrees with its reconstruction from kept rows.
RedundancyResult remove_redundant_constraints(const std::vector<HermitianMatrix>& ops,
                                              const RVector& values, double tol = 1e-10,
                                              Index priority = 0);

struct ReductionOptions {
  double rank_tol = 1e-10;
  double redundancy_tol = 1e-10;
};

ReducedModel build_reduced_model(const ProblemInstance& inst, const ReductionOptions& opts = {});

/// Same pipeline with V_rho = I: image reduction of the full maps only.
ReducedModel build_image_model(const ProblemInstance& inst, const ReductionOptions& opts = {});

HermitianMatrix lift(const ReducedModel& model, const HermitianMatrix& r);
HermitianMatrix restrict_to_face(const ReducedModel& model, const HermitianMatrix& rho);

/// Orthonormal basis of the complement of range(V_rho) in C^n.
CMatrix face_complement(const ReducedModel& model);

/// Coefficients y with sum_i y_i Gamma_i = target over the original constraint list,
/// or nullopt if target is not in their span (relative residual above tol).
std::optional<RVector> span_coefficients(const ProblemInstance& inst, const HermitianMatrix& target,
                                         double tol = 1e-9);

/// D(G(rho) || Z(G(rho))) on the unreduced problem, by truncated spectra. rho >= 0.
double original_objective(const ProblemInstance& inst, const HermitianMatrix& rho);

}  // namespace qkdfr
