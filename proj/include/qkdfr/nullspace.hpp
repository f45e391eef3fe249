#pragma once

#include "qkdfr/facial_reduction.hpp"

namespace qkdfr {

/// Affine parametrization {rho_hat + N^dag(w)} of {rho : Gamma_V(rho) = gamma_V}.
///
/// With M the constraint matrix and P a column permutation chosen by pivoted QR,
/// M P = [B E] and the basis columns are P [B^{-1} E; -I].
struct NullspaceRep {
  RMatrix basis;                 // n_rho^2 x (n_rho^2 - m_V), columns hvec(N_i)
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> permutation;
  HermitianMatrix particular;    // least-norm solution rho_hat
  RMatrix constraint_matrix;     // M
  Eigen::CompleteOrthogonalDecomposition<RMatrix> min_norm;  // factorization of M

  Index dim() const { return basis.cols(); }
  Index n_rho() const { return particular.dim(); }

  /// N^dag(w) = sum_i w_i N_i.
  HermitianMatrix apply(const RVector& w) const;
  HermitianMatrix element(Index i) const;
  /// w with rho_hat + N^dag(w) = rho whenever rho is feasible; a projection otherwise.
  RVector coordinates(const HermitianMatrix& rho) const;
  /// Least-norm correction c with M hvec(c) = M hvec(rho) - gamma.
  HermitianMatrix feasibility_correction(const HermitianMatrix& rho, const RVector& gamma) const;
};

NullspaceRep build_nullspace(const ReducedModel& model);

}  // namespace qkdfr
