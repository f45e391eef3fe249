#include "qkdfr/nullspace.hpp"

namespace qkdfr {

HermitianMatrix NullspaceRep::apply(const RVector& w) const {
  if (w.size() != dim()) throw DimensionError("NullspaceRep::apply: length mismatch");
  return hmat(basis * w);
}

HermitianMatrix NullspaceRep::element(Index i) const { return hmat(basis.col(i)); }

RVector NullspaceRep::coordinates(const HermitianMatrix& rho) const {
  const RVector diff = permutation.transpose() * (hvec(rho) - hvec(particular));
  return -diff.tail(dim());
}

HermitianMatrix NullspaceRep::feasibility_correction(const HermitianMatrix& rho,
                                                     const RVector& gamma) const {
  const RVector resid = constraint_matrix * hvec(rho) - gamma;
  return hmat(min_norm.solve(resid));
}

NullspaceRep build_nullspace(const ReducedModel& model) {
  NullspaceRep ns;
  ns.constraint_matrix = model.constraint_matrix();
  const RMatrix& m = ns.constraint_matrix;
  const Index rows = m.rows();
  const Index d = m.cols();

  Eigen::ColPivHouseholderQR<RMatrix> qr(m);
  if (qr.rank() < rows) {
    throw NumericalError("build_nullspace: constraint matrix has rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(rows));
  }
  ns.permutation = qr.colsPermutation();
  const RMatrix r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  const RMatrix b_inv_e =
      r.leftCols(rows).triangularView<Eigen::Upper>().solve(r.rightCols(d - rows));

  RMatrix permuted(d, d - rows);
  permuted.topRows(rows) = b_inv_e;
  permuted.bottomRows(d - rows) = -RMatrix::Identity(d - rows, d - rows);
  ns.basis = ns.permutation * permuted;

  ns.min_norm.compute(m);
  ns.particular = hmat(ns.min_norm.solve(model.gamma_v));
  return ns;
}

}  // namespace qkdfr
