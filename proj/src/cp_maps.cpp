#include "qkdfr/cp_maps.hpp"

#include <string>

namespace qkdfr {

KrausMap::KrausMap(std::vector<CMatrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw DimensionError("KrausMap: no Kraus factors");
  out_dim_ = factors_.front().rows();
  in_dim_ = factors_.front().cols();
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    if (factors_[j].rows() != out_dim_ || factors_[j].cols() != in_dim_) {
      throw DimensionError("KrausMap: factor " + std::to_string(j) + " has shape " +
                           std::to_string(factors_[j].rows()) + "x" +
                           std::to_string(factors_[j].cols()));
    }
  }
}

CMatrix KrausMap::apply(const CMatrix& x) const {
  if (x.rows() != in_dim_ || x.cols() != in_dim_) throw DimensionError("KrausMap::apply");
  CMatrix out = CMatrix::Zero(out_dim_, out_dim_);
  for (const auto& k : factors_) out.noalias() += k * x * k.adjoint();
  return out;
}

CMatrix KrausMap::adjoint_apply(const CMatrix& y) const {
  if (y.rows() != out_dim_ || y.cols() != out_dim_) throw DimensionError("KrausMap::adjoint_apply");
  CMatrix out = CMatrix::Zero(in_dim_, in_dim_);
  for (const auto& k : factors_) out.noalias() += k.adjoint() * y * k;
  return out;
}

HermitianMatrix KrausMap::apply(const HermitianMatrix& x) const {
  return HermitianMatrix::symmetrized(apply(x.matrix()));
}

HermitianMatrix KrausMap::adjoint_apply(const HermitianMatrix& y) const {
  return HermitianMatrix::symmetrized(adjoint_apply(y.matrix()));
}

HermitianMatrix KrausMap::gram() const {
  CMatrix g = CMatrix::Zero(in_dim_, in_dim_);
  for (const auto& k : factors_) g.noalias() += k.adjoint() * k;
  return HermitianMatrix::symmetrized(g);
}

bool KrausMap::is_trace_nonincreasing(double tol) const { return max_eigenvalue(gram()) <= 1.0 + tol; }

PinchingMap::PinchingMap(std::vector<CMatrix> projectors, double tol)
    : projectors_(std::move(projectors)) {
  if (projectors_.empty()) throw InstanceError("PinchingMap: no projectors");
  dim_ = projectors_.front().rows();
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (std::size_t j = 0; j < projectors_.size(); ++j) {
    const CMatrix& p = projectors_[j];
    const std::string tag = "PinchingMap: projector " + std::to_string(j);
    if (p.rows() != dim_ || p.cols() != dim_) throw DimensionError(tag + " has wrong shape");
    if ((p - p.adjoint()).cwiseAbs().maxCoeff() > tol) throw InstanceError(tag + " is not Hermitian");
    if ((p * p - p).cwiseAbs().maxCoeff() > tol) throw InstanceError(tag + " is not idempotent");
    for (std::size_t i = 0; i < j; ++i) {
      if ((projectors_[i] * p).cwiseAbs().maxCoeff() > tol) {
        throw InstanceError(tag + " is not orthogonal to projector " + std::to_string(i));
      }
    }
    sum += p;
  }
  if ((sum - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > tol) {
    throw InstanceError("PinchingMap: projectors do not sum to the identity");
  }
}

HermitianMatrix PinchingMap::apply(const HermitianMatrix& x) const {
  if (x.dim() != dim_) throw DimensionError("PinchingMap::apply");
  CMatrix out = CMatrix::Zero(dim_, dim_);
  for (const auto& p : projectors_) out.noalias() += p * x.matrix() * p;
  return HermitianMatrix::symmetrized(out);
}

ComposedMap::ComposedMap(KrausMap inner, KrausMap outer)
    : inner_(std::move(inner)), outer_(std::move(outer)) {
  if (inner_.out_dim() != outer_.in_dim()) {
    throw DimensionError("ComposedMap: inner output " + std::to_string(inner_.out_dim()) +
                         " != outer input " + std::to_string(outer_.in_dim()));
  }
}

HermitianMatrix left_mult_adjoint(const CMatrix& w, const CMatrix& m) {
  if (w.rows() != m.rows() || w.cols() != m.cols()) throw DimensionError("left_mult_adjoint");
  return HermitianMatrix::symmetrized(w.adjoint() * m);
}

HermitianMatrix right_mult_adjoint(const CMatrix& w, const CMatrix& m) {
  if (w.rows() != m.rows() || w.cols() != m.cols()) throw DimensionError("right_mult_adjoint");
  return HermitianMatrix::symmetrized(m * w.adjoint());
}

}  // namespace qkdfr
