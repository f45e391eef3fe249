#pragma once

#include <concepts>
#include <vector>

#include "qkdfr/hermitian.hpp"

namespace qkdfr {

/// X -> sum_j K_j X K_j^H with all K_j of shape out_dim x in_dim.
class KrausMap {
 public:
  KrausMap() = default;
  explicit KrausMap(std::vector<CMatrix> factors);

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  const std::vector<CMatrix>& factors() const { return factors_; }

  HermitianMatrix apply(const HermitianMatrix& x) const;
  HermitianMatrix adjoint_apply(const HermitianMatrix& y) const;
  CMatrix apply(const CMatrix& x) const;
  CMatrix adjoint_apply(const CMatrix& y) const;

  /// sum_j K_j^H K_j.
  HermitianMatrix gram() const;
  /// lambda_max(sum_j K_j^H K_j) <= 1 + tol.
  bool is_trace_nonincreasing(double tol = 1e-12) const;

 private:
  std::vector<CMatrix> factors_;
  Index in_dim_ = 0;
  Index out_dim_ = 0;
};

/// X -> sum_j P_j X P_j for orthogonal projectors resolving the identity.
class PinchingMap {
 public:
  PinchingMap() = default;
  explicit PinchingMap(std::vector<CMatrix> projectors, double tol = 1e-12);

  Index dim() const { return dim_; }
  const std::vector<CMatrix>& projectors() const { return projectors_; }

  HermitianMatrix apply(const HermitianMatrix& x) const;
  HermitianMatrix adjoint_apply(const HermitianMatrix& y) const { return apply(y); }
  KrausMap as_kraus() const { return KrausMap(projectors_); }

 private:
  std::vector<CMatrix> projectors_;
  Index dim_ = 0;
};

/// outer(inner(X)); the two stages are kept separate rather than multiplied out.
class ComposedMap {
 public:
  ComposedMap() = default;
  ComposedMap(KrausMap inner, KrausMap outer);

  Index in_dim() const { return inner_.in_dim(); }
  Index out_dim() const { return outer_.out_dim(); }
  const KrausMap& inner() const { return inner_; }
  const KrausMap& outer() const { return outer_; }

  HermitianMatrix apply(const HermitianMatrix& x) const { return outer_.apply(inner_.apply(x)); }
  HermitianMatrix adjoint_apply(const HermitianMatrix& y) const {
    return inner_.adjoint_apply(outer_.adjoint_apply(y));
  }
  CMatrix apply(const CMatrix& x) const { return outer_.apply(inner_.apply(x)); }
  CMatrix adjoint_apply(const CMatrix& y) const {
    return inner_.adjoint_apply(outer_.adjoint_apply(y));
  }

 private:
  KrausMap inner_;
  KrausMap outer_;
};

template <class M>
concept LinearMap = requires(const M& m, const HermitianMatrix& h, const CMatrix& c) {
  { m.in_dim() } -> std::convertible_to<Index>;
  { m.out_dim() } -> std::convertible_to<Index>;
  { m.apply(h) } -> std::same_as<HermitianMatrix>;
  { m.adjoint_apply(h) } -> std::same_as<HermitianMatrix>;
  { m.apply(c) } -> std::same_as<CMatrix>;
};

/// Complex out^2 x in^2 matrix with vec(M(X)) = A vec(X), column-major vec.
template <LinearMap M>
CMatrix vec_rep(const M& map) {
  const Index n = map.in_dim();
  const Index k = map.out_dim();
  CMatrix a(k * k, n * n);
  for (Index b = 0; b < n; ++b) {
    for (Index r = 0; r < n; ++r) {
      CMatrix e = CMatrix::Zero(n, n);
      e(r, b) = 1.0;
      a.col(r + b * n) = map.apply(e).reshaped();
    }
  }
  return a;
}

/// Real out^2 x in^2 matrix acting on hvec coordinates.
template <LinearMap M>
RMatrix matrix_rep(const M& map) {
  const Index n = map.in_dim();
  const Index k = map.out_dim();
  RMatrix a(k * k, n * n);
  for (Index i = 0; i < n * n; ++i) {
    RVector e = RVector::Zero(n * n);
    e(i) = 1.0;
    a.col(i) = hvec(map.apply(hmat(e)));
  }
  return a;
}

/// Adjoint of the Hermitian-domain map X -> W X under Re Tr(.^H .).
HermitianMatrix left_mult_adjoint(const CMatrix& w, const CMatrix& m);
/// Adjoint of the Hermitian-domain map X -> X W.
HermitianMatrix right_mult_adjoint(const CMatrix& w, const CMatrix& m);

}  // namespace qkdfr
