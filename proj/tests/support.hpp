#pragma once

#include <cmath>
#include <random>

#include "qkdfr/facial_reduction.hpp"

namespace qkdfr::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double gauss() {
  static std::normal_distribution<double> d(0.0, 1.0);
  return d(rng());
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline CMatrix random_complex(Index rows, Index cols) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = cplx(gauss(), gauss());
  return m;
}

inline HermitianMatrix random_hermitian(Index n) {
  return HermitianMatrix::symmetrized(random_complex(n, n));
}

/// A A^H + shift I, scaled to unit trace.
inline HermitianMatrix random_pd(Index n, double shift = 0.1) {
  CMatrix a = random_complex(n, n);
  CMatrix m = a * a.adjoint() + shift * CMatrix::Identity(n, n);
  return HermitianMatrix::symmetrized(m / m.trace().real());
}

inline HermitianMatrix random_psd(Index n, Index rank) {
  CMatrix a = random_complex(n, rank);
  return HermitianMatrix::symmetrized(a * a.adjoint());
}

inline CMatrix random_unitary(Index n) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Orthogonal projector onto the column span of v (orthonormal columns assumed).
inline CMatrix span_projector(const CMatrix& v) { return v * v.adjoint(); }

/// Random instance with generic full-rank maps and a duplicated constraint.
inline ProblemInstance generic_instance() {
  const Index n = 3, k = 4;
  ProblemInstance inst;
  inst.label = "generic";
  inst.n = n;
  HermitianMatrix state = random_pd(n);
  inst.constraints.push_back({HermitianMatrix::identity(n), 1.0});
  for (int i = 0; i < 3; ++i) {
    HermitianMatrix op = random_hermitian(n);
    inst.constraints.push_back({op, real_inner(op, state)});
  }
  inst.constraints.push_back(inst.constraints[2]);
  std::vector<CMatrix> f = {random_complex(k, n), random_complex(k, n)};
  KrausMap raw(f);
  const double s = std::sqrt(max_eigenvalue(raw.gram()));
  for (auto& m : f) m /= s;
  inst.g_map = KrausMap(f);
  CMatrix u = random_unitary(k);
  inst.z_map = PinchingMap({u.leftCols(2) * u.leftCols(2).adjoint(), u.rightCols(2) * u.rightCols(2).adjoint()});
  validate_instance(inst);
  return inst;
}

}  // namespace qkdfr::testing
