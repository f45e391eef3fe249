#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qkdfr {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An eigensolver or factorization failed, or an argument left the PD cone.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Input data violates a structural requirement (Hermiticity, completeness...).
class InstanceError : public Error {
 public:
  using Error::Error;
};

/// Dense complex matrix that is Hermitian by construction.
///
/// Every constructor either validates or symmetrizes, so `matrix()` is always
/// exactly equal to its conjugate transpose.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Index n);

  static HermitianMatrix identity(Index n);
  static HermitianMatrix zero(Index n) { return HermitianMatrix(n); }

  /// Validates max|M - M^H| <= rel_tol * max(1, max|M_ij|), then stores (M + M^H)/2.
  static HermitianMatrix from(const CMatrix& m, double rel_tol = 1e-14);
  /// Stores (M + M^H)/2 without checking.
  static HermitianMatrix symmetrized(const CMatrix& m);
  static HermitianMatrix from_real(const RMatrix& m, double rel_tol = 1e-14);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  double trace() const { return m_.diagonal().real().sum(); }
  double norm() const { return m_.norm(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }

 private:
  CMatrix m_;
};

/// Eigen-decomposition with eigenvalues sorted in descending order.
struct SpectralDecomposition {
  CMatrix unitary;
  RVector eigenvalues;
};

/// Isometry onto the numerical range of a PSD matrix, plus its discarded complement.
struct CompactDecomposition {
  CMatrix basis;       // n x r, orthonormal columns
  RVector values;      // r retained eigenvalues, descending
  CMatrix complement;  // n x (n - r)
  Index rank = 0;
};

/// Re Tr(Y^H X).
double real_inner(const CMatrix& x, const CMatrix& y);
double real_inner(const HermitianMatrix& x, const HermitianMatrix& y);

/// Isometric coordinates: diagonal, then sqrt(2) Re / sqrt(2) Im of the
/// strict upper triangle in column order.
RVector hvec(const HermitianMatrix& h);
HermitianMatrix hmat(const RVector& v);
/// Dimension n with n^2 == len; throws otherwise.
Index hdim_of(Index len);

/// Stacked real and imaginary parts of a column-major vectorization.
RVector cvec(const CMatrix& m);
CMatrix cmat(const RVector& v, Index rows, Index cols);

SpectralDecomposition eigh(const HermitianMatrix& h);
double min_eigenvalue(const HermitianMatrix& h);
double max_eigenvalue(const HermitianMatrix& h);

/// Range of a PSD matrix: keeps eigenvalues above rank_tol * max(1, lambda_max).
/// Throws NumericalError if lambda_min < -rank_tol * max(1, lambda_max).
CompactDecomposition compact_decomp(const HermitianMatrix& h, double rank_tol = 1e-10);

/// Principal logarithm of a PD matrix.
HermitianMatrix mat_log(const HermitianMatrix& h);
HermitianMatrix mat_log(const SpectralDecomposition& s);

/// h_ij = (ln l_i - ln l_j)/(l_i - l_j), or the derivative when the pair is
/// within 1e-12 relative.
RMatrix divided_difference_matrix(const RVector& eigenvalues);

/// Frechet derivative of the matrix log at U diag(l) U^H in direction delta.
HermitianMatrix log_frechet(const SpectralDecomposition& s, const HermitianMatrix& delta);
HermitianMatrix log_frechet(const SpectralDecomposition& s, const RMatrix& divdiff,
                            const HermitianMatrix& delta);

/// Sum of l ln l over the spectrum, treating entries <= 0 as 0.
double entropy_term(const RVector& eigenvalues);

CMatrix kron(const CMatrix& a, const CMatrix& b);
HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b);
/// Trace over the second factor of an (na*nb)-dimensional operator.
CMatrix partial_trace_second(const CMatrix& m, Index na, Index nb);
/// Trace over the first factor.
CMatrix partial_trace_first(const CMatrix& m, Index na, Index nb);

/// X -> V^H X V, symmetrized.
HermitianMatrix congruence(const CMatrix& v, const HermitianMatrix& x);

}  // namespace qkdfr
