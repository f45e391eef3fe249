#include "qkdfr/hermitian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qkdfr {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

HermitianMatrix::HermitianMatrix(Index n) : m_(CMatrix::Zero(n, n)) {}

HermitianMatrix HermitianMatrix::identity(Index n) {
  HermitianMatrix h(n);
  h.m_.setIdentity();
  return h;
}

HermitianMatrix HermitianMatrix::from(const CMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("HermitianMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale) {
    throw InstanceError("HermitianMatrix: not Hermitian (max |M - M^H| = " +
                        std::to_string(asym) + ")");
  }
  return symmetrized(m);
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("HermitianMatrix: matrix is not square");
  }
  HermitianMatrix h;
  h.m_ = 0.5 * (m + m.adjoint());
  return h;
}

HermitianMatrix HermitianMatrix::from_real(const RMatrix& m, double rel_tol) {
  return from(m.cast<cplx>(), rel_tol);
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  require_same_dim(*this, o, "operator+");
  m_ += o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  require_same_dim(*this, o, "operator-");
  m_ -= o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

double real_inner(const CMatrix& x, const CMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("real_inner: shape mismatch");
  }
  return (x.real().array() * y.real().array()).sum() + (x.imag().array() * y.imag().array()).sum();
}

double real_inner(const HermitianMatrix& x, const HermitianMatrix& y) {
  return real_inner(x.matrix(), y.matrix());
}

Index hdim_of(Index len) {
  const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(len))));
  if (n * n != len) {
    throw DimensionError("hmat: length " + std::to_string(len) + " is not a perfect square");
  }
  return n;
}

RVector hvec(const HermitianMatrix& h) {
  const Index n = h.dim();
  const CMatrix& m = h.matrix();
  const Index off = n * (n - 1) / 2;
  RVector v(n * n);
  for (Index i = 0; i < n; ++i) v(i) = m(i, i).real();
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i, ++k) {
      v(n + k) = kSqrt2 * m(i, j).real();
      v(n + off + k) = kSqrt2 * m(i, j).imag();
    }
  }
  return v;
}

HermitianMatrix hmat(const RVector& v) {
  const Index n = hdim_of(v.size());
  const Index off = n * (n - 1) / 2;
  CMatrix m = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = v(i);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i, ++k) {
      const cplx z(v(n + k) / kSqrt2, v(n + off + k) / kSqrt2);
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return HermitianMatrix::symmetrized(m);
}

RVector cvec(const CMatrix& m) {
  const Index s = m.size();
  RVector v(2 * s);
  v.head(s) = m.real().reshaped();
  v.tail(s) = m.imag().reshaped();
  return v;
}

CMatrix cmat(const RVector& v, Index rows, Index cols) {
  const Index s = rows * cols;
  if (v.size() != 2 * s) throw DimensionError("cmat: length mismatch");
  CMatrix m(rows, cols);
  m.real() = v.head(s).reshaped(rows, cols);
  m.imag() = v.tail(s).reshaped(rows, cols);
  return m;
}

SpectralDecomposition eigh(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigh: eigensolver did not converge");
  }
  const Index n = h.dim();
  SpectralDecomposition s;
  s.eigenvalues = es.eigenvalues().reverse();
  s.unitary = es.eigenvectors().rowwise().reverse();
  if (n > 0 && !s.eigenvalues.allFinite()) {
    throw NumericalError("eigh: non-finite eigenvalues");
  }
  return s;
}

double min_eigenvalue(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: no convergence");
  return es.eigenvalues()(0);
}

double max_eigenvalue(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("max_eigenvalue: no convergence");
  return es.eigenvalues()(h.dim() - 1);
}

CompactDecomposition compact_decomp(const HermitianMatrix& h, double rank_tol) {
  const SpectralDecomposition s = eigh(h);
  const Index n = h.dim();
  const double lmax = n > 0 ? s.eigenvalues(0) : 0.0;
  const double thresh = rank_tol * std::max(1.0, lmax);
  if (n > 0 && s.eigenvalues(n - 1) < -thresh) {
    throw NumericalError("compact_decomp: matrix is not PSD (lambda_min = " +
                         std::to_string(s.eigenvalues(n - 1)) + ")");
  }
  Index r = 0;
  while (r < n && s.eigenvalues(r) > thresh) ++r;
  CompactDecomposition c;
  c.rank = r;
  c.basis = s.unitary.leftCols(r);
  c.values = s.eigenvalues.head(r);
  c.complement = s.unitary.rightCols(n - r);
  return c;
}

HermitianMatrix mat_log(const SpectralDecomposition& s) {
  if (s.eigenvalues.size() > 0 && s.eigenvalues.minCoeff() <= 0.0) {
    throw NumericalError("mat_log: argument is not positive definite");
  }
  const RVector l = s.eigenvalues.array().log();
  return HermitianMatrix::symmetrized(s.unitary * l.asDiagonal() * s.unitary.adjoint());
}

HermitianMatrix mat_log(const HermitianMatrix& h) { return mat_log(eigh(h)); }

RMatrix divided_difference_matrix(const RVector& l) {
  const Index n = l.size();
  RMatrix d(n, n);
  for (Index j = 0; j < n; ++j) {
    if (l(j) <= 0.0) throw NumericalError("divided_difference_matrix: non-positive eigenvalue");
    d(j, j) = 1.0 / l(j);
    for (Index i = 0; i < j; ++i) {
      const double a = l(i), b = l(j);
      const double diff = a - b;
      double v;
      if (std::abs(diff) <= 1e-12 * std::max(a, b)) {
        v = 2.0 / (a + b);
      } else {
        // log1p keeps the quotient accurate when a and b are close but distinct
        v = std::log1p(diff / b) / diff;
      }
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

HermitianMatrix log_frechet(const SpectralDecomposition& s, const RMatrix& divdiff,
                            const HermitianMatrix& delta) {
  const CMatrix& u = s.unitary;
  CMatrix t = u.adjoint() * delta.matrix() * u;
  t.array() *= divdiff.array().cast<cplx>();
  return HermitianMatrix::symmetrized(u * t * u.adjoint());
}

HermitianMatrix log_frechet(const SpectralDecomposition& s, const HermitianMatrix& delta) {
  return log_frechet(s, divided_difference_matrix(s.eigenvalues), delta);
}

double entropy_term(const RVector& l) {
  double acc = 0.0;
  for (Index i = 0; i < l.size(); ++i) {
    if (l(i) > 0.0) acc += l(i) * std::log(l(i));
  }
  return acc;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix::symmetrized(kron(a.matrix(), b.matrix()));
}

CMatrix partial_trace_second(const CMatrix& m, Index na, Index nb) {
  if (m.rows() != na * nb || m.cols() != na * nb) {
    throw DimensionError("partial_trace_second: shape mismatch");
  }
  CMatrix r = CMatrix::Zero(na, na);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j) r(i, j) = m.block(i * nb, j * nb, nb, nb).trace();
  return r;
}

CMatrix partial_trace_first(const CMatrix& m, Index na, Index nb) {
  if (m.rows() != na * nb || m.cols() != na * nb) {
    throw DimensionError("partial_trace_first: shape mismatch");
  }
  CMatrix r = CMatrix::Zero(nb, nb);
  for (Index i = 0; i < na; ++i) r += m.block(i * nb, i * nb, nb, nb);
  return r;
}

HermitianMatrix congruence(const CMatrix& v, const HermitianMatrix& x) {
  if (v.rows() != x.dim()) throw DimensionError("congruence: shape mismatch");
  return HermitianMatrix::symmetrized(v.adjoint() * x.matrix() * v);
}

}  // namespace qkdfr
