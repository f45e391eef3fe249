#include <doctest.h>

#include "qkdfr/cp_maps.hpp"
#include "qkdfr/facial_reduction.hpp"
#include "qkdfr/protocols.hpp"
#include "support.hpp"

using namespace qkdfr;
using namespace qkdfr::testing;

namespace {

KrausMap random_kraus(Index n, Index k, int count) {
  std::vector<CMatrix> f;
  for (int j = 0; j < count; ++j) f.push_back(random_complex(k, n) / std::sqrt(double(count * n)));
  return KrausMap(f);
}

/// Projectors onto consecutive column blocks of a random unitary.
PinchingMap random_pinching(Index n, const std::vector<Index>& blocks) {
  CMatrix u = random_unitary(n);
  std::vector<CMatrix> p;
  Index at = 0;
  for (Index b : blocks) {
    p.push_back(u.middleCols(at, b) * u.middleCols(at, b).adjoint());
    at += b;
  }
  return PinchingMap(p);
}

double lambda_min(const HermitianMatrix& h) { return min_eigenvalue(h); }

}  // namespace

TEST_CASE("Kraus apply") {
  KrausMap id({CMatrix::Identity(3, 3)});
  HermitianMatrix x = random_hermitian(3);
  CHECK((id.apply(x).matrix() - x.matrix()).norm() == 0.0);
  CHECK((id.adjoint_apply(x).matrix() - x.matrix()).norm() == 0.0);

  CMatrix k1(1, 2), k2(1, 2);
  k1 << 1.0, 0.0;
  k2 << 0.0, 1.0;
  KrausMap tr({k1, k2});
  HermitianMatrix y = tr.apply(HermitianMatrix::identity(2));
  CHECK(y.dim() == 1);
  CHECK(y.matrix()(0, 0).real() == doctest::Approx(2.0));

  KrausMap g = random_kraus(4, 6, 3);
  for (int t = 0; t < 50; ++t) {
    HermitianMatrix p = random_psd(4, 1 + t % 4);
    CHECK(lambda_min(g.apply(p)) >= -1e-12 * std::max(1.0, p.norm()));
  }
  CHECK_THROWS_AS(g.apply(HermitianMatrix::identity(3)), DimensionError);
}

TEST_CASE("Kraus adjoint") {
  KrausMap g = random_kraus(4, 6, 3);
  for (int t = 0; t < 50; ++t) {
    HermitianMatrix x = random_hermitian(4), y = random_hermitian(6);
    const double lhs = real_inner(g.apply(x), y);
    const double rhs = real_inner(x, g.adjoint_apply(y));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  CMatrix sum = CMatrix::Zero(4, 4);
  for (const auto& k : g.factors()) sum += k.adjoint() * k;
  CHECK((g.adjoint_apply(HermitianMatrix::identity(6)).matrix() - sum).norm() <= 1e-14);
  CHECK((g.gram().matrix() - sum).norm() <= 1e-14);
}

TEST_CASE("pinching") {
  std::vector<CMatrix> p(2, CMatrix::Zero(2, 2));
  p[0](0, 0) = 1.0;
  p[1](1, 1) = 1.0;
  PinchingMap z(p);
  CMatrix m(2, 2);
  m << 1, 5, 5, 2;
  HermitianMatrix out = z.apply(HermitianMatrix::from(m));
  CHECK(out.matrix()(0, 0).real() == 1.0);
  CHECK(out.matrix()(1, 1).real() == 2.0);
  CHECK(std::abs(out.matrix()(0, 1)) == 0.0);

  CHECK_THROWS_AS(PinchingMap({p[0]}), InstanceError);
  CMatrix half = CMatrix::Constant(2, 2, 0.5);
  CHECK_THROWS_AS(PinchingMap({p[0], half}), InstanceError);
}

TEST_CASE("pinching identities on random maps") {
  for (int t = 0; t < 100; ++t) {
    PinchingMap z = random_pinching(5, {2, 1, 2});
    HermitianMatrix x = random_hermitian(5), y = random_hermitian(5);
    HermitianMatrix zx = z.apply(x);
    CHECK((z.apply(zx).matrix() - zx.matrix()).norm() <= 1e-12 * std::max(1.0, x.norm()));
    CHECK(std::abs(zx.trace() - x.trace()) <= 1e-12 * std::max(1.0, x.norm()));
    const double lhs = real_inner(zx, y), rhs = real_inner(x, z.apply(y));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    const auto& ps = z.projectors();
    for (size_t i = 0; i < ps.size(); ++i)
      for (size_t j = 0; j < ps.size(); ++j)
        if (i != j) CHECK((ps[i] * ps[j]).norm() <= 1e-12);
    HermitianMatrix psd = random_psd(5, 1 + t % 5);
    CHECK(lambda_min(z.apply(psd)) >= -1e-12 * std::max(1.0, psd.norm()));
  }
}

TEST_CASE("range of X lies inside range of its pinching") {
  for (int t = 0; t < 100; ++t) {
    PinchingMap z = random_pinching(6, {3, 1, 2});
    HermitianMatrix x = random_psd(6, 1 + t % 3);
    CMatrix px = span_projector(compact_decomp(x, 1e-10).basis);
    CMatrix pz = span_projector(compact_decomp(z.apply(x), 1e-10).basis);
    CHECK((px - pz * px).norm() <= 1e-9);
  }
}

TEST_CASE("pinching trace-log identity") {
  for (int t = 0; t < 100; ++t) {
    PinchingMap z = random_pinching(5, {2, 3});
    HermitianMatrix d = random_pd(5);
    HermitianMatrix zd = z.apply(d);
    HermitianMatrix lz = mat_log(zd);
    const double lhs = real_inner(d, lz), rhs = real_inner(zd, lz);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("composed map") {
  KrausMap g = random_kraus(3, 4, 2);
  KrausMap id3({CMatrix::Identity(3, 3)});
  ComposedMap c(id3, g);
  HermitianMatrix x = random_hermitian(3);
  CHECK((c.apply(x).matrix() - g.apply(x).matrix()).norm() <= 1e-14);

  KrausMap h = random_kraus(4, 5, 3);
  ComposedMap hg(g, h);
  CHECK(hg.in_dim() == 3);
  CHECK(hg.out_dim() == 5);
  for (int t = 0; t < 20; ++t) {
    HermitianMatrix a = random_hermitian(3), b = random_hermitian(5);
    CHECK((hg.apply(a).matrix() - h.apply(g.apply(a)).matrix()).norm() <= 1e-13 * std::max(1.0, a.norm()));
    const double lhs = real_inner(hg.apply(a), b), rhs = real_inner(a, hg.adjoint_apply(b));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  CHECK_THROWS_AS(ComposedMap(h, g), DimensionError);
}

TEST_CASE("reduced pmBB84 pinching image stays PD") {
  auto gen = protocols::gen_pmBB84({0.5, 0.05});
  ReducedModel model = build_reduced_model(gen.instance);
  for (int t = 0; t < 20; ++t) {
    HermitianMatrix r = random_pd(model.n_rho, 0.01);
    CHECK(lambda_min(model.z_hat.apply(r)) > 0.0);
    CHECK(lambda_min(model.g_hat.apply(r)) > 0.0);
  }
}

TEST_CASE("matrix_rep") {
  KrausMap id({CMatrix::Identity(3, 3)});
  CHECK((matrix_rep(id) - RMatrix::Identity(9, 9)).norm() <= 1e-15);

  KrausMap g = random_kraus(3, 4, 2);
  RMatrix a = matrix_rep(g);
  for (int t = 0; t < 20; ++t) {
    HermitianMatrix x = random_hermitian(3);
    CHECK((a * hvec(x) - hvec(g.apply(x))).norm() <= 1e-12 * std::max(1.0, x.norm()));
  }

  std::vector<CMatrix> adj;
  for (const auto& k : g.factors()) adj.push_back(k.adjoint());
  CHECK((matrix_rep(KrausMap(adj)) - a.transpose()).norm() <= 1e-13);

  CMatrix v = vec_rep(g);
  HermitianMatrix x = random_hermitian(3);
  CVector lhs = v * x.matrix().reshaped();
  CHECK((lhs - g.apply(x).matrix().reshaped()).norm() <= 1e-12);
}

TEST_CASE("left and right multiplication adjoints") {
  CMatrix m = random_complex(4, 4);
  CMatrix herm = (m + m.adjoint()) / 2.0;
  CHECK((left_mult_adjoint(CMatrix::Identity(4, 4), m).matrix() - herm).norm() <= 1e-15);
  CHECK((right_mult_adjoint(CMatrix::Identity(4, 4), m).matrix() - herm).norm() <= 1e-15);

  for (int t = 0; t < 100; ++t) {
    CMatrix w = random_hermitian(4).matrix();
    CMatrix mm = random_complex(4, 4);
    HermitianMatrix x = random_hermitian(4);
    const double left = real_inner(CMatrix(w * x.matrix()), mm);
    CHECK(std::abs(left - real_inner(x, left_mult_adjoint(w, mm))) <= 1e-12 * std::max(1.0, std::abs(left)));
    const double right = real_inner(CMatrix(x.matrix() * w), mm);
    CHECK(std::abs(right - real_inner(x, right_mult_adjoint(w, mm))) <= 1e-12 * std::max(1.0, std::abs(right)));
  }

  RMatrix a = RMatrix::NullaryExpr(3, 3, [] { return gauss(); });
  a = (a + a.transpose()).eval();
  RMatrix s = RMatrix::NullaryExpr(3, 3, [] { return gauss(); });
  s = (s + s.transpose()).eval();
  RMatrix sym_ws = (a * s + (a * s).transpose()) / 2.0;
  CHECK((left_mult_adjoint(a.cast<cplx>(), s.cast<cplx>()).matrix() - sym_ws.cast<cplx>()).norm() <= 1e-13);

  RVector d = RVector::NullaryExpr(3, [] { return uniform(0.1, 2.0); });
  RMatrix mr = RMatrix::NullaryExpr(3, 3, [] { return gauss(); });
  RMatrix sym_md = (mr * d.asDiagonal() + (mr * d.asDiagonal()).transpose()) / 2.0;
  CHECK((right_mult_adjoint(RMatrix(d.asDiagonal()).cast<cplx>(), mr.cast<cplx>()).matrix() - sym_md.cast<cplx>()).norm() <= 1e-13);
}
