#include <doctest.h>

#include "qkdfr/gn_solver.hpp"
#include "qkdfr/protocols.hpp"
#include "support.hpp"

using namespace qkdfr;
using namespace qkdfr::testing;

namespace {

/// n_rho = 1, G = [1], Z_hat(x) = diag(x/2, x/2): f(x) = x ln 2, minimized over x = 1.
ReducedModel scalar_model() {
  ReducedModel m;
  m.n_rho = 1;
  m.gamma_ops = {HermitianMatrix::identity(1)};
  m.gamma_v = RVector::Ones(1);
  m.kept_constraints = {0};
  m.trace_row = 0;
  m.g_hat = KrausMap({CMatrix::Identity(1, 1)});
  CMatrix k1 = CMatrix::Zero(2, 1), k2 = CMatrix::Zero(2, 1);
  k1(0, 0) = k2(1, 0) = 1.0 / std::sqrt(2.0);
  m.z_hat = ComposedMap(m.g_hat, KrausMap({k1, k2}));
  m.v_rho = CMatrix::Identity(1, 1);
  return m;
}

struct Solved {
  protocols::GeneratedInstance gen;
  ReducedModel model;
  SolveResult result;
};

Solved solved(const protocols::ProtocolParams& p) {
  Solved s{protocols::generate(p), {}, {}};
  s.model = build_reduced_model(s.gen.instance);
  s.result = solve(s.model);
  return s;
}

}  // namespace

TEST_CASE("rel_gap") {
  CHECK(rel_gap(0.0, 0.0) == 0.0);
  CHECK(rel_gap(1.0, 1.0) == 0.0);
  const double g = rel_gap(0.1, 0.1 - 1e-12);
  CHECK(g == doctest::Approx(1e-12 / 1.1).epsilon(1e-3));
  CHECK(std::abs(g - 9.0909e-13) <= 1e-16);
}

TEST_CASE("closed-form 1-d certificate") {
  ReducedModel m = scalar_model();
  HermitianMatrix one = HermitianMatrix::identity(1);
  CHECK(eval_f(m, one).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  RVector y = RVector::Constant(1, -std::log(2.0));
  BoundsCertificate c = lower_bound_fr(m, one, y);
  REQUIRE(c.lower_valid);
  CHECK(std::abs(c.z_bar_min_eig) <= 1e-15);
  CHECK(c.lower == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  NullspaceRep null = build_nullspace(m);
  auto ub = upper_bound(m, 0.7 * one, null);
  REQUIRE(ub.has_value());
  CHECK(*ub == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("upper bound by projection") {
  auto gen = protocols::gen_pmBB84({0.5, 0.05});
  ReducedModel m = build_reduced_model(gen.instance);
  NullspaceRep null = build_nullspace(m);
  HermitianMatrix feasible = restrict_to_face(m, gen.simulation_state);
  REQUIRE((m.apply_constraints(feasible) - m.gamma_v).cwiseAbs().maxCoeff() <= 1e-12);
  auto ub = upper_bound(m, feasible, null);
  REQUIRE(ub.has_value());
  CHECK(std::abs(*ub - eval_f(m, feasible).value) <= 1e-12);

  HermitianMatrix off = feasible + 1e-4 * random_hermitian(m.n_rho);
  HermitianMatrix projected = off - null.feasibility_correction(off, m.gamma_v);
  CHECK((m.apply_constraints(projected) - m.gamma_v).cwiseAbs().maxCoeff() <= 1e-12);
  auto ub_off = upper_bound(m, off, null);
  REQUIRE(ub_off.has_value());
  CHECK(std::abs(*ub_off - eval_f(m, projected).value) <= 1e-12);
}

TEST_CASE("bounds along a solve") {
  Solved eb = solved(protocols::EbBB84{0.5, 0.05});
  const auto& h = eb.result.history;
  REQUIRE(eb.result.termination == Termination::gap_met);
  CHECK(eb.result.gap() <= 1e-9);

  double first_ub = std::numeric_limits<double>::quiet_NaN(), last_ub = first_ub;
  for (const auto& r : h)
    if (r.has_upper) {
      if (std::isnan(first_ub)) first_ub = r.upper;
      last_ub = r.upper;
    }
  CHECK(last_ub <= first_ub);

  int violations = 0;
  for (const auto& lo : h) {
    if (!lo.lower_valid) continue;
    for (const auto& up : h)
      if (up.has_upper && lo.lower > up.upper + 1e-12 * (1.0 + std::abs(up.upper))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("identity-shift repair keeps the certificate exact") {
  Solved eb = solved(protocols::EbBB84{0.5, 0.05});
  const ReducedModel& m = eb.model;
  const HermitianMatrix& rho = eb.result.rho_opt;
  ObjectiveEvaluation at = eval_with_gradient(m, rho);
  RVector y = eb.result.y_opt;
  const double lmin0 = min_eigenvalue(at.gradient + m.adjoint_constraints(y));
  y(m.trace_row) -= lmin0 + 1e-9;

  BoundsCertificate c = lower_bound_fr(m, rho, y, at);
  REQUIRE(c.lower_valid);
  CHECK(c.z_bar_min_eig < 0.0);
  CHECK(c.shift_applied > 0.0);
  RVector expected = y;
  expected(m.trace_row) += c.shift_applied;
  CHECK((c.y_certified - expected).norm() == 0.0);

  const HermitianMatrix z_shifted = at.gradient + m.adjoint_constraints(c.y_certified);
  // Recomputing the slack from y_certified reorders the sums; only roundoff may differ.
  CHECK(min_eigenvalue(z_shifted) >= -1e-15);
  const HermitianMatrix identity_check = at.gradient + m.adjoint_constraints(c.y_certified) - z_shifted;
  CHECK(identity_check.norm() <= 1e-13);
  const double recomputed = at.value + c.y_certified.dot(m.apply_constraints(rho) - m.gamma_v) -
                            real_inner(rho, z_shifted);
  CHECK(std::abs(recomputed - c.lower) <= 1e-13);
  CHECK(c.lower <= eb.result.best_upper + 1e-12);
}

TEST_CASE("far dual vectors never give a wrong bound") {
  Solved pm = solved(protocols::PmBB84{0.5, 0.05});
  const double p_star = pm.result.best_upper;
  int invalid = 0;
  for (int t = 0; t < 50; ++t) {
    RVector y = RVector::NullaryExpr(pm.model.m_v(), [] { return 10.0 * gauss(); });
    HermitianMatrix rho = random_pd(pm.model.n_rho, 0.1);
    BoundsCertificate c = lower_bound_fr(pm.model, rho, y);
    if (!c.lower_valid) {
      ++invalid;
      continue;
    }
    CHECK(c.lower <= p_star + 1e-12);
    CHECK(c.z_bar_min_eig >= -psd_repair_tolerance(1e6));
  }
  CHECK(invalid > 0);
}

TEST_CASE("original-problem lower bound") {
  ProblemInstance inst = generic_instance();
  ReducedModel gm = build_reduced_model(inst);
  SolveResult gr = solve(gm);
  REQUIRE(gr.termination == Termination::gap_met);
  BoundsCertificate fr = lower_bound_fr(gm, gr.rho_opt, gr.y_opt);
  BoundsCertificate orig = lower_bound_original(inst, gm, gr.rho_opt, gr.y_opt);
  CHECK(fr.lower_valid == orig.lower_valid);
  CHECK(std::abs(fr.lower - orig.lower) <= 1e-12);

  Solved eb = solved(protocols::EbBB84{0.5, 0.05});
  BoundsCertificate ebfr = lower_bound_fr(eb.model, eb.result.rho_opt, eb.result.y_opt);
  OriginalBoundOptions opts;
  opts.epsilon_perturb = 1e-9;
  BoundsCertificate eborig = lower_bound_original(eb.gen.instance, eb.model, eb.result.rho_opt, eb.result.y_opt, opts);
  REQUIRE(ebfr.lower_valid);
  REQUIRE(eborig.lower_valid);
  CHECK(std::abs(ebfr.lower - eborig.lower) <= 1e-7);
  CHECK(eborig.lower <= eb.result.best_upper + 1e-12);

  Solved pm = solved(protocols::PmBB84{0.5, 0.05});
  BoundsCertificate with_w = lower_bound_original(pm.gen.instance, pm.model, pm.result.rho_opt, pm.result.y_opt);
  CHECK(with_w.lower_valid);
  CHECK(with_w.lower <= pm.result.best_upper + 1e-12);
  OriginalBoundOptions bare;
  bare.use_exposing_vector = false;
  BoundsCertificate without = lower_bound_original(pm.gen.instance, pm.model, pm.result.rho_opt, pm.result.y_opt, bare);
  CHECK(without.z_bar_min_eig < -psd_repair_tolerance(1.0));
  CHECK_FALSE(without.lower_valid);
}
