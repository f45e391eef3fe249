#include <doctest.h>

#include "qkdfr/gn_solver.hpp"
#include "qkdfr/protocols.hpp"
#include "support.hpp"

using namespace qkdfr;
using namespace qkdfr::testing;

namespace {

std::vector<protocols::GeneratedInstance> all_generators() {
  return {protocols::gen_ebBB84({0.5, 0.05}), protocols::gen_ebBB84({0.9, 0.07}),
          protocols::gen_ebBB84({0.7, 0.0}),  protocols::gen_pmBB84({0.5, 0.05}),
          protocols::gen_pmBB84({0.9, 0.07}), protocols::gen_mdiBB84({0.5, 0.05}),
          protocols::gen_tfqkd({0.8, 100, 0.7}), protocols::gen_tfqkd({0.3, 20, 0.5})};
}

double binary_entropy_nats(double q) {
  if (q <= 0.0) return 0.0;
  return -q * std::log(q) - (1 - q) * std::log(1 - q);
}

double bb84_rate(double p_z, double q) {
  return (p_z * p_z + (1 - p_z) * (1 - p_z)) * (std::log(2.0) - binary_entropy_nats(q));
}

// Two optical modes with at most two photons each; basis index 3 * n_first + n_second.
constexpr Index kModes = 9;

CMatrix annihilator(Index cutoff) {
  CMatrix a = CMatrix::Zero(cutoff, cutoff);
  for (Index k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(double(k));
  return a;
}

/// 50:50 beamsplitter exp(theta (a^H b - a b^H)) built from the spectrum of its
/// Hermitian generator, with the sign chosen so a single photon in the first mode
/// leaves as (|1,0> + |0,1>)/sqrt2.
CMatrix beamsplitter() {
  const CMatrix a = kron(annihilator(3), CMatrix::Identity(3, 3));
  const CMatrix b = kron(CMatrix::Identity(3, 3), annihilator(3));
  const CMatrix gen = a.adjoint() * b - a * b.adjoint();
  const HermitianMatrix h = HermitianMatrix::from(cplx(0, 1) * gen, 1e-12);
  const SpectralDecomposition s = eigh(h);
  auto exp_of = [&](double theta) {
    CVector phase(kModes);
    for (Index i = 0; i < kModes; ++i) phase(i) = std::exp(cplx(0, -theta * s.eigenvalues(i)));
    return CMatrix(s.unitary * phase.asDiagonal() * s.unitary.adjoint());
  };
  CMatrix u = exp_of(M_PI / 4);
  CVector one_first = CVector::Zero(kModes);
  one_first(3) = 1.0;
  if ((u * one_first)(1).real() < 0.0) u = exp_of(-M_PI / 4);
  return u;
}

}  // namespace

TEST_CASE("generated instances are valid and consistent") {
  for (const auto& g : all_generators()) {
    CAPTURE(g.instance.label);
    CHECK_NOTHROW(validate_instance(g.instance));
    CHECK(g.instance.g_map.is_trace_nonincreasing());
    CHECK(min_eigenvalue(g.simulation_state) >= -1e-14);
    CHECK(std::abs(g.simulation_state.trace() - 1.0) <= 1e-14);
    for (const auto& c : g.instance.constraints)
      CHECK(std::abs(real_inner(c.op, g.simulation_state) - c.value) <= 1e-14);
    const auto& ps = g.instance.z_map.projectors();
    CMatrix sum = CMatrix::Zero(g.instance.k(), g.instance.k());
    for (const auto& p : ps) sum += p;
    CHECK((sum - CMatrix::Identity(g.instance.k(), g.instance.k())).norm() <= 1e-12);
    if (g.instance.reduced_density) {
      const auto& rd = *g.instance.reduced_density;
      CMatrix marginal = partial_trace_second(g.simulation_state.matrix(), rd.rho_a.dim(), rd.n_b);
      CHECK((marginal - rd.rho_a.matrix()).norm() <= 1e-14);
    }
  }
}

TEST_CASE("published instance sizes") {
  auto eb = protocols::gen_ebBB84({0.5, 0.05});
  CHECK(eb.instance.n == 4);
  CHECK(eb.instance.k() == 16);
  CHECK_FALSE(eb.instance.reduced_density.has_value());

  auto pm = protocols::gen_pmBB84({0.5, 0.05});
  CHECK(pm.instance.n == 8);
  CHECK(pm.instance.m() == 21);
  ReducedModel pmr = build_reduced_model(pm.instance);
  CHECK(pmr.n_rho == 4);
  CHECK(pmr.m_v() == 8);

  auto mdi = protocols::gen_mdiBB84({0.5, 0.05});
  ReducedModel mdr = build_reduced_model(mdi.instance);
  CHECK(mdi.instance.n == 48);
  CHECK(mdi.instance.m() == 305);
  CHECK(mdr.n_rho == 12);
  CHECK(mdr.m_v() == 34);
}

TEST_CASE("BB84 optimum matches the analytic rate") {
  for (auto [pz, q] : {std::pair{0.5, 0.05}, std::pair{0.9, 0.07}, std::pair{0.7, 0.03}}) {
    for (auto params : {protocols::ProtocolParams{protocols::EbBB84{pz, q}},
                        protocols::ProtocolParams{protocols::PmBB84{pz, q}}}) {
      auto g = protocols::generate(params);
      CAPTURE(g.instance.label);
      SolveResult r = solve(build_reduced_model(g.instance));
      REQUIRE(r.termination == Termination::gap_met);
      CHECK(r.gap() <= 1e-9);
      CHECK(std::abs(r.best_upper - bb84_rate(pz, q)) <= 1e-9);
      CHECK(r.best_lower <= bb84_rate(pz, q) + 1e-12);
    }
  }
}

TEST_CASE("noiseless ebBB84") {
  auto g = protocols::gen_ebBB84({0.7, 0.0});
  CMatrix phi = CMatrix::Zero(4, 1);
  phi(0, 0) = phi(3, 0) = 1.0 / std::sqrt(2.0);
  const CMatrix bell = phi * phi.adjoint();
  CHECK((g.simulation_state.matrix() - bell).norm() <= 1e-15);

  // A PSD constraint operator with value 0 exposes a proper face: no feasible
  // state is positive definite.
  int exposing = 0;
  for (const auto& c : g.instance.constraints)
    if (std::abs(c.value) <= 1e-15 && c.op.norm() > 0.0 && min_eigenvalue(c.op) >= -1e-15) ++exposing;
  CHECK(exposing > 0);

  // Perfect correlations still leave the basis-sifting term, so the value is not zero.
  CHECK(std::abs(original_objective(g.instance, g.simulation_state) - bb84_rate(0.7, 0.0)) <= 1e-12);
}

TEST_CASE("mdiBB84 and TFQKD converge") {
  for (auto params : {protocols::ProtocolParams{protocols::MdiBB84{0.5, 0.05}},
                      protocols::ProtocolParams{protocols::Tfqkd{0.8, 100, 0.7}}}) {
    auto g = protocols::generate(params);
    CAPTURE(g.instance.label);
    SolveResult r = solve(build_reduced_model(g.instance));
    CHECK(r.termination == Termination::gap_met);
    CHECK(r.gap() <= 1e-9);
    CHECK(r.iterations <= 80);
  }
}

TEST_CASE("lossless TF interference against a Fock-space simulation") {
  protocols::Tfqkd p;
  p.q = 0.6;
  p.distance_km = 0.0;
  p.p_x = 0.5;
  p.eta_d = 1.0;
  p.p_d = 0.0;
  CHECK(protocols::tfqkd_arm_transmittance(p) == 1.0);
  auto g = protocols::gen_tfqkd(p);

  // Registers A, B (qubits) then modes a, b; each source is sqrt(q)|0,0> + sqrt(1-q)|1,1>.
  const double amp[2] = {std::sqrt(p.q), std::sqrt(1 - p.q)};
  CVector psi = CVector::Zero(4 * kModes);
  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 2; ++y) psi((x * 2 + y) * kModes + 3 * x + y) = amp[x] * amp[y];
  const CVector out = kron(CMatrix::Identity(4, 4), beamsplitter()) * psi;

  // Click patterns: only the first detector, only the second, anything else.
  std::array<CMatrix, 3> click;
  for (auto& c : click) c = CMatrix::Zero(kModes, kModes);
  for (Index nc = 0; nc < 3; ++nc)
    for (Index nd = 0; nd < 3; ++nd) {
      const Index o = nc > 0 && nd == 0 ? 0 : (nc == 0 && nd > 0 ? 1 : 2);
      click[o](3 * nc + nd, 3 * nc + nd) = 1.0;
    }

  CMatrix z0 = CMatrix::Zero(2, 2), z1 = z0, xp(2, 2), xm(2, 2);
  z0(0, 0) = 1.0;
  z1(1, 1) = 1.0;
  xp << 0.5, 0.5, 0.5, 0.5;
  xm << 0.5, -0.5, -0.5, 0.5;
  const std::array<CMatrix, 4> local{(1 - p.p_x) * z0, (1 - p.p_x) * z1, p.p_x * xp, p.p_x * xm};

  int matched = 0;
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 4; ++b)
      for (Index c = 0; c < 3; ++c) {
        const CMatrix obs = kron(kron(local[a], local[b]), click[c]);
        const double expected = (out.adjoint() * obs * out)(0, 0).real();
        CMatrix reg = CMatrix::Zero(3, 3);
        reg(c, c) = 1.0;
        const CMatrix op = kron(kron(local[a], local[b]), reg);
        CHECK(std::abs(real_inner(op, g.simulation_state.matrix()) - expected) <= 1e-13);
        for (const auto& con : g.instance.constraints)
          if ((con.op.matrix() - op).norm() <= 1e-14) {
            CHECK(std::abs(con.value - expected) <= 1e-13);
            ++matched;
            break;
          }
      }
  CHECK(matched == 48);
}

TEST_CASE("parameter parsing and validation") {
  auto p = protocols::parse_params("EBbb84", {0.5, 0.05});
  CHECK(protocols::protocol_name(p) == "ebBB84");
  CHECK(protocols::format_params(p) == "(0.50,0.05)");
  auto t = protocols::parse_params("tfqkd", {0.8, 100, 0.7});
  CHECK(protocols::format_params(t) == "(0.80,100.00,0.70)");
  CHECK_THROWS_AS(protocols::parse_params("ebBB84", {0.5}), InstanceError);
  CHECK_THROWS_AS(protocols::parse_params("bb85", {0.5, 0.1}), InstanceError);
  CHECK_THROWS_AS(protocols::parse_params("ebBB84", {0.5, 0.5}), InstanceError);
  CHECK_THROWS_AS(protocols::parse_params("mdiBB84", {1.5, 0.1}), InstanceError);
  CHECK_THROWS_AS(protocols::parse_params("TFQKD", {0.5, -1.0, 0.5}), InstanceError);

  auto basis = protocols::hermitian_basis(3);
  REQUIRE(basis.size() == 9);
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j)
      CHECK(std::abs(real_inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-15);
}
