#include "qkdfr/protocols.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace qkdfr::protocols {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

CMatrix eye(Index d) { return CMatrix::Identity(d, d); }

CMatrix kron3(const CMatrix& a, const CMatrix& b, const CMatrix& c) { return kron(kron(a, b), c); }
CMatrix kron4(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  return kron(kron3(a, b, c), d);
}

struct QubitStates {
  CMatrix z0 = ket(2, 0);
  CMatrix z1 = ket(2, 1);
  CMatrix xp = kInvSqrt2 * (ket(2, 0) + ket(2, 1));
  CMatrix xm = kInvSqrt2 * (ket(2, 0) - ket(2, 1));
};

// Appends constraint rows and fills values from the simulation state.
class ConstraintBuilder {
 public:
  explicit ConstraintBuilder(const HermitianMatrix& sim) : sim_(sim) {
    add(CMatrix::Identity(sim.dim(), sim.dim()));
  }
  void add(const CMatrix& op) {
    HermitianMatrix h = HermitianMatrix::from(op, 1e-12);
    const double value = real_inner(h, sim_);
    rows_.push_back({std::move(h), value});
  }
  std::vector<LinearConstraint> take() { return std::move(rows_); }

 private:
  const HermitianMatrix& sim_;
  std::vector<LinearConstraint> rows_;
};

PinchingMap key_register_pinching(Index rest) {
  return PinchingMap({kron(projector(ket(2, 0)), eye(rest)), kron(projector(ket(2, 1)), eye(rest))});
}

// Source-replacement purification sum_i sqrt(p_i) |i>_A |phi_i>_A' of the four BB84 states.
CMatrix bb84_source(double p_z) {
  const QubitStates s;
  const std::array<CMatrix, 4> phi{s.z0, s.z1, s.xp, s.xm};
  const std::array<double, 4> prob{p_z / 2, p_z / 2, (1 - p_z) / 2, (1 - p_z) / 2};
  CMatrix psi = CMatrix::Zero(8, 1);
  for (Index i = 0; i < 4; ++i) psi += std::sqrt(prob[i]) * kron(ket(4, i), phi[i]);
  return psi;
}

std::array<CMatrix, 4> pauli_kraus(double p) {
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  return {std::sqrt(1 - 0.75 * p) * eye(2), std::sqrt(p / 4) * x, std::sqrt(p / 4) * y,
          std::sqrt(p / 4) * z};
}

CMatrix apply_kraus(const CMatrix& rho, const std::vector<CMatrix>& ks) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

// Lifts single-factor Kraus operators to act on factor `pos` of dims.
std::vector<CMatrix> on_factor(const std::vector<CMatrix>& ks, Index before, Index after) {
  std::vector<CMatrix> out;
  for (const auto& k : ks) out.push_back(kron3(eye(before), k, eye(after)));
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void require_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InstanceError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

CMatrix ket(Index dim, Index i) {
  CMatrix k = CMatrix::Zero(dim, 1);
  k(i, 0) = 1.0;
  return k;
}

CMatrix projector(const CMatrix& k) { return k * k.adjoint(); }

std::vector<HermitianMatrix> hermitian_basis(Index d) {
  std::vector<HermitianMatrix> out;
  for (Index i = 0; i < d * d; ++i) {
    RVector e = RVector::Zero(d * d);
    e(i) = 1.0;
    out.push_back(hmat(e));
  }
  return out;
}

GeneratedInstance gen_ebBB84(const EbBB84& p) {
  validate_params(p);
  const QubitStates s;
  const double pz = p.p_z, px = 1.0 - p.p_z;
  const std::array<CMatrix, 2> pz_proj{projector(s.z0), projector(s.z1)};
  const std::array<CMatrix, 2> px_proj{projector(s.xp), projector(s.xm)};

  const CMatrix phi_plus = kInvSqrt2 * (kron(s.z0, s.z0) + kron(s.z1, s.z1));
  const HermitianMatrix sim =
      HermitianMatrix::symmetrized((1 - 2 * p.q) * projector(phi_plus) + (2 * p.q / 4) * eye(4));

  CMatrix kz = CMatrix::Zero(16, 4), kx = CMatrix::Zero(16, 4);
  for (Index x = 0; x < 2; ++x) {
    kz += kron4(ket(2, x), std::sqrt(pz) * pz_proj[x], std::sqrt(pz) * eye(2), ket(2, 0));
    kx += kron4(ket(2, x), std::sqrt(px) * px_proj[x], std::sqrt(px) * eye(2), ket(2, 1));
  }

  ConstraintBuilder cb(sim);
  cb.add(pz * pz * (kron(pz_proj[0], pz_proj[1]) + kron(pz_proj[1], pz_proj[0])));
  cb.add(px * px * (kron(px_proj[0], px_proj[1]) + kron(px_proj[1], px_proj[0])));
  cb.add(pz * px * (kron(pz_proj[0], px_proj[1]) + kron(pz_proj[1], px_proj[0])));
  cb.add(px * pz * (kron(px_proj[0], pz_proj[1]) + kron(px_proj[1], pz_proj[0])));

  GeneratedInstance g;
  g.instance.label = protocol_name(p) + format_params(p);
  g.instance.n = 4;
  g.instance.constraints = cb.take();
  g.instance.g_map = KrausMap({kz, kx});
  g.instance.z_map = key_register_pinching(8);
  g.simulation_state = sim;
  return g;
}

GeneratedInstance gen_pmBB84(const PmBB84& p) {
  validate_params(p);
  const QubitStates s;
  const double pz = p.p_z, px = 1.0 - p.p_z;
  const CMatrix psi = bb84_source(pz);
  const CMatrix pure = projector(psi);
  const CMatrix rho_a = partial_trace_second(pure, 4, 2);
  const double lambda = 2 * p.q;
  const HermitianMatrix sim =
      HermitianMatrix::symmetrized((1 - lambda) * pure + lambda * kron(rho_a, 0.5 * eye(2)));

  CMatrix kz = CMatrix::Zero(32, 8), kx = CMatrix::Zero(32, 8);
  for (Index x = 0; x < 2; ++x) {
    kz += kron4(ket(2, x), projector(ket(4, x)), std::sqrt(pz) * eye(2), ket(2, 0));
    kx += kron4(ket(2, x), projector(ket(4, 2 + x)), std::sqrt(px) * eye(2), ket(2, 1));
  }

  ConstraintBuilder cb(sim);
  for (const auto& theta : hermitian_basis(4)) cb.add(kron(theta.matrix(), eye(2)));
  const auto a = [](Index i) { return projector(ket(4, i)); };
  cb.add(pz * (kron(a(0), projector(s.z1)) + kron(a(1), projector(s.z0))));
  cb.add(px * (kron(a(2), projector(s.xm)) + kron(a(3), projector(s.xp))));
  cb.add(px * (kron(a(0), projector(s.xm)) + kron(a(1), projector(s.xp))));
  cb.add(pz * (kron(a(2), projector(s.z1)) + kron(a(3), projector(s.z0))));

  GeneratedInstance g;
  g.instance.label = protocol_name(p) + format_params(p);
  g.instance.n = 8;
  g.instance.constraints = cb.take();
  g.instance.g_map = KrausMap({kz, kx});
  g.instance.z_map = key_register_pinching(16);
  g.instance.reduced_density = ReducedDensity{HermitianMatrix::symmetrized(rho_a), 2};
  g.simulation_state = sim;
  return g;
}

GeneratedInstance gen_mdiBB84(const MdiBB84& p) {
  validate_params(p);
  const double pz = p.p_z;
  const CMatrix psi = bb84_source(pz);  // A (x) A', identical for Bob

  // Joint vector ordered A, B, A', B'.
  CMatrix joint = CMatrix::Zero(64, 1);
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 4; ++b)
      for (Index a2 = 0; a2 < 2; ++a2)
        for (Index b2 = 0; b2 < 2; ++b2)
          joint(((a * 4 + b) * 2 + a2) * 2 + b2, 0) = psi(a * 2 + a2, 0) * psi(b * 2 + b2, 0);
  CMatrix rho = projector(joint);
  const auto pk = pauli_kraus(p.p);
  const std::vector<CMatrix> dep(pk.begin(), pk.end());
  rho = apply_kraus(rho, on_factor(dep, 16, 2));
  rho = apply_kraus(rho, on_factor(dep, 32, 1));

  const QubitStates s;
  const CMatrix psi_plus = kInvSqrt2 * (kron(s.z0, s.z1) + kron(s.z1, s.z0));
  const CMatrix psi_minus = kInvSqrt2 * (kron(s.z0, s.z1) - kron(s.z1, s.z0));
  const std::array<CMatrix, 3> bsm{projector(psi_plus), projector(psi_minus),
                                   eye(4) - projector(psi_plus) - projector(psi_minus)};

  CMatrix sim_m = CMatrix::Zero(48, 48);
  for (Index c = 0; c < 3; ++c) {
    const CMatrix xc = partial_trace_second(rho * kron(eye(16), bsm[c]), 16, 4);
    sim_m += kron(xc, projector(ket(3, c)));
  }
  const HermitianMatrix sim = HermitianMatrix::symmetrized(sim_m);
  const CMatrix rho_ab = partial_trace_second(sim_m, 16, 3);

  const CMatrix bob_z = projector(ket(4, 0)) + projector(ket(4, 1));
  std::vector<CMatrix> kraus;
  for (Index c = 0; c < 2; ++c) {
    CMatrix k = CMatrix::Zero(96, 48);
    for (Index x = 0; x < 2; ++x) {
      k += kron4(ket(2, x), projector(ket(4, x)), bob_z, projector(ket(3, c)));
    }
    kraus.push_back(k);
  }

  ConstraintBuilder cb(sim);
  for (const auto& theta : hermitian_basis(16)) cb.add(kron(theta.matrix(), eye(3)));
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index c = 0; c < 3; ++c)
        cb.add(kron3(projector(ket(4, i)), projector(ket(4, j)), projector(ket(3, c))));

  GeneratedInstance g;
  g.instance.label = protocol_name(p) + format_params(p);
  g.instance.n = 48;
  g.instance.constraints = cb.take();
  g.instance.g_map = KrausMap(std::move(kraus));
  g.instance.z_map = key_register_pinching(48);
  g.instance.reduced_density = ReducedDensity{HermitianMatrix::symmetrized(rho_ab), 3};
  g.simulation_state = sim;
  return g;
}

double tfqkd_arm_transmittance(const Tfqkd& p) {
  return p.eta_d * std::pow(10.0, -0.02 * (p.distance_km / 2.0));
}

std::array<CMatrix, 3> tfqkd_detection_povm(double p_d) {
  // Output Fock states (n_c, n_d): 00, 10, 01, 20, 11, 02.
  const std::array<std::array<int, 2>, 6> out{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
  CMatrix u = CMatrix::Zero(6, 4);
  u(0, 0) = 1.0;                                   // |00>
  u(1, 1) = -kInvSqrt2, u(2, 1) = kInvSqrt2;       // b photon -> (d - c)/sqrt2
  u(1, 2) = kInvSqrt2, u(2, 2) = kInvSqrt2;         // a photon -> (c + d)/sqrt2
  u(3, 3) = -kInvSqrt2, u(5, 3) = kInvSqrt2;        // a b -> (d^2 - c^2)/2
  std::array<CMatrix, 3> m;
  for (auto& x : m) x = CMatrix::Zero(4, 4);
  std::array<RVector, 3> diag;
  for (auto& d : diag) d = RVector::Zero(6);
  for (Index o = 0; o < 6; ++o) {
    const double pc = out[o][0] > 0 ? 1.0 : p_d;
    const double pd = out[o][1] > 0 ? 1.0 : p_d;
    diag[0](o) = pc * (1 - pd);
    diag[1](o) = (1 - pc) * pd;
    diag[2](o) = 1.0 - diag[0](o) - diag[1](o);
  }
  for (Index c = 0; c < 3; ++c) m[c] = u.adjoint() * diag[c].cast<cplx>().asDiagonal() * u;
  return m;
}

GeneratedInstance gen_tfqkd(const Tfqkd& p) {
  validate_params(p);
  const double eta = tfqkd_arm_transmittance(p);
  const std::array<double, 2> amp{std::sqrt(p.q), std::sqrt(1 - p.q)};

  // Ordered A, B, a, b; each source emits sqrt(q)|0>|0> + sqrt(1-q)|1>|1>.
  CMatrix joint = CMatrix::Zero(16, 1);
  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 2; ++y) joint(((x * 2 + y) * 2 + x) * 2 + y, 0) = amp[x] * amp[y];
  CMatrix rho = projector(joint);

  CMatrix e0 = CMatrix::Zero(2, 2), e1 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::sqrt(eta);
  e1(0, 1) = std::sqrt(1 - eta);
  rho = apply_kraus(rho, on_factor({e0, e1}, 4, 2));
  rho = apply_kraus(rho, on_factor({e0, e1}, 8, 1));

  const auto povm = tfqkd_detection_povm(p.p_d);
  CMatrix sim_m = CMatrix::Zero(12, 12);
  for (Index c = 0; c < 3; ++c) {
    sim_m += kron(partial_trace_second(rho * kron(eye(4), povm[c]), 4, 4), projector(ket(3, c)));
  }
  const HermitianMatrix sim = HermitianMatrix::symmetrized(sim_m);
  const CMatrix rho_ab = partial_trace_second(sim_m, 4, 3);

  const QubitStates s;
  const std::array<CMatrix, 2> x_proj{projector(s.xp), projector(s.xm)};
  const double spx = std::sqrt(p.p_x);
  std::vector<CMatrix> kraus;
  for (Index c = 0; c < 2; ++c) {
    CMatrix k = CMatrix::Zero(24, 12);
    for (Index x = 0; x < 2; ++x) {
      k += kron4(ket(2, x), spx * x_proj[x], spx * eye(2), projector(ket(3, c)));
    }
    kraus.push_back(k);
  }

  const std::array<CMatrix, 4> local{(1 - p.p_x) * projector(s.z0), (1 - p.p_x) * projector(s.z1),
                                     p.p_x * x_proj[0], p.p_x * x_proj[1]};
  ConstraintBuilder cb(sim);
  for (const auto& theta : hermitian_basis(4)) cb.add(kron(theta.matrix(), eye(3)));
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 4; ++b)
      for (Index c = 0; c < 3; ++c) cb.add(kron3(local[a], local[b], projector(ket(3, c))));

  GeneratedInstance g;
  g.instance.label = protocol_name(p) + format_params(p);
  g.instance.n = 12;
  g.instance.constraints = cb.take();
  g.instance.g_map = KrausMap(std::move(kraus));
  g.instance.z_map = key_register_pinching(12);
  g.instance.reduced_density = ReducedDensity{HermitianMatrix::symmetrized(rho_ab), 3};
  g.simulation_state = sim;
  return g;
}

GeneratedInstance generate(const ProtocolParams& params) {
  return std::visit(
      [](const auto& p) -> GeneratedInstance {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EbBB84>) return gen_ebBB84(p);
        else if constexpr (std::is_same_v<T, PmBB84>) return gen_pmBB84(p);
        else if constexpr (std::is_same_v<T, MdiBB84>) return gen_mdiBB84(p);
        else return gen_tfqkd(p);
      },
      params);
}

ProtocolParams parse_params(const std::string& protocol, const std::vector<double>& v) {
  const std::string name = lower(protocol);
  auto need = [&](std::size_t count) {
    if (v.size() != count) {
      throw InstanceError(protocol + " expects " + std::to_string(count) + " parameters, got " +
                          std::to_string(v.size()));
    }
  };
  ProtocolParams out;
  if (name == "ebbb84") {
    need(2);
    out = EbBB84{v[0], v[1]};
  } else if (name == "pmbb84") {
    need(2);
    out = PmBB84{v[0], v[1]};
  } else if (name == "mdibb84") {
    need(2);
    out = MdiBB84{v[0], v[1]};
  } else if (name == "tfqkd") {
    need(3);
    Tfqkd t;
    t.q = v[0];
    t.distance_km = v[1];
    t.p_x = v[2];
    out = t;
  } else {
    throw InstanceError("unknown protocol '" + protocol + "' (expected ebBB84, pmBB84, mdiBB84, TFQKD)");
  }
  validate_params(out);
  return out;
}

std::string protocol_name(const ProtocolParams& params) {
  static const char* names[] = {"ebBB84", "pmBB84", "mdiBB84", "TFQKD"};
  return names[params.index()];
}

std::string format_params(const ProtocolParams& params) {
  char buf[128];
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EbBB84> || std::is_same_v<T, PmBB84>) {
          std::snprintf(buf, sizeof buf, "(%.2f,%.2f)", p.p_z, p.q);
        } else if constexpr (std::is_same_v<T, MdiBB84>) {
          std::snprintf(buf, sizeof buf, "(%.2f,%.2f)", p.p_z, p.p);
        } else {
          std::snprintf(buf, sizeof buf, "(%.2f,%.2f,%.2f)", p.q, p.distance_km, p.p_x);
        }
      },
      params);
  return buf;
}

void validate_params(const ProtocolParams& params) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EbBB84> || std::is_same_v<T, PmBB84>) {
          require_probability(p.p_z, "p_z");
          if (!(p.q >= 0.0 && p.q < 0.5)) throw InstanceError("Q must lie in [0, 0.5)");
        } else if constexpr (std::is_same_v<T, MdiBB84>) {
          require_probability(p.p_z, "p_z");
          require_probability(p.p, "p");
        } else {
          require_probability(p.q, "q");
          require_probability(p.p_x, "p_x");
          require_probability(p.eta_d, "eta_d");
          require_probability(p.p_d, "p_d");
          if (!(p.distance_km >= 0.0)) throw InstanceError("L must be non-negative");
        }
      },
      params);
}

}  // namespace qkdfr::protocols
