// Writes the DMCV and dprBB84 instance files under data/instances/.
//
//   gen_external_instances <output-root>
//
// Physics used here stays out of the solver library; the files are the interface.
//
// DMCV(N_c, L, xi, alpha): QPSK coherent states |alpha i^x>, Bob's mode truncated to
// N_c+1 Fock levels. rho lives on A(4) (x) B(N_c+1); G appends Bob's heterodyne
// quadrant as the key register, G(rho) on R(4) (x) A(4) (x) B(N_c+1). The data comes
// from a thermal-loss channel (transmittance 10^{-0.02 L}, excess noise xi) applied in a
// larger Fock space, then compressed to the cutoff and renormalized. Constraints: unit
// trace, Hermitian basis on A, and per-state first/second moments {q, p, n, a^2+a^dag^2}.
//
// dprBB84(c, alpha, L): two-mode phase encoding with c global phases. rho lives on
// A(4) (x) C(c) (x) B(3), where B = {vacuum, |10>, |01>} after the squashing map
// (vacuum and one-photon blocks kept, more photons sent to I/2 on the qubit).
// Channel: pure loss with eta = eta_d 10^{-0.02 L} and a relative phase drift.
// Bob's POVM in the Z and X interferometer settings includes dark counts. G keys on
// Alice's bit after sifting, announcing the basis.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include "qkdfr/instance_io.hpp"
#include "qkdfr/protocols.hpp"

namespace {

using namespace qkdfr;
using protocols::hermitian_basis;
using protocols::ket;
using protocols::projector;
constexpr double kPi = std::numbers::pi;

CMatrix eye(Index n) { return CMatrix::Identity(n, n); }

class Builder {
 public:
  explicit Builder(const HermitianMatrix& sim) : sim_(sim) { add(eye(sim.dim())); }
  void add(const CMatrix& op) {
    HermitianMatrix h = HermitianMatrix::symmetrized(op);
    const double v = real_inner(h, sim_);
    rows_.push_back({std::move(h), v});
  }
  std::vector<LinearConstraint> take() { return std::move(rows_); }

 private:
  const HermitianMatrix& sim_;
  std::vector<LinearConstraint> rows_;
};

HermitianMatrix psd_sqrt(const HermitianMatrix& x) {
  SpectralDecomposition s = eigh(x);
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return HermitianMatrix::symmetrized(s.unitary * s.eigenvalues.asDiagonal() * s.unitary.adjoint());
}

// ---------------------------------------------------------------------------- DMCV

CMatrix annihilation(Index d) {
  CMatrix a = CMatrix::Zero(d, d);
  for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

CVector coherent(Index d, cplx alpha) {
  CVector v(d);
  cplx term = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 0; n < d; ++n) {
    v(n) = term;
    term *= alpha / std::sqrt(double(n + 1));
  }
  return v;
}

// Heterodyne quadrant operator R_z: integral of |beta><beta|/pi over arg(beta) in
// [z pi/2 - pi/4, z pi/2 + pi/4).
CMatrix quadrant(Index d, int z) {
  CMatrix r = CMatrix::Zero(d, d);
  const double lo = z * kPi / 2 - kPi / 4, hi = lo + kPi / 2;
  for (Index m = 0; m < d; ++m) {
    for (Index n = 0; n < d; ++n) {
      const double radial = 0.5 * std::exp(std::lgamma(0.5 * double(m + n) + 1.0) -
                                           0.5 * (std::lgamma(m + 1.0) + std::lgamma(n + 1.0)));
      const int k = int(m) - int(n);
      const cplx angular = k == 0 ? cplx(hi - lo)
                                  : (std::exp(cplx(0, -k * hi)) - std::exp(cplx(0, -k * lo))) /
                                        cplx(0, -k);
      // <m|beta><beta|n> carries beta^m conj(beta)^n, angular factor e^{i(m-n)theta}.
      r(m, n) = radial * std::conj(angular) / kPi;
    }
  }
  return r;
}

// Thermal-loss channel on |u><v| via a beamsplitter with a thermal environment mode.
class ThermalLoss {
 public:
  ThermalLoss(Index d_sys, Index d_env, double eta, double n_env) : ds_(d_sys), de_(d_env) {
    const CMatrix a = kron(annihilation(ds_), eye(de_));
    const CMatrix e = kron(eye(ds_), annihilation(de_));
    const CMatrix gen = a.adjoint() * e - a * e.adjoint();  // anti-Hermitian
    const double theta = std::acos(std::sqrt(eta));
    const SpectralDecomposition s = eigh(HermitianMatrix::symmetrized(cplx(0, 1) * gen));
    CVector phase(s.eigenvalues.size());
    for (Index i = 0; i < phase.size(); ++i) phase(i) = std::exp(cplx(0, -theta * s.eigenvalues(i)));
    u_ = s.unitary * phase.asDiagonal() * s.unitary.adjoint();
    env_ = CMatrix::Zero(de_, de_);
    for (Index k = 0; k < de_; ++k) env_(k, k) = std::pow(n_env, double(k)) / std::pow(n_env + 1, double(k + 1));
  }
  CMatrix apply(const CVector& u, const CVector& v) const {
    const CMatrix joint = u_ * kron(u * v.adjoint(), env_) * u_.adjoint();
    return partial_trace_second(joint, ds_, de_);
  }

 private:
  Index ds_, de_;
  CMatrix u_, env_;
};

struct DmcvParams {
  int cutoff;
  double distance_km, xi, alpha;
};

ProblemInstance gen_dmcv(const DmcvParams& p) {
  const Index nb = p.cutoff + 1;
  const Index d_big = std::max<Index>(nb + 12, 24);
  const double eta = std::pow(10.0, -0.02 * p.distance_km);
  const double n_env = eta * p.xi / (2.0 * (1.0 - eta));
  const ThermalLoss channel(d_big, 8, eta, n_env);

  std::array<CVector, 4> states;
  for (int x = 0; x < 4; ++x) states[x] = coherent(d_big, p.alpha * std::exp(cplx(0, x * kPi / 2)));

  CMatrix rho = CMatrix::Zero(4 * nb, 4 * nb);
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 4; ++y) {
      const CMatrix out = channel.apply(states[x], states[y]).topLeftCorner(nb, nb);
      rho += 0.25 * kron(ket(4, x) * ket(4, y).adjoint(), out);
    }
  }
  rho /= rho.trace().real();
  const HermitianMatrix sim = HermitianMatrix::symmetrized(rho);

  const CMatrix a = annihilation(nb);
  const CMatrix q = (a + a.adjoint()) / std::sqrt(2.0);
  const CMatrix pq = cplx(0, 1) * (a.adjoint() - a) / std::sqrt(2.0);
  const CMatrix num = a.adjoint() * a;
  const CMatrix d = a * a + a.adjoint() * a.adjoint();

  Builder cb(sim);
  for (const auto& t : hermitian_basis(4)) cb.add(kron(t.matrix(), eye(nb)));
  for (int x = 0; x < 4; ++x) {
    const CMatrix px = projector(ket(4, x));
    for (const CMatrix* op : {&q, &pq, &num, &d}) cb.add(kron(px, *op));
  }

  CMatrix k = CMatrix::Zero(16 * nb, 4 * nb);
  std::vector<CMatrix> pinch;
  for (int z = 0; z < 4; ++z) {
    const CMatrix root = psd_sqrt(HermitianMatrix::symmetrized(quadrant(nb, z))).matrix();
    k += kron(ket(4, z), kron(eye(4), root));
    pinch.push_back(kron(projector(ket(4, z)), eye(4 * nb)));
  }

  ProblemInstance inst;
  char label[96];
  std::snprintf(label, sizeof label, "DMCV(%.2f,%.2f,%.2f,%.2f)", double(p.cutoff), p.distance_km,
                p.xi, p.alpha);
  inst.label = label;
  inst.n = 4 * nb;
  inst.constraints = cb.take();
  inst.g_map = KrausMap({k});
  inst.z_map = PinchingMap(pinch);
  inst.reduced_density = ReducedDensity{HermitianMatrix::symmetrized(partial_trace_second(rho, 4, nb)), nb};
  return inst;
}

// ------------------------------------------------------------------------- dprBB84

struct DprParams {
  int phases;
  double alpha, distance_km;
  double eta_d = 0.045;
  double p_d = 8.5e-7;
  double drift_deg = 11.0;
  double p_z = 0.5;
};

// Squashed image of |u><v| for two-mode coherent states u = (u1,u2), v = (v1,v2), on
// {vacuum, |10>, |01>}. The >= 2 photon weight goes to I/2 on the one-photon block.
CMatrix squash(const std::array<cplx, 2>& u, const std::array<cplx, 2>& v) {
  const double nu = std::norm(u[0]) + std::norm(u[1]);
  const double nv = std::norm(v[0]) + std::norm(v[1]);
  const cplx norm = std::exp(-0.5 * (nu + nv));
  const cplx cross = std::conj(v[0]) * u[0] + std::conj(v[1]) * u[1];
  const cplx overlap = norm * std::exp(cross);
  const cplx p0 = norm, p1 = norm * cross;
  CMatrix out = CMatrix::Zero(3, 3);
  out(0, 0) = p0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(1 + i, 1 + j) = norm * u[i] * std::conj(v[j]);
  const cplx multi = overlap - p0 - p1;
  out(1, 1) += 0.5 * multi;
  out(2, 2) += 0.5 * multi;
  return out;
}

ProblemInstance gen_dprbb84(const DprParams& p) {
  const Index c = p.phases;
  const Index na = 4 * c;
  const double eta = p.eta_d * std::pow(10.0, -0.02 * p.distance_km);
  const double drift = p.drift_deg * kPi / 180.0;
  const std::array<double, 4> enc{0.0, kPi, kPi / 2, 3 * kPi / 2};  // Z: 0,pi  X: pi/2,3pi/2
  const std::array<double, 4> prob{p.p_z / 2, p.p_z / 2, (1 - p.p_z) / 2, (1 - p.p_z) / 2};

  // Index of |j>_A |l>_C is j*c + l.
  std::vector<std::array<cplx, 2>> sent(na), recv(na);
  std::vector<double> weight(na);
  for (Index j = 0; j < 4; ++j) {
    for (Index l = 0; l < c; ++l) {
      const double theta = 2 * kPi * double(l) / double(c);
      const Index i = j * c + l;
      sent[i] = {p.alpha * std::exp(cplx(0, theta)), p.alpha * std::exp(cplx(0, theta + enc[j]))};
      recv[i] = {std::sqrt(eta) * sent[i][0], std::sqrt(eta) * sent[i][1] * std::exp(cplx(0, drift))};
      weight[i] = prob[j] / double(c);
    }
  }

  // Pure loss: L(|u><v|) = <sqrt(1-eta) v | sqrt(1-eta) u> |sqrt(eta) u><sqrt(eta) v|.
  CMatrix rho = CMatrix::Zero(3 * na, 3 * na);
  CMatrix rho_a = CMatrix::Zero(na, na);
  for (Index i = 0; i < na; ++i) {
    for (Index k = 0; k < na; ++k) {
      cplx lost = 0.0, gram = 0.0;
      for (int m = 0; m < 2; ++m) {
        lost += -0.5 * (1 - eta) * (std::norm(sent[i][m]) + std::norm(sent[k][m])) +
                (1 - eta) * std::conj(sent[k][m]) * sent[i][m];
        gram += -0.5 * (std::norm(sent[i][m]) + std::norm(sent[k][m])) +
                std::conj(sent[k][m]) * sent[i][m];
      }
      const double amp = std::sqrt(weight[i] * weight[k]);
      rho_a(i, k) = amp * std::exp(gram);
      const CMatrix block = amp * std::exp(lost) * squash(recv[i], recv[k]);
      rho.block(3 * i, 3 * k, 3, 3) = block;
    }
  }
  const HermitianMatrix sim = HermitianMatrix::symmetrized(rho);

  // Bob's outcomes per setting b (measurement phase 0 or pi/2): bit 0, bit 1, no click.
  std::array<std::array<CMatrix, 3>, 2> povm;
  const double pd = p.p_d;
  for (int b = 0; b < 2; ++b) {
    const double phi = b == 0 ? 0.0 : kPi / 2;
    for (int bit = 0; bit < 2; ++bit) {
      CMatrix e = CMatrix::Zero(3, 1);
      e(1, 0) = 1.0 / std::sqrt(2.0);
      e(2, 0) = std::exp(cplx(0, phi + bit * kPi)) / std::sqrt(2.0);
      CMatrix f = (1 - pd) * projector(e);
      f(1, 1) += 0.5 * pd;
      f(2, 2) += 0.5 * pd;
      f(0, 0) += pd * (1 - pd) + 0.5 * pd * pd;
      povm[b][bit] = f;
    }
    povm[b][2] = CMatrix::Zero(3, 3);
    povm[b][2](0, 0) = (1 - pd) * (1 - pd);
  }
  const std::array<double, 2> bob_prob{p.p_z, 1 - p.p_z};

  Builder cb(sim);
  for (const auto& t : hermitian_basis(na)) cb.add(kron(t.matrix(), eye(3)));
  for (Index j = 0; j < 4; ++j) {
    const CMatrix aj = kron(projector(ket(4, j)), eye(c));
    for (int b = 0; b < 2; ++b)
      for (int o = 0; o < 3; ++o) cb.add(kron(aj, bob_prob[b] * povm[b][o]));
  }

  // Kraus factor per announced basis: key register R(2) (x) rho-space (x) basis flag(2).
  const Index n = 3 * na;
  std::vector<CMatrix> kraus;
  for (int b = 0; b < 2; ++b) {
    const CMatrix click = psd_sqrt(HermitianMatrix::symmetrized(bob_prob[b] * (povm[b][0] + povm[b][1]))).matrix();
    CMatrix kb = CMatrix::Zero(2 * n * 2, n);
    for (int bit = 0; bit < 2; ++bit) {
      const CMatrix aj = kron(projector(ket(4, 2 * b + bit)), eye(c));
      kb += kron(ket(2, bit), kron(kron(aj, click), ket(2, b)));
    }
    kraus.push_back(kb);
  }
  std::vector<CMatrix> pinch{kron(projector(ket(2, 0)), eye(2 * n)),
                             kron(projector(ket(2, 1)), eye(2 * n))};

  ProblemInstance inst;
  char label[96];
  std::snprintf(label, sizeof label, "dprBB84(%.2f,%.2f,%.2f)", double(c), p.alpha, p.distance_km);
  inst.label = label;
  inst.n = n;
  inst.constraints = cb.take();
  inst.g_map = KrausMap(std::move(kraus));
  inst.z_map = PinchingMap(pinch);
  inst.reduced_density = ReducedDensity{HermitianMatrix::symmetrized(rho_a), 3};
  return inst;
}

void write(const ProblemInstance& inst, const std::filesystem::path& path) {
  validate_instance(inst);
  std::filesystem::create_directories(path.parent_path());
  save_instance(inst, path.string());
  std::cout << path.string() << "  n=" << inst.n << " k=" << inst.k() << " m=" << inst.m() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gen_external_instances <output-root>\n";
    return 1;
  }
  const std::filesystem::path root = argv[1];
  try {
    write(gen_dmcv({3, 20.0, 0.01, 0.70}), root / "dmcv" / "dmcv_3_20_0.01_0.70.json");
    write(gen_dmcv({3, 60.0, 0.05, 0.35}), root / "dmcv" / "dmcv_3_60_0.05_0.35.json");
    write(gen_dprbb84({1, 0.08, 30.0}), root / "dprbb84" / "dprbb84_1_0.08_30.json");
    write(gen_dprbb84({2, 0.14, 30.0}), root / "dprbb84" / "dprbb84_2_0.14_30.json");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
