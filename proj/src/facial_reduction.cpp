#include "qkdfr/facial_reduction.hpp"

#include <algorithm>
#include <cmath>

namespace qkdfr {

namespace {

std::string field(Index i, const char* name) {
  return "constraints[" + std::to_string(i) + "]." + name;
}

KrausMap right_multiply(const KrausMap& map, const CMatrix& v) {
  std::vector<CMatrix> f;
  f.reserve(map.factors().size());
  for (const auto& k : map.factors()) f.push_back(k * v);
  return KrausMap(std::move(f));
}

KrausMap left_project(const KrausMap& map, const CMatrix& v, double tol, const char* who) {
  const HermitianMatrix img = map.apply(HermitianMatrix::identity(map.in_dim()));
  const CMatrix outside = img.matrix() - v * (v.adjoint() * img.matrix());
  if (outside.norm() > tol * std::max(1.0, img.norm())) {
    throw NumericalError(std::string(who) + ": image is not contained in range(V)");
  }
  std::vector<CMatrix> f;
  f.reserve(map.factors().size());
  for (const auto& k : map.factors()) f.push_back(v.adjoint() * k);
  return KrausMap(std::move(f));
}

void finish_model(const ProblemInstance& inst, const ReductionOptions& opts, ReducedModel& model) {
  model.n_rho = model.v_rho.cols();
  const KrausMap g_v = right_multiply(inst.g_map, model.v_rho);
  model.v_delta = minimal_face_of_image(g_v, opts.rank_tol);
  model.g_hat = rotate_g(g_v, model.v_delta);

  const KrausMap z_v = right_multiply(inst.z_map.as_kraus(), model.v_delta);
  model.v_sigma = minimal_face_of_image(z_v, opts.rank_tol);
  model.z_hat = ComposedMap(model.g_hat, rotate_z(z_v, model.v_sigma));

  std::vector<HermitianMatrix> ops;
  RVector values(inst.m());
  for (Index i = 0; i < inst.m(); ++i) {
    ops.push_back(congruence(model.v_rho, inst.constraints[i].op));
    values(i) = inst.constraints[i].value;
  }
  const RedundancyResult red = remove_redundant_constraints(ops, values, opts.redundancy_tol, 0);
  model.kept_constraints = red.kept;
  model.dropped_constraints = red.dropped;
  model.gamma_v.resize(static_cast<Index>(red.kept.size()));
  for (std::size_t j = 0; j < red.kept.size(); ++j) {
    model.gamma_ops.push_back(ops[red.kept[j]]);
    model.gamma_v(static_cast<Index>(j)) = values(red.kept[j]);
  }
  model.trace_row = 0;
}

}  // namespace

void validate_instance(const ProblemInstance& inst) {
  if (inst.n <= 0) throw InstanceError("n: must be positive");
  if (inst.constraints.empty()) throw InstanceError("constraints: empty");
  for (Index i = 0; i < inst.m(); ++i) {
    const auto& c = inst.constraints[i];
    if (c.op.dim() != inst.n) {
      throw InstanceError(field(i, "matrix") + ": dimension " + std::to_string(c.op.dim()) +
                          " != n = " + std::to_string(inst.n));
    }
    if (!std::isfinite(c.value)) throw InstanceError(field(i, "value") + ": not finite");
  }
  const auto& first = inst.constraints.front();
  if ((first.op.matrix() - CMatrix::Identity(inst.n, inst.n)).cwiseAbs().maxCoeff() > 1e-12 ||
      std::abs(first.value - 1.0) > 1e-12) {
    throw InstanceError("constraints[0]: must be the unit-trace row (identity, value 1)");
  }
  if (inst.g_map.in_dim() != inst.n) {
    throw InstanceError("kraus: input dimension " + std::to_string(inst.g_map.in_dim()) +
                        " != n = " + std::to_string(inst.n));
  }
  if (inst.z_map.dim() != inst.g_map.out_dim()) {
    throw InstanceError("pinching: dimension " + std::to_string(inst.z_map.dim()) +
                        " != k = " + std::to_string(inst.g_map.out_dim()));
  }
  if (!inst.g_map.is_trace_nonincreasing(1e-10)) {
    throw InstanceError("kraus: sum K^H K exceeds the identity (map is not trace-non-increasing)");
  }
  if (inst.reduced_density) {
    const auto& rd = *inst.reduced_density;
    if (rd.n_b <= 0 || rd.rho_a.dim() * rd.n_b != inst.n) {
      throw InstanceError("reduced_density: n_A * n_B != n");
    }
    if (std::abs(rd.rho_a.trace() - 1.0) > 1e-12) {
      throw InstanceError("reduced_density.rho_A: trace is not 1");
    }
    if (min_eigenvalue(rd.rho_a) < -1e-12) {
      throw InstanceError("reduced_density.rho_A: not positive semidefinite");
    }
  }
}

RVector ReducedModel::apply_constraints(const HermitianMatrix& rho) const {
  RVector out(m_v());
  for (Index i = 0; i < m_v(); ++i) out(i) = real_inner(gamma_ops[i], rho);
  return out;
}

HermitianMatrix ReducedModel::adjoint_constraints(const RVector& y) const {
  if (y.size() != m_v()) throw DimensionError("adjoint_constraints: length mismatch");
  CMatrix acc = CMatrix::Zero(n_rho, n_rho);
  for (Index i = 0; i < m_v(); ++i) acc += y(i) * gamma_ops[i].matrix();
  return HermitianMatrix::symmetrized(acc);
}

RMatrix ReducedModel::constraint_matrix() const {
  RMatrix a(m_v(), n_rho * n_rho);
  for (Index i = 0; i < m_v(); ++i) a.row(i) = hvec(gamma_ops[i]).transpose();
  return a;
}

FaceReduction fr_reduced_density(const HermitianMatrix& rho_a, Index n_b, double rank_tol) {
  const CompactDecomposition cd = compact_decomp(rho_a, rank_tol);
  FaceReduction fr;
  fr.rank = cd.rank;
  fr.v_rho = kron(cd.basis, CMatrix::Identity(n_b, n_b));
  fr.exposing = cd.complement * cd.complement.adjoint();
  return fr;
}

KrausMap rotate_g(const KrausMap& g_v, const CMatrix& v_delta, double tol) {
  return left_project(g_v, v_delta, tol, "rotate_g");
}

KrausMap rotate_z(const KrausMap& z_v, const CMatrix& v_sigma, double tol) {
  return left_project(z_v, v_sigma, tol, "rotate_z");
}

RedundancyResult remove_redundant_constraints(const std::vector<HermitianMatrix>& ops,
                                              const RVector& values, double tol, Index priority) {
  const Index m = static_cast<Index>(ops.size());
  if (values.size() != m) throw DimensionError("remove_redundant_constraints: length mismatch");
  RedundancyResult out;
  if (m == 0) return out;
  const Index d = ops.front().dim() * ops.front().dim();

  RMatrix rows(m, d);
  for (Index i = 0; i < m; ++i) rows.row(i) = hvec(ops[i]).transpose();

  // Work on unit-norm copies so weights attached to constraints do not steer pivoting.
  RMatrix work(m, d);
  for (Index i = 0; i < m; ++i) {
    const double nrm = rows.row(i).norm();
    work.row(i) = nrm > 0 ? RVector(rows.row(i).transpose() / nrm) : RVector::Zero(d);
  }
  // Pivoted Gram-Schmidt: residuals of every row are deflated after each accepted pivot.
  std::vector<bool> taken(m, false);
  RMatrix basis(d, 0);
  RMatrix resid = work;
  auto accept = [&](Index i) {
    RVector q = resid.row(i).transpose();
    q -= basis * (basis.transpose() * q);
    q /= q.norm();
    basis.conservativeResize(d, basis.cols() + 1);
    basis.col(basis.cols() - 1) = q;
    resid -= (resid * q) * q.transpose();
    taken[i] = true;
    out.kept.push_back(i);
  };
  if (priority >= 0 && priority < m && work.row(priority).norm() > tol) accept(priority);
  while (basis.cols() < d) {
    Index best = -1;
    double best_norm = tol;
    for (Index i = 0; i < m; ++i) {
      if (taken[i]) continue;
      const double rn = resid.row(i).norm();
      if (rn > best_norm) {
        best_norm = rn;
        best = i;
      }
    }
    if (best < 0) break;
    accept(best);
  }
  std::sort(out.kept.begin() + (out.kept.empty() || out.kept.front() != priority ? 0 : 1),
            out.kept.end());
  for (Index i = 0; i < m; ++i)
    if (!taken[i]) out.dropped.push_back(i);

  if (!out.dropped.empty()) {
    const Index r = static_cast<Index>(out.kept.size());
    RMatrix kept_rows(d, r);
    RVector kept_vals(r);
    for (Index j = 0; j < r; ++j) {
      kept_rows.col(j) = rows.row(out.kept[j]).transpose();
      kept_vals(j) = values(out.kept[j]);
    }
    const Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(kept_rows);
    for (Index i : out.dropped) {
      const RVector c = cod.solve(RVector(rows.row(i).transpose()));
      const double recon = c.dot(kept_vals);
      if (std::abs(values(i) - recon) > 1e-9 * std::max(1.0, std::abs(values(i)))) {
        throw InstanceError("constraints[" + std::to_string(i) +
                            "]: value is inconsistent with the other constraints (expected " +
                            std::to_string(recon) + ", got " + std::to_string(values(i)) + ")");
      }
    }
  }
  return out;
}

ReducedModel build_reduced_model(const ProblemInstance& inst, const ReductionOptions& opts) {
  validate_instance(inst);
  ReducedModel model;
  if (inst.reduced_density) {
    const auto& rd = *inst.reduced_density;
    const FaceReduction fr = fr_reduced_density(rd.rho_a, rd.n_b, opts.rank_tol);
    // The face is only valid if the constraint list actually pins Tr_B(rho) = rho_A.
    if (fr.rank < rd.rho_a.dim()) {
      const HermitianMatrix w = HermitianMatrix::symmetrized(
          kron(fr.exposing, CMatrix::Identity(rd.n_b, rd.n_b)));
      const auto y = span_coefficients(inst, w);
      double pairing = 0.0;
      if (y) {
        for (Index i = 0; i < inst.m(); ++i) pairing += (*y)(i) * inst.constraints[i].value;
      }
      if (!y || std::abs(pairing) > 1e-9) {
        throw InstanceError("reduced_density: rho_A is not implied by the constraints");
      }
    }
    model.v_rho = fr.v_rho;
    model.exposing = fr.exposing;
  } else {
    model.v_rho = CMatrix::Identity(inst.n, inst.n);
  }
  finish_model(inst, opts, model);
  return model;
}

ReducedModel build_image_model(const ProblemInstance& inst, const ReductionOptions& opts) {
  validate_instance(inst);
  ReducedModel model;
  model.v_rho = CMatrix::Identity(inst.n, inst.n);
  finish_model(inst, opts, model);
  return model;
}

HermitianMatrix lift(const ReducedModel& model, const HermitianMatrix& r) {
  if (r.dim() != model.n_rho) throw DimensionError("lift: dimension mismatch");
  return HermitianMatrix::symmetrized(model.v_rho * r.matrix() * model.v_rho.adjoint());
}

HermitianMatrix restrict_to_face(const ReducedModel& model, const HermitianMatrix& rho) {
  return congruence(model.v_rho, rho);
}

CMatrix face_complement(const ReducedModel& model) {
  const Index n = model.v_rho.rows();
  const HermitianMatrix proj = HermitianMatrix::symmetrized(
      CMatrix::Identity(n, n) - model.v_rho * model.v_rho.adjoint());
  return compact_decomp(proj, 1e-8).basis;
}

std::optional<RVector> span_coefficients(const ProblemInstance& inst, const HermitianMatrix& target,
                                         double tol) {
  const Index n2 = inst.n * inst.n;
  RMatrix a(n2, inst.m());
  for (Index i = 0; i < inst.m(); ++i) a.col(i) = hvec(inst.constraints[i].op);
  const RVector b = hvec(target);
  const Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(a);
  RVector y = cod.solve(b);
  if ((a * y - b).norm() > tol * std::max(1.0, b.norm())) return std::nullopt;
  return y;
}

double original_objective(const ProblemInstance& inst, const HermitianMatrix& rho) {
  const HermitianMatrix g = inst.g_map.apply(rho);
  const HermitianMatrix zg = inst.z_map.apply(g);
  return entropy_term(eigh(g).eigenvalues) - entropy_term(eigh(zg).eigenvalues);
}

}  // namespace qkdfr
