// Serial vs OpenMP assembly of the Hessian matrix and the Gauss-Newton system.
#include <benchmark/benchmark.h>

#include "qkdfr/gn_solver.hpp"
#include "qkdfr/kernels.hpp"
#include "qkdfr/nullspace.hpp"
#include "qkdfr/objective.hpp"
#include "qkdfr/protocols.hpp"

namespace {

using namespace qkdfr;

struct Fixture {
  ReducedModel model;
  NullspaceRep null;
  SolverState state;
  ObjectiveEvaluation eval;
};

const Fixture& fixture(int which) {
  static const auto make = [](const protocols::ProtocolParams& p) {
    Fixture f;
    f.model = build_reduced_model(protocols::generate(p).instance);
    f.null = build_nullspace(f.model);
    f.state.rho = initial_rho(f.model, f.null);
    f.state.v = f.null.coordinates(f.state.rho);
    f.state.y = RVector::Zero(f.model.m_v());
    f.state.mu = 1.0;
    f.state.z = HermitianMatrix::identity(f.model.n_rho);
    f.eval = eval_with_gradient(f.model, f.state.rho);
    return f;
  };
  static const Fixture mdi = make(protocols::MdiBB84{0.5, 0.05});
  static const Fixture tf = make(protocols::Tfqkd{0.8, 100.0, 0.7});
  return which == 0 ? mdi : tf;
}

void BM_Hessian(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  const bool parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(hess_matrix_f(f.model, f.eval, parallel).matrix.data());
  st.SetLabel(std::string(st.range(0) == 0 ? "mdiBB84" : "TFQKD") +
              (parallel ? " omp" : " serial"));
}

void BM_GnSystem(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  const bool parallel = st.range(1) != 0;
  const RMatrix hessian = hess_matrix_f(f.model, f.eval, false).matrix;
  const Residuals res = residuals(f.model, f.null, f.state, f.eval.gradient);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        build_gn_system(f.model, f.null, f.state, res, hessian, parallel).matrix.data());
  }
  st.SetLabel(std::string(st.range(0) == 0 ? "mdiBB84" : "TFQKD") +
              (parallel ? " omp" : " serial"));
}

void BM_Solve(benchmark::State& st) {
  const Fixture& f = fixture(static_cast<int>(st.range(0)));
  SolverConfig cfg;
  cfg.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(solve(f.model, cfg).best_upper);
  st.SetLabel(std::string(st.range(0) == 0 ? "mdiBB84" : "TFQKD") +
              (cfg.parallel ? " omp" : " serial"));
}

}  // namespace

BENCHMARK(BM_Hessian)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GnSystem)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Solve)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
