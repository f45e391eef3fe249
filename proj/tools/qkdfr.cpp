// qkdfr: solve, sweep and trace key-rate problems from the command line.
//
//   qkdfr solve --protocol ebBB84 --params 0.5,0.05
//   qkdfr solve --file data/instances/dmcv/dmcv_nc3.json --format json
//   qkdfr sweep --protocol ebBB84 --grid 0.5,0.7,0.9 --grid 0.01:0.02:0.09 --jobs 4
//   qkdfr trace --protocol pmBB84 --params 0.9,0.07 --format jsonl
//
// Exit codes: 0 gap met, 1 usage, 2 max iterations, 3 instance error, 4 numerical failure.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qkdfr/cli.hpp"

namespace {

using namespace qkdfr;

struct Common {
  std::string protocol;
  std::string params;
  std::string file;
  std::string format;
  double epsilon = SolverConfig{}.epsilon;
  int max_iters = SolverConfig{}.max_iters;
  double eta = SolverConfig{}.eta;
  double rank_tol = SolverConfig{}.rank_tol;
  double leakage = 0.0;
  bool has_leakage = false;
  int verbosity = 0;
  bool serial = false;
};

void add_config_flags(CLI::App* app, Common& c) {
  app->add_option("--epsilon", c.epsilon, "Stopping tolerance on the relative gap");
  app->add_option("--max-iters", c.max_iters, "Iteration limit");
  app->add_option("--eta", c.eta, "Barrier reduction factor in (0,1)");
  app->add_option("--rank-tol", c.rank_tol, "Relative eigenvalue cutoff for facial reduction");
  app->add_option("--leakage", c.leakage, "Error-correction leakage subtracted from bestlb")
      ->each([&](const std::string&) { c.has_leakage = true; });
  app->add_flag("-v,--verbose", c.verbosity, "Per-iteration progress on stderr");
  app->add_flag("--serial", c.serial, "Disable OpenMP in the Hessian and system assembly");
}

SolverConfig config_of(const Common& c) {
  SolverConfig cfg;
  cfg.epsilon = c.epsilon;
  cfg.max_iters = c.max_iters;
  cfg.eta = c.eta;
  cfg.rank_tol = c.rank_tol;
  cfg.verbosity = c.verbosity;
  cfg.parallel = !c.serial;
  return cfg;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v = cli::parse_axis(s);
  if (s.find(':') != std::string::npos) throw Error("--params takes a comma list, not a range");
  return v;
}

cli::RunSpec run_spec_of(const Common& c, const std::string& trace_out) {
  cli::RunSpec spec;
  if (!c.protocol.empty()) spec.protocol = protocols::parse_params(c.protocol, parse_list(c.params));
  if (!c.file.empty()) spec.file = c.file;
  spec.config = config_of(c);
  if (!c.format.empty()) spec.format = cli::parse_format(c.format);
  if (c.has_leakage) spec.leakage = c.leakage;
  if (!trace_out.empty()) spec.trace_out = trace_out;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-rate solver with facial reduction and projected Gauss-Newton"};
  app.require_subcommand(1);

  Common solve_opts, trace_opts, sweep_opts;
  std::string solve_trace_out, trace_trace_out;
  std::vector<std::string> grid;
  int jobs = 1;

  auto add_source = [](CLI::App* sub, Common& c) {
    auto* p = sub->add_option("--protocol", c.protocol, "ebBB84, pmBB84, mdiBB84 or TFQKD");
    auto* f = sub->add_option("--file", c.file, "Instance file (JSON)");
    sub->add_option("--params", c.params, "Comma-separated protocol parameters")->needs(p);
    p->excludes(f);
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve one instance and print a report");
  add_source(solve, solve_opts);
  add_config_flags(solve, solve_opts);
  solve->add_option("--format", solve_opts.format, "table, csv or json")->default_str("table");
  solve->add_option("--trace-out", solve_trace_out, "Also write the iteration trace as JSON lines");

  CLI::App* trace = app.add_subcommand("trace", "Print the per-iteration log");
  add_source(trace, trace_opts);
  add_config_flags(trace, trace_opts);
  trace->add_option("--format", trace_opts.format, "table or jsonl")->default_str("table");
  trace->add_option("--trace-out", trace_trace_out, "Also write the trace as JSON lines");

  CLI::App* sweep = app.add_subcommand("sweep", "Solve a Cartesian parameter grid");
  sweep->add_option("--protocol", sweep_opts.protocol, "Protocol name")->required();
  sweep->add_option("--grid", grid,
                    "One axis per parameter, in parameter order: 'a,b,c' or 'start:step:stop'")
      ->take_all();
  sweep->add_option("--jobs", jobs, "Rows solved concurrently")->default_val(1);
  add_config_flags(sweep, sweep_opts);
  sweep->add_option("--format", sweep_opts.format, "csv, table or json")->default_str("csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  try {
    if (*solve) {
      cli::RunSpec spec = run_spec_of(solve_opts, solve_trace_out);
      return cli::cmd_solve(spec, std::cout, std::cerr);
    }
    if (*trace) {
      cli::RunSpec spec = run_spec_of(trace_opts, trace_trace_out);
      if (trace_opts.format.empty()) spec.format = cli::Format::table;
      return cli::cmd_trace(spec, std::cout, std::cerr);
    }
    cli::SweepSpec spec;
    spec.protocol = sweep_opts.protocol;
    for (const auto& g : grid) spec.axes.push_back(cli::parse_axis(g));
    spec.config = config_of(sweep_opts);
    spec.config.verbosity = 0;
    spec.format = sweep_opts.format.empty() ? cli::Format::csv : cli::parse_format(sweep_opts.format);
    spec.jobs = jobs;
    if (sweep_opts.has_leakage) spec.leakage = sweep_opts.leakage;
    return cli::cmd_sweep(spec, std::cout, std::cerr);
  } catch (const InstanceError& e) {
    std::cerr << "instance error: " << e.what() << '\n';
    return cli::kExitInstanceError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
}
