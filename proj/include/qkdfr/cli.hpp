#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qkdfr/gn_solver.hpp"
#include "qkdfr/protocols.hpp"

namespace qkdfr::cli {

enum ExitCode : int {
  kExitGapMet = 0,
  kExitUsage = 1,
  kExitMaxIters = 2,
  kExitInstanceError = 3,
  kExitNumericalFailure = 4,
};

int exit_code(Termination t);

enum class Format { table, csv, json, jsonl };
Format parse_format(const std::string& s);

/// Exactly one of `protocol` / `file` is set.
struct RunSpec {
  std::optional<protocols::ProtocolParams> protocol;
  std::optional<std::string> file;
  SolverConfig config;
  Format format = Format::table;
  std::optional<double> leakage;  // subtracted from bestlb in the reported key rate
  std::optional<std::string> trace_out;
};

void validate(const RunSpec& spec);

struct SolveReport {
  std::string protocol;
  std::string parameter;
  Index n = 0, k = 0;
  Index n_rho = 0, m_v = 0;
  double gap = 0.0;
  double time_s = 0.0;
  double bestub = 0.0;
  double bestlb = 0.0;
  bool lower_valid = false;
  // Lower bound for the unreduced problem, certified at the final iterate.
  double original_lb = 0.0;
  bool original_lb_valid = false;
  std::optional<double> key_rate;  // bestlb - leakage, only when the bound is valid
  Termination termination = Termination::numerical_failure;
  std::string diagnostic;
  int iterations = 0;
  double final_relstopgap = 0.0;
  std::vector<IterationRecord> history;
};

/// Builds, reduces and solves. Instance problems propagate as InstanceError.
SolveReport run(const RunSpec& spec);

void write_report(std::ostream& out, const SolveReport& r, Format format);

// Trace output. `table` is a fixed-width human table, `jsonl` one JSON object per iteration.
void write_trace(std::ostream& out, const std::vector<IterationRecord>& history, Format format);
std::vector<IterationRecord> read_trace_jsonl(std::istream& in);

/// Each returns the process exit code; diagnostics go to `err`.
int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_trace(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct SweepSpec {
  std::string protocol;
  // One axis per protocol parameter; rows are the Cartesian product, first axis outermost.
  std::vector<std::vector<double>> axes;
  SolverConfig config;
  Format format = Format::csv;
  int jobs = 1;
  std::optional<double> leakage;
};

/// "0.5,0.7" or "start:step:stop" (inclusive, rounded to the step grid); "" is empty.
std::vector<double> parse_axis(const std::string& s);
std::vector<std::vector<double>> grid_rows(const std::vector<std::vector<double>>& axes);

inline const char* kSweepHeader = "protocol,parameter,size,gap,time,bestub,bestlb";

int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace qkdfr::cli
