#include "qkdfr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qkdfr/bounds.hpp"
#include "qkdfr/instance_io.hpp"

namespace qkdfr::cli {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string size_str(Index a, Index b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// JSON has no infinities; they travel as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_or(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<double>();
}

std::string lb_str(double v, bool valid) { return valid ? fmt("%.15g", v) : "invalid"; }

}  // namespace

int exit_code(Termination t) {
  switch (t) {
    case Termination::gap_met: return kExitGapMet;
    case Termination::max_iters: return kExitMaxIters;
    case Termination::numerical_failure: return kExitNumericalFailure;
  }
  return kExitNumericalFailure;
}

Format parse_format(const std::string& s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  if (s == "jsonl") return Format::jsonl;
  throw Error("unknown format '" + s + "' (expected table, csv, json or jsonl)");
}

void validate(const RunSpec& spec) {
  if (spec.protocol.has_value() == spec.file.has_value()) {
    throw Error("exactly one of --protocol/--params or --file is required");
  }
  if (spec.protocol) protocols::validate_params(*spec.protocol);
  const SolverConfig& c = spec.config;
  if (!(c.epsilon > 0.0)) throw Error("--epsilon must be positive");
  if (c.max_iters < 0) throw Error("--max-iters must be non-negative");
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw Error("--eta must lie in (0,1)");
  if (!(c.rank_tol > 0.0)) throw Error("--rank-tol must be positive");
}

SolveReport run(const RunSpec& spec) {
  validate(spec);
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport r;
  ProblemInstance inst;
  if (spec.protocol) {
    inst = protocols::generate(*spec.protocol).instance;
    r.protocol = protocols::protocol_name(*spec.protocol);
    r.parameter = protocols::format_params(*spec.protocol);
  } else {
    inst = load_instance(*spec.file);
    r.protocol = inst.label;
    r.parameter = "file";
  }
  r.n = inst.n;
  r.k = inst.k();

  ReductionOptions ro;
  ro.rank_tol = spec.config.rank_tol;
  const ReducedModel model = build_reduced_model(inst, ro);
  r.n_rho = model.n_rho;
  r.m_v = model.m_v();

  const SolveResult res = solve(model, spec.config);
  r.termination = res.termination;
  r.diagnostic = res.diagnostic;
  r.iterations = res.iterations;
  r.final_relstopgap = res.relstopgap;
  r.bestub = res.best_upper;
  r.bestlb = res.best_lower;
  r.lower_valid = res.lower_valid;
  r.gap = res.gap();
  r.history = res.history;

  if (res.rho_opt.dim() == model.n_rho && res.y_opt.size() == model.m_v()) {
    try {
      const BoundsCertificate orig = lower_bound_original(inst, model, res.rho_opt, res.y_opt);
      r.original_lb = orig.lower;
      r.original_lb_valid = orig.lower_valid;
    } catch (const NumericalError&) {
      r.original_lb_valid = false;
    }
  }
  if (spec.leakage && r.lower_valid) r.key_rate = r.bestlb - *spec.leakage;

  r.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_report(std::ostream& out, const SolveReport& r, Format format) {
  switch (format) {
    case Format::csv:
      out << kSweepHeader << ",lower_valid,reduced_size,termination\n";
      out << csv_quote(r.protocol) << ',' << csv_quote(r.parameter) << ','
          << csv_quote(size_str(r.n, r.k)) << ',' << fmt("%.3e", r.gap) << ','
          << fmt("%.2f", r.time_s) << ',' << fmt("%.15g", r.bestub) << ','
          << lb_str(r.bestlb, r.lower_valid) << ',' << (r.lower_valid ? "true" : "false") << ','
          << csv_quote(size_str(r.n_rho, r.m_v)) << ',' << to_string(r.termination) << '\n';
      return;
    case Format::json:
    case Format::jsonl: {
      json j = {{"protocol", r.protocol},
                {"parameter", r.parameter},
                {"size", {r.n, r.k}},
                {"reduced_size", {r.n_rho, r.m_v}},
                {"gap", num(r.gap)},
                {"time", std::round(r.time_s * 100.0) / 100.0},
                {"bestub", num(r.bestub)},
                {"bestlb", num(r.bestlb)},
                {"lower_valid", r.lower_valid},
                {"original_lb", num(r.original_lb)},
                {"original_lb_valid", r.original_lb_valid},
                {"iterations", r.iterations},
                {"termination", to_string(r.termination)}};
      if (r.key_rate) j["key_rate"] = *r.key_rate;
      if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
      out << (format == Format::json ? j.dump(2) : j.dump()) << '\n';
      return;
    }
    case Format::table:
      out << "protocol       " << r.protocol << '\n'
          << "parameter      " << r.parameter << '\n'
          << "size           " << size_str(r.n, r.k) << '\n'
          << "reduced size   " << size_str(r.n_rho, r.m_v) << '\n'
          << "gap            " << fmt("%.3e", r.gap) << '\n'
          << "time           " << fmt("%.2f", r.time_s) << '\n'
          << "bestub         " << fmt("%.15g", r.bestub) << '\n'
          << "bestlb         " << lb_str(r.bestlb, r.lower_valid) << '\n'
          << "lower_valid    " << (r.lower_valid ? "true" : "false") << '\n'
          << "original lb    " << lb_str(r.original_lb, r.original_lb_valid) << '\n'
          << "iterations     " << r.iterations << '\n'
          << "termination    " << to_string(r.termination) << '\n';
      if (r.key_rate) out << "key rate       " << fmt("%.15g", *r.key_rate) << '\n';
      if (!r.diagnostic.empty()) out << "diagnostic     " << r.diagnostic << '\n';
      return;
  }
}

void write_trace(std::ostream& out, const std::vector<IterationRecord>& history, Format format) {
  if (format == Format::jsonl || format == Format::json) {
    for (const auto& h : history) {
      const json j = {{"iteration", h.iteration},
                      {"mu", h.mu},
                      {"norm_fd", h.norm_fd},
                      {"norm_fp", h.norm_fp},
                      {"norm_fc", h.norm_fc},
                      {"alpha_p", h.alpha_p},
                      {"alpha_d", h.alpha_d},
                      {"has_upper", h.has_upper},
                      {"upper", num(h.upper)},
                      {"lower_valid", h.lower_valid},
                      {"lower", num(h.lower)},
                      {"bestub", num(h.bestub)},
                      {"bestlb", num(h.bestlb)},
                      {"bestlb_valid", h.bestlb_valid},
                      {"relstopgap", num(h.relstopgap)},
                      {"primal_infeasibility", h.primal_infeasibility},
                      {"unit_step_taken", h.unit_step_taken}};
      out << j.dump() << '\n';
    }
    return;
  }
  char line[256];
  std::snprintf(line, sizeof line, "%4s %10s %10s %10s %10s %10s %10s %22s %22s %10s\n", "iter",
                "mu", "norm_fd", "norm_fp", "norm_fc", "alpha_p", "alpha_d", "bestub", "bestlb",
                "relstopgap");
  out << line;
  for (const auto& h : history) {
    const std::string lb = h.bestlb_valid ? fmt("%.15e", h.bestlb) : std::string("invalid");
    std::snprintf(line, sizeof line, "%4d %10.3e %10.3e %10.3e %10.3e %10.3e %10.3e %22.15e %22s %10.3e\n",
                  h.iteration, h.mu, h.norm_fd, h.norm_fp, h.norm_fc, h.alpha_p, h.alpha_d,
                  h.bestub, lb.c_str(), h.relstopgap);
    out << line;
  }
}

std::vector<IterationRecord> read_trace_jsonl(std::istream& in) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    IterationRecord h;
    h.iteration = j.at("iteration").get<int>();
    h.mu = j.at("mu").get<double>();
    h.norm_fd = j.at("norm_fd").get<double>();
    h.norm_fp = j.at("norm_fp").get<double>();
    h.norm_fc = j.at("norm_fc").get<double>();
    h.alpha_p = j.at("alpha_p").get<double>();
    h.alpha_d = j.at("alpha_d").get<double>();
    h.has_upper = j.at("has_upper").get<bool>();
    h.upper = num_or(j, "upper", inf);
    h.lower_valid = j.at("lower_valid").get<bool>();
    h.lower = num_or(j, "lower", -inf);
    h.bestub = num_or(j, "bestub", inf);
    h.bestlb = num_or(j, "bestlb", -inf);
    h.bestlb_valid = j.at("bestlb_valid").get<bool>();
    h.relstopgap = num_or(j, "relstopgap", inf);
    h.primal_infeasibility = j.at("primal_infeasibility").get<double>();
    h.unit_step_taken = j.at("unit_step_taken").get<bool>();
    out.push_back(h);
  }
  return out;
}

namespace {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InstanceError& e) {
    err << "instance error: " << e.what() << '\n';
    return kExitInstanceError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const DimensionError& e) {
    err << "instance error: " << e.what() << '\n';
    return kExitInstanceError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

void save_trace(const SolveReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open trace file '" + path + "'");
  write_trace(f, r.history, Format::jsonl);
}

}  // namespace

int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SolveReport r = run(spec);
    if (spec.trace_out) save_trace(r, *spec.trace_out);
    write_report(out, r, spec.format);
    if (!r.diagnostic.empty()) err << "solver: " << r.diagnostic << '\n';
    return exit_code(r.termination);
  });
}

int cmd_trace(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SolveReport r = run(spec);
    if (spec.trace_out) save_trace(r, *spec.trace_out);
    write_trace(out, r.history, spec.format == Format::table ? Format::table : Format::jsonl);
    return exit_code(r.termination);
  });
}

std::vector<double> parse_axis(const std::string& s) {
  std::vector<double> v;
  if (s.empty()) return v;
  auto to_d = [&](const std::string& t) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw Error("bad grid value '" + t + "' in '" + s + "'");
    return d;
  };
  if (s.find(':') != std::string::npos) {
    std::stringstream ss(s);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) ||
        c.find(':') != std::string::npos) {
      throw Error("range must be start:step:stop, got '" + s + "'");
    }
    const double start = to_d(a), step = to_d(b), stop = to_d(c);
    if (!(step > 0.0)) throw Error("range step must be positive in '" + s + "'");
    const long count = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Snap to 12 decimals so 0.01 + 4*0.02 prints as 0.09.
      v.push_back(std::round((start + double(i) * step) * 1e12) / 1e12);
    }
    return v;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(to_d(tok));
  return v;
}

std::vector<std::vector<double>> grid_rows(const std::vector<std::vector<double>>& axes) {
  if (axes.empty()) return {};
  std::vector<std::vector<double>> rows{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : rows) {
      for (double x : axis) {
        next.push_back(prefix);
        next.back().push_back(x);
      }
    }
    rows = std::move(next);
  }
  return rows;
}

int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (spec.jobs < 1) throw Error("--jobs must be at least 1");
    const auto rows = grid_rows(spec.axes);

    struct Row {
      SolveReport report;
      std::string error;
      int code = kExitGapMet;
    };
    std::vector<Row> results(rows.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(spec.jobs) if (spec.jobs > 1)
    for (long i = 0; i < static_cast<long>(rows.size()); ++i) {
      Row& row = results[static_cast<std::size_t>(i)];
      RunSpec rs;
      rs.config = spec.config;
      rs.leakage = spec.leakage;
      try {
        rs.protocol = protocols::parse_params(spec.protocol, rows[static_cast<std::size_t>(i)]);
        row.report = run(rs);
        row.code = exit_code(row.report.termination);
      } catch (const std::exception& e) {
        row.error = e.what();
        row.report.protocol = spec.protocol;
        row.code = dynamic_cast<const NumericalError*>(&e) ? kExitNumericalFailure
                                                            : kExitInstanceError;
      }
    }

    int worst = kExitGapMet;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!results[i].error.empty()) {
        err << "row " << i << ": " << results[i].error << '\n';
      } else if (!results[i].report.diagnostic.empty()) {
        err << "row " << i << ": " << results[i].report.diagnostic << '\n';
      }
      worst = std::max(worst, results[i].code);
    }

    if (spec.format == Format::json || spec.format == Format::jsonl) {
      json arr = json::array();
      for (const auto& row : results) {
        if (!row.error.empty()) {
          arr.push_back({{"protocol", row.report.protocol}, {"error", row.error}});
          continue;
        }
        std::ostringstream s;
        write_report(s, row.report, Format::jsonl);
        arr.push_back(json::parse(s.str()));
      }
      out << arr.dump(spec.format == Format::json ? 2 : -1) << '\n';
      return worst;
    }

    const bool csv = spec.format == Format::csv;
    char line[512];
    if (csv) {
      out << kSweepHeader << '\n';
    } else {
      std::snprintf(line, sizeof line, "%-10s %-22s %-9s %10s %7s %22s %22s\n", "protocol",
                    "parameter", "size", "gap", "time", "bestub", "bestlb");
      out << line;
    }
    for (const auto& row : results) {
      const SolveReport& r = row.report;
      std::string param = r.parameter, size = size_str(r.n, r.k), gap, time, ub, lb;
      if (!row.error.empty()) {
        param = param.empty() ? "-" : param;
        size = "-";
        gap = time = ub = lb = "error";
      } else {
        gap = fmt("%.3e", r.gap);
        time = fmt("%.2f", r.time_s);
        ub = fmt("%.15g", r.bestub);
        lb = lb_str(r.bestlb, r.lower_valid);
      }
      if (csv) {
        out << csv_quote(r.protocol) << ',' << csv_quote(param) << ',' << csv_quote(size) << ','
            << gap << ',' << time << ',' << ub << ',' << lb << '\n';
      } else {
        std::snprintf(line, sizeof line, "%-10s %-22s %-9s %10s %7s %22s %22s\n",
                      r.protocol.c_str(), param.c_str(), size.c_str(), gap.c_str(), time.c_str(),
                      ub.c_str(), lb.c_str());
        out << line;
      }
    }
    return worst;
  });
}

}  // namespace qkdfr::cli
