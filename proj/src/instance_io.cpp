#include "qkdfr/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qkdfr {

namespace {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw InstanceError(source_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const char* key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing field");
    return *it;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "not finite");
    return d;
  }

  Index integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer() || v.get<long long>() <= 0) fail(path, "expected a positive integer");
    return static_cast<Index>(v.get<long long>());
  }

  CMatrix matrix(const json& v, Index rows, Index cols, const std::string& path) const {
    if (!v.is_array() || static_cast<Index>(v.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows");
    }
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const json& row = v[i];
      const std::string rp = path + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
        fail(rp, "expected " + std::to_string(cols) + " entries");
      }
      for (Index j = 0; j < cols; ++j) {
        const json& e = row[j];
        const std::string ep = rp + "[" + std::to_string(j) + "]";
        if (e.is_number()) {
          m(i, j) = number(e, ep);
        } else if (e.is_array() && e.size() == 2) {
          m(i, j) = cplx(number(e[0], ep + "[0]"), number(e[1], ep + "[1]"));
        } else {
          fail(ep, "expected [re, im]");
        }
      }
    }
    return m;
  }

  HermitianMatrix hermitian(const json& v, Index n, const std::string& path) const {
    const CMatrix m = matrix(v, n, n, path);
    try {
      return HermitianMatrix::from(m, 1e-12);
    } catch (const InstanceError& e) {
      fail(path, e.what());
    }
  }

 private:
  std::string source_;
};

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

std::string dump_instance(const ProblemInstance& inst) {
  json doc;
  doc["label"] = inst.label;
  doc["n"] = inst.n;
  doc["k"] = inst.k();
  json cons = json::array();
  for (const auto& c : inst.constraints) {
    cons.push_back({{"matrix", matrix_to_json(c.op.matrix())}, {"value", c.value}});
  }
  doc["constraints"] = std::move(cons);
  json kraus = json::array();
  for (const auto& k : inst.g_map.factors()) kraus.push_back(matrix_to_json(k));
  doc["kraus"] = std::move(kraus);
  json pinch = json::array();
  for (const auto& p : inst.z_map.projectors()) pinch.push_back(matrix_to_json(p));
  doc["pinching"] = std::move(pinch);
  if (inst.reduced_density) {
    doc["reduced_density"] = {{"rho_A", matrix_to_json(inst.reduced_density->rho_a.matrix())},
                              {"n_B", inst.reduced_density->n_b}};
  }
  return doc.dump(1);
}

ProblemInstance parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError(source + ": line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  const Reader rd(source);
  ProblemInstance inst;
  const json& label = rd.field(doc, "label", "$");
  if (!label.is_string()) rd.fail("$.label", "expected a string");
  inst.label = label.get<std::string>();
  inst.n = rd.integer(rd.field(doc, "n", "$"), "$.n");
  const Index k = rd.integer(rd.field(doc, "k", "$"), "$.k");

  const json& cons = rd.field(doc, "constraints", "$");
  if (!cons.is_array() || cons.empty()) rd.fail("$.constraints", "expected a non-empty array");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string p = "$.constraints[" + std::to_string(i) + "]";
    LinearConstraint c;
    c.op = rd.hermitian(rd.field(cons[i], "matrix", p), inst.n, p + ".matrix");
    c.value = rd.number(rd.field(cons[i], "value", p), p + ".value");
    inst.constraints.push_back(std::move(c));
  }

  const json& kraus = rd.field(doc, "kraus", "$");
  if (!kraus.is_array() || kraus.empty()) rd.fail("$.kraus", "expected a non-empty array");
  std::vector<CMatrix> factors;
  for (std::size_t j = 0; j < kraus.size(); ++j) {
    factors.push_back(rd.matrix(kraus[j], k, inst.n, "$.kraus[" + std::to_string(j) + "]"));
  }
  inst.g_map = KrausMap(std::move(factors));

  const json& pinch = rd.field(doc, "pinching", "$");
  if (!pinch.is_array() || pinch.empty()) rd.fail("$.pinching", "expected a non-empty array");
  std::vector<CMatrix> projectors;
  for (std::size_t j = 0; j < pinch.size(); ++j) {
    projectors.push_back(rd.matrix(pinch[j], k, k, "$.pinching[" + std::to_string(j) + "]"));
  }
  try {
    inst.z_map = PinchingMap(std::move(projectors));
  } catch (const Error& e) {
    rd.fail("$.pinching", e.what());
  }

  if (auto it = doc.find("reduced_density"); it != doc.end() && !it->is_null()) {
    ReducedDensity red;
    red.n_b = rd.integer(rd.field(*it, "n_B", "$.reduced_density"), "$.reduced_density.n_B");
    if (inst.n % red.n_b != 0) rd.fail("$.reduced_density.n_B", "does not divide n");
    red.rho_a = rd.hermitian(rd.field(*it, "rho_A", "$.reduced_density"), inst.n / red.n_b,
                             "$.reduced_density.rho_A");
    inst.reduced_density = std::move(red);
  }

  try {
    validate_instance(inst);
  } catch (const InstanceError& e) {
    throw InstanceError(source + ": " + e.what());
  }
  return inst;
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InstanceError(path + ": cannot open file for writing");
  out << dump_instance(inst) << '\n';
  if (!out) throw InstanceError(path + ": write failed");
}

}  // namespace qkdfr
