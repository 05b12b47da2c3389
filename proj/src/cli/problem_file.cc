#include "sagerel/cli/problem_file.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sagerel::cli {

using nlohmann::json;

namespace {

double FiniteNumber(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where + ": number is not finite");
  return v;
}

Signomial ParseSignomial(const json& j, int n, const std::string& where) {
  if (!j.is_object() || !j.contains("terms") || !j.at("terms").is_array()) {
    throw ParseError(where + ": expected an object with a \"terms\" array");
  }
  const json& terms = j.at("terms");
  if (terms.empty()) throw ParseError(where + ": no terms");
  Eigen::MatrixXd a(terms.size(), n);
  Eigen::VectorXd c(terms.size());
  for (size_t t = 0; t < terms.size(); ++t) {
    const std::string at = where + ".terms[" + std::to_string(t) + "]";
    const json& term = terms[t];
    if (!term.is_object() || !term.contains("c") || !term.contains("alpha")) {
      throw ParseError(at + ": expected {\"c\": …, \"alpha\": […]}");
    }
    c(t) = FiniteNumber(term.at("c"), at + ".c");
    const json& alpha = term.at("alpha");
    if (!alpha.is_array() || static_cast<int>(alpha.size()) != n) {
      throw ParseError(at + ".alpha: expected " + std::to_string(n) + " numbers");
    }
    for (int k = 0; k < n; ++k) a(t, k) = FiniteNumber(alpha[k], at + ".alpha");
  }
  return Signomial(a, c);
}

json SignomialToJson(const Signomial& f) {
  json terms = json::array();
  for (int j = 0; j < f.num_terms(); ++j) {
    json alpha = json::array();
    for (int k = 0; k < f.num_vars(); ++k) alpha.push_back(f.exponents()(j, k));
    terms.push_back({{"c", f.coeff(j)}, {"alpha", alpha}});
  }
  return {{"terms", terms}};
}

}  // namespace

SignomialProgram ProblemFile::Program() const {
  SignomialProgram sp{objective, constraints};
  if (box) sp = AddBoxConstraints(sp, box->upper, box->lower);
  return sp;
}

bool ProblemFile::operator==(const ProblemFile& other) const {
  return n == other.n && objective == other.objective && constraints == other.constraints &&
         box == other.box;
}

ProblemFile ParseProblem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("top level must be an object");
  ProblemFile out;
  if (!doc.contains("n") || !doc.at("n").is_number_integer() || doc.at("n").get<int>() < 1) {
    throw ParseError("\"n\" must be a positive integer");
  }
  out.n = doc.at("n").get<int>();
  if (!doc.contains("objective")) throw ParseError("missing \"objective\"");
  out.objective = ParseSignomial(doc.at("objective"), out.n, "objective");
  if (doc.contains("constraints")) {
    const json& cons = doc.at("constraints");
    if (!cons.is_array()) throw ParseError("\"constraints\" must be an array");
    for (size_t i = 0; i < cons.size(); ++i) {
      out.constraints.push_back(
          ParseSignomial(cons[i], out.n, "constraints[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("box")) {
    const json& box = doc.at("box");
    if (!box.is_object() || !box.contains("U") || !box.contains("L")) {
      throw ParseError("\"box\" must be {\"U\": …, \"L\": …}");
    }
    const BoxSpec spec{FiniteNumber(box.at("U"), "box.U"), FiniteNumber(box.at("L"), "box.L")};
    if (!(spec.lower > 0.0) || !(spec.upper >= spec.lower)) {
      throw ParseError("box requires 0 < L <= U");
    }
    out.box = spec;
  }
  return out;
}

ProblemFile ReadProblemFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseProblem(ss.str());
}

std::string SerializeProblem(const ProblemFile& problem) {
  json doc;
  doc["n"] = problem.n;
  doc["objective"] = SignomialToJson(problem.objective);
  if (!problem.constraints.empty()) {
    json cons = json::array();
    for (const auto& g : problem.constraints) cons.push_back(SignomialToJson(g));
    doc["constraints"] = cons;
  }
  if (problem.box) doc["box"] = {{"U", problem.box->upper}, {"L", problem.box->lower}};
  return doc.dump(2) + "\n";
}

}  // namespace sagerel::cli
