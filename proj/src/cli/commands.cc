#include "sagerel/cli/commands.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sagerel/cli/problem_file.h"
#include "sagerel/extract.h"
#include "sagerel/hierarchy.h"
#include "sagerel/sage.h"

namespace sagerel::cli {

using nlohmann::json;

namespace {

std::string Digits17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json VectorJson(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json MatrixJson(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(VectorJson(m.row(i).transpose()));
  return a;
}

json CertificateJson(const SageCertificate& cert) {
  json parts = json::array();
  json nus = json::array();
  for (int i = 0; i < cert.size(); ++i) {
    parts.push_back(VectorJson(cert.parts[i]));
    nus.push_back(VectorJson(cert.nus[i]));
  }
  return {{"exponents", MatrixJson(cert.exponents)}, {"parts", parts}, {"nus", nus}};
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string VectorText(const Eigen::VectorXd& v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << "(";
  for (int i = 0; i < v.size(); ++i) ss << (i ? ", " : "") << v(i);
  ss << ")";
  return ss.str();
}

bool WriteFile(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream f(path);
  f << text;
  f.close();
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

std::string ToVerdictString(SageVerdict v) {
  switch (v) {
    case SageVerdict::kSage:
      return "SAGE";
    case SageVerdict::kNotSage:
      return "NOT-SAGE";
    case SageVerdict::kIndeterminate:
      return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

int VerdictExit(SageVerdict v) {
  switch (v) {
    case SageVerdict::kSage:
      return kExitOk;
    case SageVerdict::kNotSage:
      return kExitNegative;
    case SageVerdict::kIndeterminate:
      return kExitSolver;
  }
  return kExitSolver;
}

Signomial RegionSignomial(double delta, double a, double b) {
  Eigen::MatrixXd e(4, 2);
  e << 1, 0, 0, 1, delta, 1 - delta, 1 - delta, delta;
  Eigen::VectorXd c(4);
  c << 1, 1, -a, -b;
  return Signomial(e, c);
}

int GridCount(double lo, double hi, double step) {
  return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

}  // namespace

conic::SolverOptions CommonFlags::Solver() const {
  conic::SolverOptions o;
  o.feas_tol = solver_tol;
  o.gap_tol = solver_tol;
  o.infeas_tol = solver_tol;
  o.max_iters = max_iters;
  return o;
}

int CmdCertify(const std::string& path, const CommonFlags& flags, std::ostream& out,
               std::ostream& err) {
  ProblemFile pf;
  try {
    pf = ReadProblemFile(path);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  if (!pf.constraints.empty() || pf.box) {
    err << "error: certify takes a problem without constraints or box\n";
    return kExitParse;
  }
  const Signomial& f = pf.objective;
  SageResult r;
  std::optional<double> margin;
  try {
    r = SageCertify(f, flags.Solver());
    margin = SageMargin(f, flags.Solver());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  const std::string verdict = ToVerdictString(r.verdict);

  if (!flags.emit.empty() && r.certificate) {
    if (!WriteFile(flags.emit, CertificateJson(*r.certificate).dump(2) + "\n", err)) {
      return kExitParse;
    }
  }
  if (flags.json) {
    json doc = {{"verdict", verdict},
                {"solver_status", conic::ToString(r.status)},
                {"margin", margin ? NumberOrNull(*margin) : json(nullptr)}};
    if (r.certificate) doc["certificate"] = CertificateJson(*r.certificate);
    if (r.verdict == SageVerdict::kNotSage) doc["dual_ray"] = VectorJson(r.dual_ray);
    out << doc.dump(2) << "\n";
  } else if (!flags.quiet) {
    out << std::setprecision(10);
    out << "verdict: " << verdict << "\n";
    out << "margin: " << (margin ? Digits17(*margin) : "n/a") << "\n";
    if (r.certificate) {
      const SageCertificate& cert = *r.certificate;
      for (int i = 0; i < cert.size(); ++i) {
        const double mass = -cert.nus[i](i);
        if (!(mass > 1e-9)) continue;
        Eigen::VectorXd weights(cert.size() - 1);
        for (int j = 0, k = 0; j < cert.size(); ++j) {
          if (j != i) weights(k++) = cert.nus[i](j) / mass;
        }
        out << "block " << i << " alpha=" << VectorText(cert.exponents.row(i).transpose())
            << " c=" << cert.parts[i](i) << " nu=" << VectorText(weights) << "\n";
      }
    }
    if (r.verdict == SageVerdict::kNotSage) out << "dual_ray: " << VectorText(r.dual_ray) << "\n";
  }
  return VerdictExit(r.verdict);
}

int CmdMinimize(const std::string& path, int p, std::optional<int> q, const CommonFlags& flags,
                std::ostream& out, std::ostream& err) {
  ProblemFile pf;
  try {
    pf = ReadProblemFile(path);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  const SignomialProgram sp = pf.Program();
  const bool constrained = !sp.constraints.empty();
  const int level_q = q.value_or(constrained ? 1 : 0);
  if (p < 0 || level_q < 0 || (constrained && level_q < 1)) {
    err << "error: require p >= 0, and q >= 1 when the problem has constraints\n";
    return kExitParse;
  }
  HierarchyOptions ho;
  ho.solver = flags.Solver();
  RelaxationResult res;
  try {
    res = constrained ? ConstrainedBound(sp, p, level_q, ho)
                      : UnconstrainedBound(sp.objective, p, ho);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  ExtractOptions eo;
  eo.tight_tol = flags.tight_tol;
  const TightnessReport report = ReportTightness(res, sp, eo);

  if (!flags.emit.empty() && res.certificate) {
    json doc = {{"p", p},
                {"lower_bound", res.lower_bound},
                {"lifted_support", MatrixJson(res.lifted_support)},
                {"lifted_coeffs", VectorJson(res.lifted_coeffs)},
                {"certificate", CertificateJson(*res.certificate)}};
    if (constrained) {
      doc["q"] = level_q;
      json mult = json::array();
      for (const auto& s : res.multipliers) {
        mult.push_back({{"exponents", MatrixJson(s.exponents())}, {"coeffs", VectorJson(s.coeffs())}});
      }
      doc["multipliers"] = mult;
    }
    if (!WriteFile(flags.emit, doc.dump(2) + "\n", err)) return kExitParse;
  }

  const bool extracted = report.extraction.has_value();
  if (flags.json) {
    json doc = {{"status", ToString(res.status)},
                {"solver_status", conic::ToString(res.solver_status)},
                {"p", p},
                {"lower_bound", NumberOrNull(res.lower_bound)},
                {"verdict", ToString(report.verdict)},
                {"iterations", res.iterations}};
    if (constrained) doc["q"] = level_q;
    if (extracted) {
      doc["upper_bound"] = report.upper_bound;
      doc["gap"] = report.gap;
      doc["x"] = VectorJson(report.extraction->x);
      doc["residual"] = report.residual;
      doc["max_violation"] = report.max_violation;
    }
    if (!report.note.empty()) doc["note"] = report.note;
    out << doc.dump(2) << "\n";
  } else if (!flags.quiet) {
    out << std::setprecision(10);
    out << "status: " << ToString(res.status) << "\n";
    out << "level: p=" << p;
    if (constrained) out << " q=" << level_q;
    out << "\n";
    out << "lower_bound: " << res.lower_bound << "\n";
    if (extracted) {
      out << "upper_bound: " << report.upper_bound << "\n";
      out << "x: " << VectorText(report.extraction->x) << "\n";
      out << "gap: " << report.gap << "\n";
      out << "residual: " << report.residual << "\n";
    }
    out << "verdict: " << ToString(report.verdict) << "\n";
    if (!report.note.empty()) out << "note: " << report.note << "\n";
  }
  switch (res.status) {
    case BoundStatus::kOptimal:
    case BoundStatus::kPlusInfinity:
      return kExitOk;
    case BoundStatus::kNoBound:
    case BoundStatus::kMinusInfinity:
      return kExitNegative;
    case BoundStatus::kIndeterminate:
      return kExitSolver;
  }
  return kExitSolver;
}

int CmdRegion(const RegionSpec& spec, const CommonFlags& flags, std::ostream& out,
              std::ostream& err) {
  if (!(spec.step > 0.0) || !(spec.amax >= spec.amin) || !(spec.bmax >= spec.bmin) ||
      spec.out.empty() || !std::isfinite(spec.delta)) {
    err << "error: require step > 0, amin <= amax, bmin <= bmax and --out\n";
    return kExitParse;
  }
  const int na = GridCount(spec.amin, spec.amax, spec.step);
  const int nb = GridCount(spec.bmin, spec.bmax, spec.step);
  const std::size_t total = static_cast<std::size_t>(na) * nb;

  struct Cell {
    SageVerdict verdict = SageVerdict::kIndeterminate;
    double margin = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Cell> cells(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const conic::SolverOptions opts = flags.Solver();
  auto work = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        const double a = spec.amin + spec.step * static_cast<double>(k / nb);
        const double b = spec.bmin + spec.step * static_cast<double>(k % nb);
        const Signomial f = RegionSignomial(spec.delta, a, b);
        cells[k].verdict = SageCertify(f, opts).verdict;
        if (const auto m = SageMargin(f, opts)) cells[k].margin = *m;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  int threads = flags.threads > 0 ? flags.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
    }
    return kExitSolver;
  }

  const std::string tmp = spec.out + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << "a,b,verdict,margin\n";
    for (std::size_t k = 0; k < total; ++k) {
      const double a = spec.amin + spec.step * static_cast<double>(k / nb);
      const double b = spec.bmin + spec.step * static_cast<double>(k % nb);
      f << Digits17(a) << "," << Digits17(b) << "," << ToVerdictString(cells[k].verdict) << ","
        << Digits17(cells[k].margin) << "\n";
    }
    f.close();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      err << "error: cannot write " << spec.out << "\n";
      return kExitParse;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, spec.out, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    err << "error: cannot move output into " << spec.out << "\n";
    return kExitParse;
  }

  int sage = 0, not_sage = 0, indeterminate = 0;
  for (const Cell& c : cells) {
    sage += c.verdict == SageVerdict::kSage;
    not_sage += c.verdict == SageVerdict::kNotSage;
    indeterminate += c.verdict == SageVerdict::kIndeterminate;
  }
  if (flags.json) {
    out << json{{"out", spec.out},
                {"rows", total},
                {"sage", sage},
                {"not_sage", not_sage},
                {"indeterminate", indeterminate}}
               .dump(2)
        << "\n";
  } else if (!flags.quiet) {
    out << "wrote " << total << " rows to " << spec.out << " (SAGE " << sage << ", NOT-SAGE "
        << not_sage << ", INDETERMINATE " << indeterminate << ")\n";
  }
  return kExitOk;
}

int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SAGE lower bounds for signomial programs"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonFlags flags;
  app.add_option("--solver-tol", flags.solver_tol, "Solver feasibility and gap tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iters", flags.max_iters, "Interior-point iteration limit")
      ->check(CLI::PositiveNumber);
  app.add_option("--tight-tol", flags.tight_tol, "Gap below which a bound is reported tight")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--emit", flags.emit, "Write the certificate as JSON to this path");
  app.add_flag("--quiet", flags.quiet, "Print nothing on success");
  app.add_option("--threads", flags.threads, "Worker threads for region scans (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--json", flags.json, "Print the report as JSON");

  std::string path;
  auto* certify = app.add_subcommand("certify", "Decide SAGE membership of the objective");
  certify->add_option("problem", path, "Problem file")->required();

  int p = 0;
  std::optional<int> q;
  auto* minimize = app.add_subcommand("minimize", "Lower-bound the problem's minimum");
  minimize->add_option("problem", path, "Problem file")->required();
  minimize->add_option("--p", p, "Multiplier level")->check(CLI::NonNegativeNumber);
  minimize->add_option("--q", q, "Constraint product level");

  RegionSpec region;
  auto* scan = app.add_subcommand("region", "Scan SAGE membership of f_{a,b} over a grid");
  scan->add_option("--delta", region.delta, "Exponent mixing parameter");
  scan->add_option("--amin", region.amin, "Smallest a (default 0)");
  scan->add_option("--amax", region.amax, "Largest a (default 2)");
  scan->add_option("--bmin", region.bmin, "Smallest b (default 0)");
  scan->add_option("--bmax", region.bmax, "Largest b (default 2)");
  scan->add_option("--step", region.step, "Grid spacing in a and b (default 0.05)");
  scan->add_option("--out", region.out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }
  if (certify->parsed()) return CmdCertify(path, flags, out, err);
  if (minimize->parsed()) return CmdMinimize(path, p, q, flags, out, err);
  return CmdRegion(region, flags, out, err);
}

}  // namespace sagerel::cli
