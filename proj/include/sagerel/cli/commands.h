#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "sagerel/conic/solver.h"

namespace sagerel::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitNegative = 1,
  kExitParse = 2,
  kExitSolver = 3,
};

struct CommonFlags {
  double solver_tol = 1e-8;
  int max_iters = 200;
  double tight_tol = 1e-4;
  /// Path for the certificate document; empty disables.
  std::string emit;
  bool quiet = false;
  /// Worker threads for region scans; 0 uses the hardware concurrency.
  int threads = 0;
  bool json = false;

  conic::SolverOptions Solver() const;
};

/// SAGE membership of the problem's objective.
int CmdCertify(const std::string& path, const CommonFlags& flags, std::ostream& out,
               std::ostream& err);

/// Lower bound at level p (and q when the problem has constraints, default
/// 1), with extraction and tightness verdict.
int CmdMinimize(const std::string& path, int p, std::optional<int> q, const CommonFlags& flags,
                std::ostream& out, std::ostream& err);

/// Grid over f_{a,b} = e^{x1} + e^{x2} − a·e^{δx1+(1−δ)x2} − b·e^{(1−δ)x1+δx2}.
struct RegionSpec {
  double delta = 0.7853981633974483;
  double amin = 0.0;
  double amax = 2.0;
  double bmin = 0.0;
  double bmax = 2.0;
  double step = 0.05;
  std::string out;
};

/// Writes `a,b,verdict,margin` rows (a outer, b inner) to spec.out through a
/// temporary file renamed into place.
int CmdRegion(const RegionSpec& spec, const CommonFlags& flags, std::ostream& out,
              std::ostream& err);

/// Parses argv and dispatches to a command.
int RunCli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sagerel::cli
