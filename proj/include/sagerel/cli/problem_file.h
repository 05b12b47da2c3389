#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sagerel/hierarchy.h"
#include "sagerel/signomial.h"

namespace sagerel::cli {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoxSpec {
  double upper = 0.0;
  double lower = 0.0;

  bool operator==(const BoxSpec&) const = default;
};

/// A problem document:
///   {"n": int,
///    "objective": {"terms": [{"c": float, "alpha": [float × n]}, …]},
///    "constraints": [{"terms": […]}, …],      (optional, g_i(x) ≥ 0)
///    "box": {"U": float, "L": float}}         (optional)
struct ProblemFile {
  int n = 0;
  Signomial objective = Signomial::Constant(1, 0.0);
  std::vector<Signomial> constraints;
  std::optional<BoxSpec> box;

  /// The program to bound, with box constraints appended when present.
  SignomialProgram Program() const;

  bool operator==(const ProblemFile& other) const;
};

/// Throws ParseError on malformed JSON or schema violations.
ProblemFile ParseProblem(std::string_view text);
ProblemFile ReadProblemFile(const std::string& path);

/// JSON text with numbers in shortest round-trip form.
std::string SerializeProblem(const ProblemFile& problem);

}  // namespace sagerel::cli
