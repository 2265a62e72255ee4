#pragma once

#include <map>
#include <string>
#include <vector>

namespace carnot {

// A numerically verified inequality or identity: both sides with error bars,
// the slack, and a verdict that only reads "violated" when the slack exceeds
// the combined error budget.
struct InequalityReport {
  enum class Verdict { Holds, ViolatedWithinError, Violated };

  std::string check;     // operation name
  std::string equation;  // which displayed relation is being verified
  std::string group, norm, surface;
  bool identity = false;  // two-sided identity rather than one-sided bound
  double lhs = 0.0, rhs = 0.0;
  double lhs_err = 0.0, rhs_err = 0.0;
  double tolerance = 0.0;  // extra structural tolerance (grids, stencils)
  Verdict verdict = Verdict::Holds;
  std::map<std::string, double> constants;
  std::vector<std::string> warnings;
  std::string note;

  double slack() const { return rhs - lhs; }
  double error_budget() const { return lhs_err + rhs_err + tolerance; }

  const char* verdict_name() const {
    switch (verdict) {
      case Verdict::Holds: return "holds";
      case Verdict::ViolatedWithinError: return "violated-within-error";
      default: return "violated";
    }
  }

  // One-sided bound lhs <= rhs.
  void judge_bound() {
    double s = slack();
    if (s >= 0.0)
      verdict = Verdict::Holds;
    else if (s >= -error_budget())
      verdict = Verdict::ViolatedWithinError;
    else
      verdict = Verdict::Violated;
  }
  // Identity lhs = rhs within the error budget.
  void judge_identity() {
    identity = true;
    double d = std::abs(lhs - rhs);
    if (d <= error_budget())
      verdict = Verdict::Holds;
    else if (d <= 3.0 * error_budget())
      verdict = Verdict::ViolatedWithinError;
    else
      verdict = Verdict::Violated;
  }
};

// Plot-ready scan output (one CSV file per table).
struct ScanTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckResult {
  std::string name;
  std::vector<InequalityReport> reports;
  std::vector<ScanTable> tables;
  std::map<std::string, double> extra;  // scalar outputs (kappa, quotients, ...)
  std::string note;

  bool any_violated() const {
    for (const auto& r : reports)
      if (r.verdict == InequalityReport::Verdict::Violated) return true;
    return false;
  }
};

}  // namespace carnot
