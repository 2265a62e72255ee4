#pragma once

#include <filesystem>
#include <optional>

#include "carnot/inequalities.hpp"
#include "carnot/presets.hpp"

namespace carnot {

// A fully resolved run: group, norm, surface, checks with parameters,
// quadrature controls and output destination. Construction validates every
// name and parameter; nothing is written until execution.
class Runner {
 public:
  static Runner from_file(const std::string& config_path);
  static Runner from_json_text(const std::string& text);

  void set_output_dir(const std::string& dir);
  void set_verbose(bool v) { verbose_ = v; }

  // Executes all checks in order and writes one JSON report per check plus
  // CSV scan tables and a manifest. Returns the process exit code:
  // 0 = no violated verdict, 2 = some check violated (1 is reserved for
  // configuration/capability errors, thrown as exceptions before output).
  int run();

  const std::string& output_dir() const { return out_dir_; }

 private:
  Runner() = default;
  void resolve(const class RunSpec& spec);

  struct CheckPlan {
    std::string name;
    std::function<CheckResult()> execute;
  };

  std::shared_ptr<StratifiedAlgebra> alg_;
  std::shared_ptr<HomogeneousNorm> norm_;
  std::shared_ptr<LabContext> ctx_;
  GraphSurface surface_;
  QuadratureSpec spec_;
  std::vector<CheckPlan> plans_;
  std::string out_dir_ = "out";
  std::vector<std::string> formats_ = {"json", "csv"};
  bool verbose_ = false;
  std::string config_echo_;
};

}  // namespace carnot
