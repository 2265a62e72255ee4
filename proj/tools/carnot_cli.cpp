// Command-line driver: runs named checks from a JSON config and writes JSON
// reports plus CSV scan tables. Exit codes: 0 all verdicts hold, 1 bad
// configuration or capability error, 2 some verdict violated.
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "carnot/parallel.hpp"
#include "carnot/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"carnot - Carnot-group hypersurface geometry checks"};

  std::string config_path;
  std::string out_dir;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  bool verbose = false;

  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--workers", workers, "worker threads for scan-level parallelism");
  app.add_flag("--verbose", verbose, "progress notes on stderr");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("CARNOT_WORKERS")) {
    try {
      workers = std::stoi(env);
    } catch (...) {
      std::cerr << "carnot: ignoring malformed CARNOT_WORKERS\n";
    }
  }
  carnot::set_worker_count(std::max(1, workers));

  try {
    carnot::Runner runner = carnot::Runner::from_file(config_path);
    if (!out_dir.empty()) runner.set_output_dir(out_dir);
    runner.set_verbose(verbose);
    int code = runner.run();
    if (verbose) std::cerr << "[carnot] wrote " << runner.output_dir() << "\n";
    return code;
  } catch (const carnot::Error& e) {
    std::cerr << "carnot: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "carnot: internal error: " << e.what() << "\n";
    return 1;
  }
}
