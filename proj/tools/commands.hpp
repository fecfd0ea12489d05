#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace mdpode::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kIo = 3,
  kIntegration = 4,
  kTolerance = 5,
};

struct SweepConfig {
  std::string model_path;
  double zeta_min = 0.0;
  double zeta_max = 1.0;
  double step = 1e-3;
  bool polish = true;
  std::string output_path;
  bool emit_policy = false;
};

int cmd_validate(const std::string& model_path, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle(const std::string& model_path, double zeta, double tol, std::ostream& out,
               std::ostream& err);
int cmd_brockett(double zeta_max, double step, std::ostream& out, std::ostream& err);
int cmd_lqr(double alpha, double zeta_max, double step, const std::optional<std::string>& csv_path,
            std::ostream& out, std::ostream& err);

// Parses argv and dispatches. Reads MDP_ODE_LOG for diagnostic verbosity.
int run(int argc, char** argv);

}  // namespace mdpode::cli
