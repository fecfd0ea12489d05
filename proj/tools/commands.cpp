#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "mdpode/errors.hpp"
#include "mdpode/model_io.hpp"
#include "mdpode/ode_engine.hpp"

namespace mdpode::cli {

namespace {

using Index = Eigen::Index;

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::stderr_logger_st("mdp-ode");
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("MDP_ODE_LOG");
  const std::string level = env ? env : "off";
  if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::off);
  }
  return logger;
}

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = make_logger();
  return *logger;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

// Loads a model, translating failures into exit codes. Returns nullopt and
// sets `code` on failure.
std::optional<KLModel> load(const std::string& path, std::ostream& err, int& code) {
  try {
    return load_model_json(path);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    code = kIo;
  } catch (const Error& e) {
    err << "error: " << path << ": " << e.what() << "\n";
    code = kValidation;
  }
  return std::nullopt;
}

void write_sweep_csv(const ValueTrajectory& traj, const KLModel& model, bool emit_policy,
                     std::ostream& os) {
  const std::size_t d = model.size();
  const std::size_t du = model.space().size_u();
  os << "zeta,eta,eta_quadrature,residual_sup";
  for (std::size_t x = 0; x < d; ++x) os << ",h_" << x;
  for (std::size_t x = 0; x < d; ++x) os << ",pi_" << x;
  if (emit_policy) {
    for (std::size_t x = 0; x < d; ++x) {
      for (std::size_t u = 0; u < du; ++u) os << ",R_" << x << "_" << u;
    }
  }
  os << "\n";
  for (const auto& s : traj.samples) {
    os << num(s.zeta) << ',' << num(s.eta) << ',' << num(s.eta_quadrature) << ','
       << num(s.residual_sup);
    for (Index x = 0; x < s.h.size(); ++x) os << ',' << num(s.h(x));
    for (Index x = 0; x < s.pi.size(); ++x) os << ',' << num(s.pi(x));
    if (emit_policy) {
      for (Index x = 0; x < s.policy.rows(); ++x) {
        for (Index u = 0; u < s.policy.cols(); ++u) os << ',' << num(s.policy(x, u));
      }
    }
    os << "\n";
  }
}

}  // namespace

int cmd_validate(const std::string& model_path, std::ostream& out, std::ostream& err) {
  int code = kOk;
  const auto model = load(model_path, err, code);
  if (!model) return code;
  const Pmf pi0 = invariant_pmf(model->p0());
  out << "d=" << model->size() << " d_u=" << model->space().size_u()
      << " d_n=" << model->space().size_n() << "\n";
  out << "n0=" << model->n0() << "\n";
  out << "reference_state=" << model->space().label(model->reference_state()) << "\n";
  out << "pi0:";
  for (std::size_t x = 0; x < model->size(); ++x) {
    out << " " << model->space().label(x) << "=" << fmt::format("{:.6g}", pi0(x));
  }
  out << "\n";
  return kOk;
}

int cmd_sweep(const SweepConfig& config, std::ostream& out, std::ostream& err) {
  if (!(config.zeta_min <= config.zeta_max) || !(config.step > 0.0)) {
    err << "error: sweep needs zeta_min <= zeta_max and step > 0\n";
    return kValidation;
  }
  int code = kOk;
  const auto model = load(config.model_path, err, code);
  if (!model) return code;

  IntegratorSettings settings;
  settings.step = config.step;
  settings.polish = config.polish;

  ValueTrajectory traj;
  try {
    KlSpan span{config.zeta_min, config.zeta_max, std::nullopt};
    if (config.zeta_min != 0.0) {
      // Only h = 0 at zeta = 0 is known exactly; continue from there.
      log().info("seeding from zeta = 0 to {}", config.zeta_min);
      span.h_start = integrate_kl(*model, KlSpan{0.0, config.zeta_min, std::nullopt}, settings)
                         .samples.back()
                         .h;
    }
    traj = integrate_kl(*model, span, settings);
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << "\n";
    err << "last good zeta: " << num(e.last_good_zeta()) << "\n";
    return kIntegration;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIntegration;
  }

  double worst_eta_gap = 0.0;
  double worst_residual = 0.0;
  for (const auto& s : traj.samples) {
    worst_eta_gap = std::max(worst_eta_gap, std::abs(s.eta - s.eta_quadrature));
    worst_residual = std::max(worst_residual, s.residual_sup);
  }
  log().info("{} samples, max |eta - eta_quadrature| = {:.3g}, max residual = {:.3g}",
             traj.samples.size(), worst_eta_gap, worst_residual);

  std::ofstream csv(config.output_path, std::ios::binary | std::ios::trunc);
  if (!csv) {
    err << "error: cannot write '" << config.output_path << "'\n";
    return kIo;
  }
  write_sweep_csv(traj, *model, config.emit_policy, csv);
  csv.close();
  if (!csv) {
    err << "error: failed writing '" << config.output_path << "'\n";
    return kIo;
  }

  const auto& last = traj.samples.back();
  out << "zeta=" << num(last.zeta) << " eta=" << num(last.eta)
      << " residual=" << fmt::format("{:.3g}", last.residual_sup) << "\n";
  return kOk;
}

int cmd_oracle(const std::string& model_path, double zeta, double tol, std::ostream& out,
               std::ostream& err) {
  if (!(tol >= 0.0)) {
    err << "error: tolerance must be nonnegative\n";
    return kValidation;
  }
  int code = kOk;
  const auto model = load(model_path, err, code);
  if (!model) return code;

  NewtonOptions options;
  options.tol = std::min(options.tol, tol);
  try {
    const FixedPointSolution sol =
        newton_solve(zeta, Vector::Zero(static_cast<Index>(model->size())), *model, options);
    const double residual = aroe_residual(sol, zeta, *model);
    log().debug("eta discrepancy between reference coordinate and average: {:.3g}",
                sol.eta_discrepancy);
    out << "h*:";
    for (std::size_t x = 0; x < model->size(); ++x) {
      out << " " << model->space().label(x) << "=" << num(sol.h_star(static_cast<Index>(x)));
    }
    out << "\n";
    out << "eta*=" << num(sol.eta_star) << "\n";
    out << "iterations=" << sol.iterations << "\n";
    out << "aroe_residual=" << fmt::format("{:.3g}", residual) << "\n";
    if (!(residual <= tol)) {
      err << "error: optimality residual " << residual << " exceeds tolerance " << tol << "\n";
      return kTolerance;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kTolerance;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kTolerance;
  }
  return kOk;
}

int cmd_brockett(double zeta_max, double step, std::ostream& out, std::ostream& err) {
  const GeneratorModel model = brockett_example();
  ValueTrajectory traj;
  try {
    traj = integrate_brockett(model, zeta_max, step);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIntegration;
  }

  double worst_phi = 0.0;
  double worst_gamma = 0.0;
  out << "zeta,phi1,gamma\n";
  for (const auto& s : traj.samples) {
    const double root = std::sqrt(9.0 + 6.0 * s.zeta);
    const double phi1 = s.policy(0, 0);
    worst_phi = std::max(worst_phi, std::abs(phi1 - (root - 3.0)));
    worst_gamma = std::max(worst_gamma, std::abs(s.eta - (2.0 * root - 6.0)));
    out << num(s.zeta) << ',' << num(phi1) << ',' << num(s.eta) << "\n";
  }
  out << "max_delta_phi=" << fmt::format("{:.3g}", worst_phi)
      << " max_delta_gamma=" << fmt::format("{:.3g}", worst_gamma) << "\n";
  if (!(std::max(worst_phi, worst_gamma) <= 1e-6)) {
    err << "error: closed-form mismatch exceeds 1e-6\n";
    return kTolerance;
  }
  return kOk;
}

int cmd_lqr(double alpha, double zeta_max, double step, const std::optional<std::string>& csv_path,
            std::ostream& out, std::ostream& err) {
  std::vector<LqrSample> samples;
  double reference = 0.0;
  try {
    const LqrModel model(alpha);
    samples = lqr_coefficient_ode(model, zeta_max, step);
    reference = riccati_oracle(model, samples.back().zeta);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  std::ofstream file;
  if (csv_path) {
    file.open(*csv_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write '" << *csv_path << "'\n";
      return kIo;
    }
  }
  std::ostream& table = csv_path ? static_cast<std::ostream&>(file) : out;
  table << "zeta,b,k\n";
  for (const auto& s : samples) table << num(s.zeta) << ',' << num(s.b) << ',' << num(s.k) << "\n";

  const double delta = std::abs(samples.back().b - reference);
  out << "endpoint b=" << num(samples.back().b) << " riccati=" << num(reference)
      << " delta=" << fmt::format("{:.3g}", delta) << "\n";
  if (!(delta <= 1e-6)) {
    err << "error: ODE endpoint differs from the Riccati fixed point by " << delta << "\n";
    return kTolerance;
  }
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Solve families of average-reward MDPs by integrating the value-function ODE"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a model file and summarize it");
  validate->add_option("model", validate_path, "Model JSON file")->required();

  SweepConfig sweep_cfg;
  bool no_polish = false;
  auto* sweep = app.add_subcommand("sweep", "Integrate the value ODE over a zeta range to CSV");
  sweep->add_option("--model", sweep_cfg.model_path, "Model JSON file")->required();
  sweep->add_option("--zeta-min", sweep_cfg.zeta_min, "Start of the zeta range")->required();
  sweep->add_option("--zeta-max", sweep_cfg.zeta_max, "End of the zeta range")->required();
  sweep->add_option("--step", sweep_cfg.step, "RK4 step")->required();
  sweep->add_flag("--no-polish", no_polish, "Skip Newton polishing after each step");
  sweep->add_flag("--emit-policy", sweep_cfg.emit_policy, "Append control matrix columns");
  sweep->add_option("--out", sweep_cfg.output_path, "Output CSV path")->required();

  std::string oracle_path;
  double oracle_zeta = 0.0;
  double oracle_tol = 1e-10;
  auto* oracle = app.add_subcommand("oracle", "Solve one zeta directly by Newton's method");
  oracle->add_option("--model", oracle_path, "Model JSON file")->required();
  oracle->add_option("--zeta", oracle_zeta, "Parameter value")->required();
  oracle->add_option("--tol", oracle_tol, "Optimality residual tolerance")->capture_default_str();

  double brockett_zeta = 2.0;
  double brockett_step = 1e-3;
  auto* brockett = app.add_subcommand("brockett", "Reproduce the three-state generator example");
  brockett->add_option("--zeta-max", brockett_zeta, "End of the zeta range")->capture_default_str();
  brockett->add_option("--step", brockett_step, "RK4 step")->capture_default_str();

  double lqr_alpha = 0.95;
  double lqr_zeta = 1.0;
  double lqr_step = 1e-3;
  std::string lqr_out;
  auto* lqr = app.add_subcommand("lqr", "Integrate the scalar linear-quadratic coefficient ODE");
  lqr->add_option("--alpha", lqr_alpha, "Open-loop gain in (0,1)")->capture_default_str();
  lqr->add_option("--zeta-max", lqr_zeta, "End of the zeta range")->capture_default_str();
  lqr->add_option("--step", lqr_step, "RK4 step")->capture_default_str();
  lqr->add_option("--out", lqr_out, "Write the (zeta, b, k) table to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (*validate) return cmd_validate(validate_path, std::cout, std::cerr);
  if (*sweep) {
    sweep_cfg.polish = !no_polish;
    return cmd_sweep(sweep_cfg, std::cout, std::cerr);
  }
  if (*oracle) return cmd_oracle(oracle_path, oracle_zeta, oracle_tol, std::cout, std::cerr);
  if (*brockett) return cmd_brockett(brockett_zeta, brockett_step, std::cout, std::cerr);
  if (*lqr) {
    return cmd_lqr(lqr_alpha, lqr_zeta, lqr_step,
                   lqr_out.empty() ? std::nullopt : std::optional<std::string>(lqr_out),
                   std::cout, std::cerr);
  }
  return kValidation;
}

}  // namespace mdpode::cli
