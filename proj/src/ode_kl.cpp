#include <cmath>
#include <sstream>

#include "mdpode/errors.hpp"
#include "mdpode/ode_engine.hpp"
#include "grid.hpp"

namespace mdpode {

namespace {

using detail::step_count;
using Index = Eigen::Index;

double sup_norm(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

KlField vector_field_kl(const Vector& h, const KLModel& model) {
  TwistResult tw = twist(h, model);
  Pmf pi = invariant_pmf(tw.p_h);
  const FundamentalMatrix fm = fundamental_matrix(tw.p_h, pi);
  PoissonSolution sol = poisson_solve(fm, model.utility(), model.reference_state());
  return KlField{std::move(sol.h), sol.mean, std::move(tw), std::move(pi)};
}

ValueTrajectory integrate_kl(const KLModel& model, const KlSpan& span,
                             const IntegratorSettings& settings) {
  const auto ref = static_cast<Index>(model.reference_state());
  const std::size_t n = step_count(span.zeta_end - span.zeta_start, settings.step);
  const double dz = n == 0 ? 0.0 : (span.zeta_end - span.zeta_start) / static_cast<double>(n);

  Vector h = span.h_start.value_or(Vector::Zero(static_cast<Index>(model.size())));
  if (static_cast<std::size_t>(h.size()) != model.size()) {
    throw StructuralError("integrate_kl: seed has wrong length");
  }
  if (h(ref) != 0.0) throw ParameterError("integrate_kl: seed must vanish at the reference state");

  ValueTrajectory traj;
  traj.objective = Objective::kReward;
  traj.settings = settings;
  traj.samples.reserve(n + 1);

  NewtonOptions polish;
  polish.tol = settings.polish_tol;
  polish.max_iterations = settings.polish_max_iterations;
  polish.allow_unconverged = true;

  double eta_q = implied_eta(span.zeta_start, h, model);
  int polish_iters = 0;

  for (std::size_t k = 0;; ++k) {
    const double zeta = span.zeta_start + static_cast<double>(k) * dz;
    const double last_zeta = traj.samples.empty() ? span.zeta_start : traj.samples.back().zeta;
    try {
      KlField k1 = vector_field_kl(h, model);

      TrajectorySample s;
      s.zeta = zeta;
      s.h = h;
      s.eta = implied_eta(zeta, h, model);
      s.eta_quadrature = eta_q;
      s.eta_rate = k1.eta_rate;
      s.pi = k1.pi.weights();
      s.residual_sup = sup_norm(fixed_point_residual(zeta, h, model));
      s.policy = k1.twist.r_h.entries();
      s.polish_iterations = polish_iters;
      traj.samples.push_back(std::move(s));
      if (k == n) break;

      const KlField k2 = vector_field_kl(h + 0.5 * dz * k1.h_rate, model);
      const KlField k3 = vector_field_kl(h + 0.5 * dz * k2.h_rate, model);
      const KlField k4 = vector_field_kl(h + dz * k3.h_rate, model);
      h += dz / 6.0 * (k1.h_rate + 2.0 * k2.h_rate + 2.0 * k3.h_rate + k4.h_rate);
      h(ref) = 0.0;
      eta_q += dz / 6.0 * (k1.eta_rate + 2.0 * k2.eta_rate + 2.0 * k3.eta_rate + k4.eta_rate);

      polish_iters = 0;
      if (settings.polish) {
        const double next = span.zeta_start + static_cast<double>(k + 1) * dz;
        FixedPointSolution sol = newton_solve(next, h, model, polish);
        h = std::move(sol.h_star);
        polish_iters = sol.iterations;
      }
    } catch (const Error& e) {
      const std::size_t last = traj.samples.empty() ? 0 : traj.samples.size() - 1;
      std::ostringstream msg;
      msg << "integrate_kl: field evaluation failed near zeta " << zeta << ": " << e.what();
      throw IntegrationError(msg.str(), last, last_zeta);
    }
  }
  return traj;
}

Vector vector_field_kl_discounted(const Vector& h, const KLModel& model, double beta) {
  const TwistResult tw = twist(beta * h, model);
  return discounted_solve(tw.p_h, model.utility(), beta);
}

Vector discounted_fixed_point_residual(double zeta, const Vector& h, const KLModel& model,
                                       double beta) {
  const Vector lambda = log_mgf(conditional_exponent(beta * h, model), model);
  return h - zeta * model.utility() - lambda;
}

DiscountedTrajectory integrate_kl_discounted(const KLModel& model, double beta,
                                             double zeta_end, double step) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ParameterError("integrate_kl_discounted: discount factor must lie in (0,1)");
  }
  const std::size_t n = step_count(zeta_end, step);
  const double dz = n == 0 ? 0.0 : zeta_end / static_cast<double>(n);
  // At zeta = 0 the nominal kernels are optimal and the value is identically 0.
  Vector h = Vector::Zero(static_cast<Index>(model.size()));
  DiscountedTrajectory traj;
  for (std::size_t k = 0;; ++k) {
    traj.zeta.push_back(static_cast<double>(k) * dz);
    traj.h.push_back(h);
    if (k == n) break;
    const Vector k1 = vector_field_kl_discounted(h, model, beta);
    const Vector k2 = vector_field_kl_discounted(h + 0.5 * dz * k1, model, beta);
    const Vector k3 = vector_field_kl_discounted(h + 0.5 * dz * k2, model, beta);
    const Vector k4 = vector_field_kl_discounted(h + dz * k3, model, beta);
    h += dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return traj;
}

}  // namespace mdpode
