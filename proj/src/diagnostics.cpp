#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mdpode/errors.hpp"
#include "mdpode/ode_engine.hpp"

namespace mdpode {

ConvexityReport convexity_check(const ValueTrajectory& traj, int pairs, std::uint64_t seed) {
  const auto& s = traj.samples;
  if (s.size() < 3) throw UsageError("convexity_check: need at least 3 samples");
  // Costs are concave in zeta; flip them so both cases test convexity.
  const double sign = traj.objective == Objective::kCost ? -1.0 : 1.0;

  ConvexityReport report{std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double second = sign * (s[k - 1].eta - 2.0 * s[k].eta + s[k + 1].eta);
    report.worst_second_difference = std::min(report.worst_second_difference, second);
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  for (int i = 0; i < pairs; ++i) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const double gap =
        sign * (s[a].eta - s[b].eta) - (s[a].zeta - s[b].zeta) * sign * s[b].eta_rate;
    report.worst_subgradient_gap = std::min(report.worst_subgradient_gap, gap);
  }
  return report;
}

double lambda_derivative_check(const ValueTrajectory& traj, const KLModel& model) {
  const auto& s = traj.samples;
  if (s.size() < 3) throw UsageError("lambda_derivative_check: need at least 3 samples");
  const double dz = s[1].zeta - s[0].zeta;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (std::abs((s[k].zeta - s[k - 1].zeta) - dz) > 1e-9 * std::max(1.0, std::abs(dz))) {
      throw UsageError("lambda_derivative_check: trajectory is not uniformly spaced");
    }
  }

  std::vector<Vector> lambda;
  lambda.reserve(s.size());
  for (const auto& sample : s) {
    lambda.push_back(log_mgf(conditional_exponent(sample.h, model), model));
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const Vector fd = (lambda[k + 1] - lambda[k - 1]) / (2.0 * dz);
    const KlField field = vector_field_kl(s[k].h, model);
    const Vector exact = field.twist.p_h.entries() * field.h_rate;
    worst = std::max(worst, (fd - exact).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace mdpode
