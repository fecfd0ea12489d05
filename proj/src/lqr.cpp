#include <cmath>
#include <sstream>

#include "grid.hpp"
#include "mdpode/errors.hpp"
#include "mdpode/ode_engine.hpp"

namespace mdpode {

namespace {

double gain(double alpha, double b) { return b * alpha / (1.0 + b); }

double coefficient_rate(double alpha, double b) {
  const double ratio = alpha / (1.0 + b);
  const double denom = 1.0 - ratio * ratio;
  if (!(denom > 0.0)) {
    std::ostringstream msg;
    msg << "lqr_coefficient_ode: closed loop is not stable at b = " << b;
    throw ParameterError(msg.str());
  }
  return 1.0 / denom;
}

}  // namespace

LqrModel::LqrModel(double alpha, double sigma_n2) : alpha_(alpha), sigma_n2_(sigma_n2) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("LQR model: alpha must lie in (0,1)");
  if (!(sigma_n2 >= 0.0) || !std::isfinite(sigma_n2)) {
    throw ParameterError("LQR model: noise variance must be finite and nonnegative");
  }
}

std::vector<LqrSample> lqr_coefficient_ode(const LqrModel& model, double zeta_max, double step) {
  if (!(zeta_max >= 0.0)) throw ParameterError("lqr_coefficient_ode: zeta_max must be >= 0");
  const std::size_t n = detail::step_count(zeta_max, step);
  const double dz = n == 0 ? 0.0 : zeta_max / static_cast<double>(n);
  const double alpha = model.alpha();

  std::vector<LqrSample> out;
  out.reserve(n + 1);
  double b = 0.0;
  for (std::size_t k = 0;; ++k) {
    out.push_back(LqrSample{static_cast<double>(k) * dz, b, gain(alpha, b)});
    if (k == n) break;
    const double k1 = coefficient_rate(alpha, b);
    const double k2 = coefficient_rate(alpha, b + 0.5 * dz * k1);
    const double k3 = coefficient_rate(alpha, b + 0.5 * dz * k2);
    const double k4 = coefficient_rate(alpha, b + dz * k3);
    b += dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

double riccati_oracle(const LqrModel& model, double zeta) {
  if (!(zeta >= 0.0)) throw ParameterError("riccati_oracle: zeta must be >= 0");
  const double alpha = model.alpha();
  constexpr double relax = 0.5;
  double b = zeta;
  for (int iter = 0; iter < 100000; ++iter) {
    const double k = gain(alpha, b);
    const double next = zeta + k * k + b * (alpha - k) * (alpha - k);
    const double change = next - b;
    b += relax * change;
    if (std::abs(change) <= 1e-14 * std::max(1.0, std::abs(b))) return b;
  }
  throw ConvergenceError("riccati_oracle: no convergence in 1e5 iterations", b);
}

}  // namespace mdpode
