#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mdpode/kl_twist.hpp"
#include "mdpode/markov_lin.hpp"
#include "mdpode/model.hpp"

namespace mdpode {

// Whether eta is a reward to maximize (convex in zeta) or a cost to minimize
// (concave in zeta).
enum class Objective { kReward, kCost };

struct TrajectorySample {
  double zeta = 0.0;
  Vector h;                     // relative value function, h(x0) = 0
  double eta = 0.0;             // algebraic value (authoritative)
  double eta_quadrature = 0.0;  // RK4 quadrature of eta_rate
  double eta_rate = 0.0;        // d eta / d zeta = steady-state mean of the utility
  Vector pi;                    // invariant pmf of the optimal chain
  double residual_sup = 0.0;    // optimality-equation residual
  Matrix policy;                // KL: twisted control matrix; Brockett: d x m inputs
  int polish_iterations = 0;
};

struct IntegratorSettings {
  double step = 1e-3;
  bool polish = true;
  int polish_max_iterations = 3;
  double polish_tol = 1e-12;
};

// Samples on a uniform zeta grid, ordered in the direction of integration.
struct ValueTrajectory {
  std::vector<TrajectorySample> samples;
  Objective objective = Objective::kReward;
  IntegratorSettings settings;
};

// ---- Kullback-Leibler models ----

struct KlField {
  Vector h_rate;    // normalized Poisson solution under the twisted chain
  double eta_rate;  // pi_h(U)
  TwistResult twist;
  Pmf pi;
};

// dh/dzeta at h. Independent of zeta.
KlField vector_field_kl(const Vector& h, const KLModel& model);

struct KlSpan {
  double zeta_start = 0.0;
  double zeta_end = 0.0;
  // Seed from a previous trajectory; defaults to h = 0, which is exact only
  // at zeta_start = 0.
  std::optional<Vector> h_start;
};

// RK4 on dh/dzeta = V(h). The step is shrunk so the grid lands exactly on
// zeta_end. Throws IntegrationError if a field evaluation fails.
ValueTrajectory integrate_kl(const KLModel& model, const KlSpan& span,
                             const IntegratorSettings& settings = {});

// Discounted variant: h = zeta U + Lambda_{beta h}, differentiated in zeta.
Vector vector_field_kl_discounted(const Vector& h, const KLModel& model, double beta);

// h - zeta U - Lambda_{beta h}
Vector discounted_fixed_point_residual(double zeta, const Vector& h, const KLModel& model,
                                       double beta);

struct DiscountedTrajectory {
  std::vector<double> zeta;
  std::vector<Vector> h;
};

DiscountedTrajectory integrate_kl_discounted(const KLModel& model, double beta,
                                             double zeta_end, double step);

// ---- Brockett continuous-time models ----

// Controlled generator A + sum_k u_k B^k with cost zeta kappa(x) + |u|^2 / 2.
class GeneratorModel {
 public:
  // Bounds are open; use +-infinity for unbounded coordinates.
  GeneratorModel(GeneratorMatrix a, std::vector<Matrix> b, Vector kappa, std::size_t x0,
                 Vector u_lower, Vector u_upper);

  const GeneratorMatrix& a() const { return a_; }
  const std::vector<Matrix>& b() const { return b_; }
  const Vector& kappa() const { return kappa_; }
  std::size_t reference_state() const { return x0_; }
  const Vector& u_lower() const { return u_lower_; }
  const Vector& u_upper() const { return u_upper_; }
  std::size_t size() const { return a_.size(); }
  std::size_t inputs() const { return b_.size(); }

  // A + sum_k diag(u_k) B^k, row x driven by policy(x, .).
  Matrix closed_loop(const Matrix& policy) const;

 private:
  GeneratorMatrix a_;
  std::vector<Matrix> b_;
  Vector kappa_;
  std::size_t x0_;
  Vector u_lower_;
  Vector u_upper_;
};

// Three-state example with one input u > -1 penalizing the outer states.
GeneratorModel brockett_example();

struct BrockettField {
  Vector g_rate;
  double gamma_rate;
  Matrix policy;  // d x m, phi_k(x) = -(B^k g)(x)
  Pmf pi;
};

// Throws FeasibilityError when the implied policy leaves the input bounds.
BrockettField vector_field_brockett(const Vector& g, const GeneratorModel& model);

// Samples carry g in `h` and the average cost gamma in `eta`.
// Starts from g = 0 at zeta = 0; zeta_end may be negative.
ValueTrajectory integrate_brockett(const GeneratorModel& model, double zeta_end, double step);

// ---- Scalar linear-quadratic model ----

class LqrModel {
 public:
  explicit LqrModel(double alpha, double sigma_n2 = 1.0);
  double alpha() const { return alpha_; }
  double sigma_n2() const { return sigma_n2_; }

 private:
  double alpha_;
  double sigma_n2_;
};

struct LqrSample {
  double zeta;
  double b;  // value function coefficient, g(x) = b x^2
  double k;  // feedback gain, u = -k x
};

// RK4 on db/dzeta = 1 / (1 - (alpha / (1 + b))^2), b(0) = 0.
std::vector<LqrSample> lqr_coefficient_ode(const LqrModel& model, double zeta_max, double step);

// Fixed point of b = zeta + k^2 + b (alpha - k)^2 with k = b alpha / (1 + b).
double riccati_oracle(const LqrModel& model, double zeta);

// ---- Trajectory diagnostics ----

struct ConvexityReport {
  // min over interior samples of eta[k-1] - 2 eta[k] + eta[k+1], with eta
  // negated for cost trajectories.
  double worst_second_difference;
  // min over sampled pairs of eta(z) - eta(z0) - (z - z0) eta_rate(z0).
  double worst_subgradient_gap;
};

ConvexityReport convexity_check(const ValueTrajectory& traj, int pairs = 10,
                                std::uint64_t seed = 7);

// Max over interior samples and states of
// |central difference of Lambda_{h_zeta}(x) in zeta - (P_zeta H_zeta)(x)|.
double lambda_derivative_check(const ValueTrajectory& traj, const KLModel& model);

}  // namespace mdpode
