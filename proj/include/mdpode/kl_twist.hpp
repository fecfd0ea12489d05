#pragma once

#include <cstddef>
#include <vector>

#include "mdpode/markov_lin.hpp"
#include "mdpode/model.hpp"

namespace mdpode {

// Exponential tilt of the nominal kernels by a value function h.
struct TwistResult {
  StochasticMatrix p_h;  // twisted transition matrix
  ControlKernel r_h;     // twisted control matrix
  Vector lambda;         // log moment generating function, one entry per state
  Matrix h_cond;         // d x d_u conditional exponents h(x_u' | x)
};

// Solution of zeta U + Lambda_h = h + eta with h(x0) = 0.
struct FixedPointSolution {
  Vector h_star;
  double eta_star;
  TwistResult twist;
  Pmf pi;  // invariant for twist.p_h

  // Diagnostics.
  int iterations = 0;
  bool converged = true;
  double residual_sup = 0.0;
  // |eta_star - pi(zeta U + Lambda - h)|: eta from the x0 coordinate versus
  // eta from averaging the fixed-point equation.
  double eta_discrepancy = 0.0;
  std::vector<double> residual_history;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iterations = 100;
  // Step halvings allowed per iteration before the step is taken anyway.
  int max_halvings = 40;
  // Return the last iterate (converged = false) instead of throwing when the
  // iteration budget runs out or the line search stalls.
  bool allow_unconverged = false;
};

// h(x_u' | x) = sum_{x_n'} Q0(x, x_n') h(x_u', x_n')
Matrix conditional_exponent(const Vector& h, const KLModel& model);

// Lambda(x) = log sum_{x_u'} R0(x, x_u') exp(h_cond(x, x_u')), max-shifted.
Vector log_mgf(const Matrix& h_cond, const KLModel& model);

TwistResult twist(const Vector& h, const KLModel& model);

// Donsker-Varadhan rate sum pi(x) P(x,x') log(P(x,x')/P0(x,x')), 0 log 0 = 0.
// Throws DivergenceError when P charges a transition P0 forbids.
double kl_rate(const StochasticMatrix& p, const StochasticMatrix& p0, const Pmf& pi);

// Same rate for a twisted kernel, written through the exponent and the
// normalizer: sum pi(x) R_h(x,x_u') [h(x_u'|x) - Lambda(x)].
double kl_rate_twisted(const TwistResult& tw, const Pmf& pi);

// zeta pi(U) - K(P || P0)
double reward_objective(const StochasticMatrix& p, const Pmf& pi, double zeta,
                        const KLModel& model);

// F(zeta, h) = h - zeta U - Lambda_h + [zeta U(x0) + Lambda_h(x0)] 1
Vector fixed_point_residual(double zeta, const Vector& h, const KLModel& model);

// eta read off the reference coordinate: zeta U(x0) + Lambda_h(x0).
double implied_eta(double zeta, const Vector& h, const KLModel& model);

// dF/dh = I - P_h + 1 (x) P_h(x0, .)
Matrix jacobian(const Vector& h, const KLModel& model);

// Damped Newton on F(zeta, .) starting at h_init (which must vanish at x0).
// Throws ConvergenceError when the tolerance is not met.
FixedPointSolution newton_solve(double zeta, const Vector& h_init, const KLModel& model,
                                const NewtonOptions& options = {});

// Packages an h (assumed to solve the fixed point) into a solution object
// without iterating. Used to audit candidate solutions.
FixedPointSolution make_solution(double zeta, const Vector& h, const KLModel& model);

struct BruteForceResult {
  double objective;
  ControlKernel r;
  // True when every grid point was visited; false for coordinate sweeps.
  bool exhaustive;
};

// Grid search over control matrices for models with d_u = 2, d <= 4. Each row
// is parameterized by R(x, 0) on the grid (i + 1) / (resolution + 1).
BruteForceResult brute_force_oracle(const KLModel& model, double zeta, int resolution);

struct AroeCheck {
  // sup_x |w(x, R) + P h(x) - h(x) - eta| with the explicit relative-entropy cost.
  double equation;
  // sup_x |R(x).F - D(R(x) || R0(x)) - Lambda(x)|, F = h(.|x): R attains the
  // inner maximum exactly when this vanishes.
  double inner_max;
};

AroeCheck aroe_check(const FixedPointSolution& sol, double zeta, const KLModel& model);

// max of the two AroeCheck components.
double aroe_residual(const FixedPointSolution& sol, double zeta, const KLModel& model);

}  // namespace mdpode
