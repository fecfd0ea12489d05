#include "mdpode/kl_twist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mdpode/errors.hpp"

namespace mdpode {

namespace {

using Index = Eigen::Index;

void check_h(const Vector& h, const KLModel& model, const char* what) {
  if (static_cast<std::size_t>(h.size()) != model.size()) {
    throw StructuralError(std::string(what) + ": value function has wrong length");
  }
}

double sup_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Fixed-capacity storage for the oracle; it only ever sees d <= 4.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;

// Objective zeta pi(U) - sum pi(x) D(R(x) || R0(x)) for control rows given by
// their first-coordinate probabilities. Returns -inf for a singular chain.
double oracle_objective(const KLModel& model, double zeta, const SmallVector& r_first) {
  const Index d = static_cast<Index>(model.size());
  const Index dn = static_cast<Index>(model.space().size_n());
  const Matrix& q = model.q0().entries();
  const Matrix& r0 = model.r0().entries();

  SmallMatrix p(d, d);
  for (Index x = 0; x < d; ++x) {
    const double r[2] = {r_first(x), 1.0 - r_first(x)};
    for (Index u = 0; u < 2; ++u) {
      for (Index n = 0; n < dn; ++n) p(x, u * dn + n) = r[u] * q(x, n);
    }
  }
  SmallMatrix system = p.transpose() - SmallMatrix::Identity(d, d);
  system.row(d - 1).setOnes();
  SmallVector rhs = SmallVector::Zero(d);
  rhs(d - 1) = 1.0;
  const SmallVector pi = system.partialPivLu().solve(rhs);
  if (!pi.allFinite()) return -std::numeric_limits<double>::infinity();

  double value = 0.0;
  for (Index x = 0; x < d; ++x) {
    const double r[2] = {r_first(x), 1.0 - r_first(x)};
    double cost = 0.0;
    for (Index u = 0; u < 2; ++u) cost += r[u] * std::log(r[u] / r0(x, u));
    value += pi(x) * (zeta * model.utility()(x) - cost);
  }
  return value;
}

}  // namespace

Matrix conditional_exponent(const Vector& h, const KLModel& model) {
  check_h(h, model, "conditional_exponent");
  const Index du = static_cast<Index>(model.space().size_u());
  const Index dn = static_cast<Index>(model.space().size_n());
  const Matrix& q = model.q0().entries();
  Matrix out(q.rows(), du);
  for (Index u = 0; u < du; ++u) out.col(u) = q * h.segment(u * dn, dn);
  return out;
}

Vector log_mgf(const Matrix& h_cond, const KLModel& model) {
  const Matrix& r0 = model.r0().entries();
  if (h_cond.rows() != r0.rows() || h_cond.cols() != r0.cols()) {
    throw StructuralError("log_mgf: exponent matrix has wrong shape");
  }
  Vector lambda(r0.rows());
  for (Index x = 0; x < r0.rows(); ++x) {
    double shift = -std::numeric_limits<double>::infinity();
    for (Index u = 0; u < r0.cols(); ++u) {
      if (r0(x, u) > 0.0) shift = std::max(shift, h_cond(x, u));
    }
    if (!std::isfinite(shift)) {
      std::ostringstream msg;
      msg << "log_mgf: row " << x << " has no finite support";
      throw DegeneracyError(msg.str());
    }
    // Dividing by the row mass absorbs rounding in the row sum of R0, so
    // h = 0 gives Lambda = 0 exactly.
    double acc = 0.0;
    double mass = 0.0;
    for (Index u = 0; u < r0.cols(); ++u) {
      if (r0(x, u) > 0.0) {
        acc += r0(x, u) * std::exp(h_cond(x, u) - shift);
        mass += r0(x, u);
      }
    }
    lambda(x) = shift + std::log(acc / mass);
  }
  return lambda;
}

TwistResult twist(const Vector& h, const KLModel& model) {
  Matrix h_cond = conditional_exponent(h, model);
  Vector lambda = log_mgf(h_cond, model);
  const Matrix& r0 = model.r0().entries();
  Matrix r(r0.rows(), r0.cols());
  for (Index x = 0; x < r0.rows(); ++x) {
    for (Index u = 0; u < r0.cols(); ++u) {
      r(x, u) = r0(x, u) > 0.0 ? r0(x, u) * std::exp(h_cond(x, u) - lambda(x)) : 0.0;
    }
  }
  ControlKernel r_h(std::move(r));
  StochasticMatrix p_h = assemble_p0(model.q0(), r_h);
  return TwistResult{std::move(p_h), std::move(r_h), std::move(lambda), std::move(h_cond)};
}

double kl_rate(const StochasticMatrix& p, const StochasticMatrix& p0, const Pmf& pi) {
  if (p.size() != p0.size() || pi.size() != p.size()) {
    throw StructuralError("kl_rate: size mismatch");
  }
  const Matrix& a = p.entries();
  const Matrix& b = p0.entries();
  double k = 0.0;
  for (Index x = 0; x < a.rows(); ++x) {
    double row = 0.0;
    for (Index y = 0; y < a.cols(); ++y) {
      if (a(x, y) == 0.0) continue;
      if (b(x, y) == 0.0) {
        if (a(x, y) <= kSupportThreshold) continue;
        std::ostringstream msg;
        msg << "kl_rate: P(" << x << "," << y << ") = " << a(x, y)
            << " but the nominal kernel forbids this transition";
        throw DivergenceError(msg.str());
      }
      row += a(x, y) * std::log(a(x, y) / b(x, y));
    }
    k += pi(static_cast<std::size_t>(x)) * row;
  }
  return std::max(k, 0.0);
}

double kl_rate_twisted(const TwistResult& tw, const Pmf& pi) {
  const Matrix& r = tw.r_h.entries();
  double k = 0.0;
  for (Index x = 0; x < r.rows(); ++x) {
    double row = 0.0;
    for (Index u = 0; u < r.cols(); ++u) {
      if (r(x, u) > 0.0) row += r(x, u) * (tw.h_cond(x, u) - tw.lambda(x));
    }
    k += pi(static_cast<std::size_t>(x)) * row;
  }
  return k;
}

double reward_objective(const StochasticMatrix& p, const Pmf& pi, double zeta,
                        const KLModel& model) {
  return zeta * pi.mean(model.utility()) - kl_rate(p, model.p0(), pi);
}

Vector fixed_point_residual(double zeta, const Vector& h, const KLModel& model) {
  check_h(h, model, "fixed_point_residual");
  const Vector lambda = log_mgf(conditional_exponent(h, model), model);
  const auto ref = static_cast<Index>(model.reference_state());
  const double offset = zeta * model.utility()(ref) + lambda(ref);
  Vector f = h - zeta * model.utility() - lambda;
  f.array() += offset;
  return f;
}

double implied_eta(double zeta, const Vector& h, const KLModel& model) {
  check_h(h, model, "implied_eta");
  const Vector lambda = log_mgf(conditional_exponent(h, model), model);
  const auto ref = static_cast<Index>(model.reference_state());
  return zeta * model.utility()(ref) + lambda(ref);
}

Matrix jacobian(const Vector& h, const KLModel& model) {
  const TwistResult tw = twist(h, model);
  const Matrix& p = tw.p_h.entries();
  const Index d = p.rows();
  const auto ref = static_cast<Index>(model.reference_state());
  Matrix j = Matrix::Identity(d, d) - p;
  j.rowwise() += p.row(ref);
  return j;
}

FixedPointSolution make_solution(double zeta, const Vector& h, const KLModel& model) {
  check_h(h, model, "make_solution");
  TwistResult tw = twist(h, model);
  Pmf pi = invariant_pmf(tw.p_h);
  const auto ref = static_cast<Index>(model.reference_state());
  const double eta = zeta * model.utility()(ref) + tw.lambda(ref);
  const double eta_avg = pi.mean(zeta * model.utility() + tw.lambda - h);
  FixedPointSolution sol{h, eta, std::move(tw), std::move(pi), 0, true, 0.0, 0.0, {}};
  sol.residual_sup = sup_norm(fixed_point_residual(zeta, h, model));
  sol.eta_discrepancy = std::abs(eta - eta_avg);
  return sol;
}

FixedPointSolution newton_solve(double zeta, const Vector& h_init, const KLModel& model,
                                const NewtonOptions& options) {
  check_h(h_init, model, "newton_solve");
  const auto ref = static_cast<Index>(model.reference_state());
  if (h_init(ref) != 0.0) {
    throw ParameterError("newton_solve: initial value function must vanish at the reference state");
  }
  if (!h_init.allFinite()) throw ValidationError("newton_solve: non-finite initial value");

  Vector h = h_init;
  Vector f = fixed_point_residual(zeta, h, model);
  double norm = sup_norm(f);
  std::vector<double> history{norm};
  int iter = 0;
  while (!(norm <= options.tol)) {
    if (iter >= options.max_iterations) {
      if (options.allow_unconverged) break;
      std::ostringstream msg;
      msg << "newton_solve: no convergence after " << iter << " iterations at zeta " << zeta
          << " (residual " << norm << ")";
      throw ConvergenceError(msg.str(), norm);
    }
    const Vector delta = jacobian(h, model).partialPivLu().solve(f);
    if (!delta.allFinite()) {
      if (options.allow_unconverged) break;
      throw ConvergenceError("newton_solve: Newton direction is not finite", norm);
    }
    double step = 1.0;
    Vector candidate;
    Vector f_candidate;
    double norm_candidate = 0.0;
    for (int halving = 0;; ++halving) {
      candidate = h - step * delta;
      candidate(ref) = 0.0;
      f_candidate = fixed_point_residual(zeta, candidate, model);
      norm_candidate = sup_norm(f_candidate);
      if (norm_candidate < norm || halving >= options.max_halvings) break;
      step *= 0.5;
    }
    if (!(norm_candidate < norm)) {
      if (options.allow_unconverged) break;
      std::ostringstream msg;
      msg << "newton_solve: line search stalled at residual " << norm << " (zeta " << zeta
          << ")";
      throw ConvergenceError(msg.str(), norm);
    }
    h = std::move(candidate);
    f = std::move(f_candidate);
    norm = norm_candidate;
    history.push_back(norm);
    ++iter;
  }

  FixedPointSolution sol = make_solution(zeta, h, model);
  sol.iterations = iter;
  sol.converged = norm <= options.tol;
  sol.residual_sup = norm;
  sol.residual_history = std::move(history);
  return sol;
}

BruteForceResult brute_force_oracle(const KLModel& model, double zeta, int resolution) {
  const std::size_t d = model.size();
  if (model.space().size_u() != 2 || d > 4) {
    throw UsageError("brute_force_oracle: requires d_u = 2 and d <= 4");
  }
  if (resolution < 1) throw UsageError("brute_force_oracle: resolution must be positive");
  if ((model.r0().entries().array() <= 0.0).any()) {
    throw UsageError("brute_force_oracle: nominal control matrix must be strictly positive");
  }
  const auto di = static_cast<Index>(d);
  const auto grid = [resolution](int i) {
    return static_cast<double>(i + 1) / static_cast<double>(resolution + 1);
  };

  SmallVector best_r(di);
  double best = -std::numeric_limits<double>::infinity();
  const double total = std::pow(static_cast<double>(resolution), static_cast<double>(d));
  const bool exhaustive = total <= 2.0e7;

  if (exhaustive) {
    std::vector<int> idx(d, 0);
    SmallVector r(di);
    for (;;) {
      for (Index x = 0; x < di; ++x) r(x) = grid(idx[static_cast<std::size_t>(x)]);
      const double value = oracle_objective(model, zeta, r);
      if (value > best) {
        best = value;
        best_r = r;
      }
      std::size_t k = 0;
      while (k < d && ++idx[k] == resolution) idx[k++] = 0;
      if (k == d) break;
    }
  } else {
    // Cyclic coordinate search over the same grid, one control row at a time.
    // A row-wise optimum of an average-reward problem satisfies the optimality
    // equation, so the sweep cannot stall at a spurious point.
    SmallVector r(di);
    for (Index x = 0; x < di; ++x) {
      const double target = model.r0().entries()(x, 0);
      const int i = std::clamp(
          static_cast<int>(std::lround(target * (resolution + 1))) - 1, 0, resolution - 1);
      r(x) = grid(i);
    }
    best = oracle_objective(model, zeta, r);
    for (int sweep = 0; sweep < 1000; ++sweep) {
      bool improved = false;
      for (Index x = 0; x < di; ++x) {
        SmallVector trial = r;
        for (int i = 0; i < resolution; ++i) {
          trial(x) = grid(i);
          const double value = oracle_objective(model, zeta, trial);
          if (value > best) {
            best = value;
            r(x) = trial(x);
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    best_r = r;
  }

  Matrix kernel(di, 2);
  for (Index x = 0; x < di; ++x) {
    kernel(x, 0) = best_r(x);
    kernel(x, 1) = 1.0 - best_r(x);
  }
  return BruteForceResult{best, ControlKernel(std::move(kernel)), exhaustive};
}

AroeCheck aroe_check(const FixedPointSolution& sol, double zeta, const KLModel& model) {
  check_h(sol.h_star, model, "aroe_check");
  const Matrix& r = sol.twist.r_h.entries();
  const Matrix& r0 = model.r0().entries();
  // Exponent and normalizer are recomputed from h rather than read from the
  // stored twist so a stale twist cannot certify itself.
  const Matrix f = conditional_exponent(sol.h_star, model);
  const Vector lambda = log_mgf(f, model);
  const Vector ph = sol.twist.p_h.entries() * sol.h_star;

  AroeCheck out{0.0, 0.0};
  for (Index x = 0; x < r.rows(); ++x) {
    double divergence = 0.0;
    double gain = 0.0;
    for (Index u = 0; u < r.cols(); ++u) {
      if (r(x, u) == 0.0) continue;
      if (r0(x, u) == 0.0) {
        throw DivergenceError("aroe_check: control matrix charges a forbidden transition");
      }
      divergence += r(x, u) * std::log(r(x, u) / r0(x, u));
      gain += r(x, u) * f(x, u);
    }
    const double w = zeta * model.utility()(x) - divergence;
    out.equation =
        std::max(out.equation, std::abs(w + ph(x) - sol.h_star(x) - sol.eta_star));
    out.inner_max = std::max(out.inner_max, std::abs(gain - divergence - lambda(x)));
  }
  return out;
}

double aroe_residual(const FixedPointSolution& sol, double zeta, const KLModel& model) {
  const AroeCheck c = aroe_check(sol, zeta, model);
  return std::max(c.equation, c.inner_max);
}

}  // namespace mdpode
