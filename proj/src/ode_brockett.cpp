#include <cmath>
#include <limits>
#include <sstream>

#include "grid.hpp"
#include "mdpode/errors.hpp"
#include "mdpode/ode_engine.hpp"

namespace mdpode {

namespace {

using Index = Eigen::Index;

struct AcoeTerms {
  double gamma;     // value of the optimality equation at the reference state
  double residual;  // sup over states of its deviation from gamma
};

// zeta kappa(x) + |phi(x)|^2 / 2 + (A_phi g)(x), which is constant in x for
// the optimal g.
AcoeTerms acoe_terms(const GeneratorModel& model, double zeta, const Vector& g,
                     const Matrix& policy) {
  const Vector lhs = zeta * model.kappa() + 0.5 * policy.rowwise().squaredNorm() +
                     model.closed_loop(policy) * g;
  const double gamma = lhs(static_cast<Index>(model.reference_state()));
  return AcoeTerms{gamma, (lhs.array() - gamma).abs().maxCoeff()};
}

}  // namespace

GeneratorModel::GeneratorModel(GeneratorMatrix a, std::vector<Matrix> b, Vector kappa,
                               std::size_t x0, Vector u_lower, Vector u_upper)
    : a_(std::move(a)),
      b_(std::move(b)),
      kappa_(std::move(kappa)),
      x0_(x0),
      u_lower_(std::move(u_lower)),
      u_upper_(std::move(u_upper)) {
  const auto d = static_cast<Index>(a_.size());
  const auto m = static_cast<Index>(b_.size());
  if (kappa_.size() != d) throw StructuralError("generator model: kappa has wrong length");
  if (!kappa_.allFinite()) throw ValidationError("generator model: kappa must be finite");
  if (x0_ >= a_.size()) throw ValidationError("generator model: reference state out of range");
  if (u_lower_.size() != m || u_upper_.size() != m) {
    throw StructuralError("generator model: one bound pair per input is required");
  }
  for (Index k = 0; k < m; ++k) {
    const Matrix& bk = b_[static_cast<std::size_t>(k)];
    if (bk.rows() != d || bk.cols() != d) {
      throw StructuralError("generator model: input matrices must match A");
    }
    if (!bk.allFinite() || (bk.rowwise().sum().cwiseAbs().array() > kRowSumTolerance).any()) {
      throw ValidationError("generator model: input matrices need finite entries, zero row sums");
    }
    if (!(u_lower_(k) < u_upper_(k))) {
      throw ValidationError("generator model: empty input interval");
    }
  }

  // Off-diagonal rates are affine in u, so their minimum over the box sits at
  // a corner. Infinite bounds turn into sign conditions on B^k.
  for (Index k = 0; k < m; ++k) {
    const Matrix& bk = b_[static_cast<std::size_t>(k)];
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        if (i == j) continue;
        if ((std::isinf(u_upper_(k)) && bk(i, j) < 0.0) ||
            (std::isinf(u_lower_(k)) && bk(i, j) > 0.0)) {
          std::ostringstream msg;
          msg << "generator model: input " << k << " drives rate (" << i << "," << j
              << ") negative on its unbounded side";
          throw ValidationError(msg.str());
        }
      }
    }
  }
  const std::size_t corners = std::size_t{1} << b_.size();
  for (std::size_t c = 0; c < corners; ++c) {
    Matrix rates = a_.entries();
    for (Index k = 0; k < m; ++k) {
      const double u = ((c >> k) & 1U) ? u_upper_(k) : u_lower_(k);
      if (std::isfinite(u)) rates += u * b_[static_cast<std::size_t>(k)];
    }
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        if (i != j && rates(i, j) < -kRowSumTolerance) {
          std::ostringstream msg;
          msg << "generator model: rate (" << i << "," << j << ") is negative at input corner "
              << c;
          throw ValidationError(msg.str());
        }
      }
    }
  }
}

Matrix GeneratorModel::closed_loop(const Matrix& policy) const {
  Matrix out = a_.entries();
  for (std::size_t k = 0; k < b_.size(); ++k) {
    out += policy.col(static_cast<Index>(k)).asDiagonal() * b_[k];
  }
  return out;
}

GeneratorModel brockett_example() {
  Matrix a(3, 3);
  a << -1, 1, 0,  //
      1, -2, 1,   //
      0, 1, -1;
  Matrix b(3, 3);
  b << -1, 1, 0,  //
      0, 0, 0,    //
      0, 1, -1;
  Vector kappa(3);
  kappa << 3, 0, 3;
  Vector lower(1);
  lower << -1.0;
  Vector upper(1);
  upper << std::numeric_limits<double>::infinity();
  return GeneratorModel(GeneratorMatrix(std::move(a)), {std::move(b)}, std::move(kappa), 1,
                        std::move(lower), std::move(upper));
}

BrockettField vector_field_brockett(const Vector& g, const GeneratorModel& model) {
  const auto d = static_cast<Index>(model.size());
  const auto m = static_cast<Index>(model.inputs());
  if (g.size() != d) throw StructuralError("vector_field_brockett: g has wrong length");

  Matrix policy(d, m);
  for (Index k = 0; k < m; ++k) {
    // Subtracting from zero keeps exact zeros positive in printed output.
    policy.col(k) = Vector::Zero(d) - model.b()[static_cast<std::size_t>(k)] * g;
  }
  for (Index x = 0; x < d; ++x) {
    for (Index k = 0; k < m; ++k) {
      const double u = policy(x, k);
      if (!(u > model.u_lower()(k) && u < model.u_upper()(k))) {
        std::ostringstream msg;
        msg << "policy input " << k << " at state " << x << " is " << u
            << ", outside the open interval (" << model.u_lower()(k) << ", "
            << model.u_upper()(k) << ")";
        throw FeasibilityError(msg.str(), static_cast<std::size_t>(x), u);
      }
    }
  }
  const GeneratorMatrix closed(model.closed_loop(policy));
  PoissonSolution sol = generator_poisson(closed, model.kappa(), model.reference_state());
  Pmf pi = generator_invariant(closed);
  return BrockettField{std::move(sol.h), sol.mean, std::move(policy), std::move(pi)};
}

ValueTrajectory integrate_brockett(const GeneratorModel& model, double zeta_end, double step) {
  const std::size_t n = detail::step_count(zeta_end, step);
  const double dz = n == 0 ? 0.0 : zeta_end / static_cast<double>(n);
  const auto ref = static_cast<Index>(model.reference_state());

  ValueTrajectory traj;
  traj.objective = Objective::kCost;
  traj.settings.step = step;
  traj.settings.polish = false;
  traj.samples.reserve(n + 1);

  // Re-throws feasibility failures with the zeta at which they occurred.
  const auto field = [&model](const Vector& g, double zeta) {
    try {
      return vector_field_brockett(g, model);
    } catch (const FeasibilityError& e) {
      std::ostringstream msg;
      msg << "integrate_brockett: at zeta " << zeta << ": " << e.what();
      throw FeasibilityError(msg.str(), e.state(), e.value());
    }
  };

  // Zero input is optimal at zeta = 0, so g = 0 there.
  Vector g = Vector::Zero(static_cast<Index>(model.size()));
  double gamma_q = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double zeta = static_cast<double>(k) * dz;
    const BrockettField k1 = field(g, zeta);
    const AcoeTerms acoe = acoe_terms(model, zeta, g, k1.policy);
    if (k == 0) gamma_q = acoe.gamma;

    TrajectorySample s;
    s.zeta = zeta;
    s.h = g;
    s.eta = acoe.gamma;
    s.eta_quadrature = gamma_q;
    s.eta_rate = k1.gamma_rate;
    s.pi = k1.pi.weights();
    s.residual_sup = acoe.residual;
    s.policy = k1.policy;
    traj.samples.push_back(std::move(s));
    if (k == n) break;

    const BrockettField k2 = field(g + 0.5 * dz * k1.g_rate, zeta + 0.5 * dz);
    const BrockettField k3 = field(g + 0.5 * dz * k2.g_rate, zeta + 0.5 * dz);
    const BrockettField k4 = field(g + dz * k3.g_rate, zeta + dz);
    g += dz / 6.0 * (k1.g_rate + 2.0 * k2.g_rate + 2.0 * k3.g_rate + k4.g_rate);
    g(ref) = 0.0;
    gamma_q +=
        dz / 6.0 * (k1.gamma_rate + 2.0 * k2.gamma_rate + 2.0 * k3.gamma_rate + k4.gamma_rate);
  }
  return traj;
}

}  // namespace mdpode
