#include "mdpode/markov_lin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdpode/errors.hpp"

namespace mdpode {

namespace {

using Index = Eigen::Index;

// Below this reciprocal condition estimate a system is treated as singular.
constexpr double kSingularRcond = 1e-14;

Eigen::PartialPivLU<Matrix> factor(const Matrix& m, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > kSingularRcond)) {
    std::ostringstream msg;
    msg << what << ": singular system (rcond " << rc << ")";
    throw DegeneracyError(msg.str());
  }
  return lu;
}

// Solves pi M = 0, sum pi = 1 where M has zero row sums (P - I or a generator).
Pmf stationary_from_balance(const Matrix& balance, const char* what) {
  const Index d = balance.rows();
  Matrix system = balance.transpose();
  system.row(d - 1).setOnes();
  Vector rhs = Vector::Zero(d);
  rhs(d - 1) = 1.0;
  Vector pi = factor(system, what).solve(rhs);
  if (!pi.allFinite() || pi.minCoeff() <= 0.0) {
    std::ostringstream msg;
    msg << what << ": invariant vector is not strictly positive (min " << pi.minCoeff() << ")";
    throw DegeneracyError(msg.str());
  }
  // Normalization is one of the solved equations; this only removes rounding.
  pi /= pi.sum();
  return Pmf(std::move(pi));
}

void check_length(const Vector& f, std::size_t d, const char* what) {
  if (static_cast<std::size_t>(f.size()) != d) {
    throw StructuralError(std::string(what) + ": vector length does not match the chain");
  }
  if (!f.allFinite()) throw ValidationError(std::string(what) + ": non-finite input");
}

}  // namespace

GeneratorMatrix::GeneratorMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw StructuralError("generator: not a nonempty square matrix");
  }
  if (!entries_.allFinite()) throw ValidationError("generator: non-finite entry");
  for (Index i = 0; i < entries_.rows(); ++i) {
    for (Index j = 0; j < entries_.cols(); ++j) {
      if (i != j && entries_(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "generator: negative rate " << entries_(i, j) << " at (" << i << "," << j << ")";
        throw ValidationError(msg.str());
      }
    }
    const double scale = std::max(1.0, entries_.row(i).cwiseAbs().maxCoeff());
    if (std::abs(entries_.row(i).sum()) > kRowSumTolerance * scale) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "generator: row " << i << " sums to " << entries_.row(i).sum();
      throw ValidationError(msg.str());
    }
  }
}

Pmf invariant_pmf(const StochasticMatrix& p) {
  const Index d = p.entries().rows();
  return stationary_from_balance(p.entries() - Matrix::Identity(d, d), "invariant_pmf");
}

FundamentalMatrix fundamental_matrix(const StochasticMatrix& p, const Pmf& pi) {
  if (pi.size() != p.size()) throw StructuralError("fundamental_matrix: size mismatch");
  const Index d = p.entries().rows();
  Matrix m = Matrix::Identity(d, d) - p.entries();
  m.rowwise() += pi.weights().transpose();
  Matrix z = factor(m, "fundamental_matrix").inverse();
  return FundamentalMatrix{std::move(z), pi};
}

PoissonSolution poisson_solve(const FundamentalMatrix& fm, const Vector& f, std::size_t x0) {
  const std::size_t d = fm.pi.size();
  check_length(f, d, "poisson_solve");
  if (x0 >= d) throw StructuralError("poisson_solve: reference state out of range");
  const Vector zf = fm.z * f;
  Vector h = zf.array() - zf(static_cast<Index>(x0));
  h(static_cast<Index>(x0)) = 0.0;
  return PoissonSolution{std::move(h), fm.pi.mean(f), x0};
}

PoissonSolution poisson_solve(const StochasticMatrix& p, const Vector& f, std::size_t x0) {
  return poisson_solve(fundamental_matrix(p, invariant_pmf(p)), f, x0);
}

double poisson_residual(const StochasticMatrix& p, const PoissonSolution& sol, const Vector& f) {
  const Vector r = p.entries() * sol.h - sol.h + f - Vector::Constant(f.size(), sol.mean);
  return r.cwiseAbs().maxCoeff();
}

Vector discounted_solve(const StochasticMatrix& p, const Vector& f, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    std::ostringstream msg;
    msg << "discounted_solve: discount factor " << beta << " is outside (0,1)";
    throw ParameterError(msg.str());
  }
  check_length(f, p.size(), "discounted_solve");
  const Index d = p.entries().rows();
  const Matrix m = Matrix::Identity(d, d) - beta * p.entries();
  return factor(m, "discounted_solve").solve(f);
}

Pmf generator_invariant(const GeneratorMatrix& a) {
  return stationary_from_balance(a.entries(), "generator_invariant");
}

PoissonSolution generator_poisson(const GeneratorMatrix& a, const Vector& kappa, std::size_t x0) {
  const std::size_t d = a.size();
  check_length(kappa, d, "generator_poisson");
  if (x0 >= d) throw StructuralError("generator_poisson: reference state out of range");
  const Pmf pi = generator_invariant(a);
  const double mean = pi.mean(kappa);
  const auto ref = static_cast<Index>(x0);

  Matrix system = a.entries();
  Vector rhs = Vector::Constant(kappa.size(), mean) - kappa;
  system.row(ref).setZero();
  system(ref, ref) = 1.0;
  rhs(ref) = 0.0;
  Vector g = factor(system, "generator_poisson").solve(rhs);
  g(ref) = 0.0;

  // The dropped balance equation at x0 holds only if mean is consistent.
  const double dropped = a.entries().row(ref).dot(g) - (mean - kappa(ref));
  const double scale = std::max(1.0, kappa.cwiseAbs().maxCoeff());
  if (!(std::abs(dropped) <= 1e-9 * scale)) {
    std::ostringstream msg;
    msg << "generator_poisson: inconsistent system, residual " << dropped << " at reference row";
    throw DegeneracyError(msg.str());
  }
  return PoissonSolution{std::move(g), mean, x0};
}

double generator_poisson_residual(const GeneratorMatrix& a, const PoissonSolution& sol,
                                  const Vector& kappa) {
  const Vector r = a.entries() * sol.h - Vector::Constant(kappa.size(), sol.mean) + kappa;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace mdpode
