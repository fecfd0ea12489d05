#pragma once

#include <cstddef>

#include "mdpode/model.hpp"

namespace mdpode {

// Z = [I - P + 1 (x) pi]^{-1} together with the invariant pmf used to build it.
struct FundamentalMatrix {
  Matrix z;
  Pmf pi;
};

// Normalized solution of Poisson's equation P h = h - f + mean, h(x0) = 0.
// For generators the equation reads A h = mean - f.
struct PoissonSolution {
  Vector h;
  double mean;
  std::size_t reference_state;
};

// Rate matrix: nonnegative off-diagonal entries, zero row sums.
class GeneratorMatrix {
 public:
  explicit GeneratorMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }

 private:
  Matrix entries_;
};

// Unique pi with pi P = pi. Dense LU on (P^T - I) with one balance equation
// swapped for the normalization row. Throws DegeneracyError when the system
// is singular or the result is not strictly positive.
Pmf invariant_pmf(const StochasticMatrix& p);

FundamentalMatrix fundamental_matrix(const StochasticMatrix& p, const Pmf& pi);

// h(x) = sum_x' [Z(x,x') - Z(x0,x')] f(x'), mean = pi(f).
PoissonSolution poisson_solve(const FundamentalMatrix& fm, const Vector& f, std::size_t x0);
PoissonSolution poisson_solve(const StochasticMatrix& p, const Vector& f, std::size_t x0);

// sup |P h - h + f - mean|
double poisson_residual(const StochasticMatrix& p, const PoissonSolution& sol, const Vector& f);

// H = (I - beta P)^{-1} f, the unique solution of f + beta P H = H.
Vector discounted_solve(const StochasticMatrix& p, const Vector& f, double beta);

Pmf generator_invariant(const GeneratorMatrix& a);

// A G = mean - kappa with G(x0) = 0 and mean = pi(kappa).
PoissonSolution generator_poisson(const GeneratorMatrix& a, const Vector& kappa, std::size_t x0);

// sup |A G - mean + kappa|
double generator_poisson_residual(const GeneratorMatrix& a, const PoissonSolution& sol,
                                  const Vector& kappa);

}  // namespace mdpode
