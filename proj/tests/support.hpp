#pragma once

// Random instances and slow reference computations shared by the test
// binaries. Nothing here calls into the library's solvers; the oracles use
// explicit loops, power iteration and series so that they fail independently.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "mdpode/model.hpp"

namespace testing_support {

using mdpode::Matrix;
using mdpode::Vector;

// Rows drawn uniformly from [floor, 1] and normalized.
inline Matrix random_stochastic(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                double floor = 0.05) {
  std::uniform_real_distribution<double> unif(floor, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
  return v;
}

// Strictly positive kernels, so the assembled chain is primitive.
inline mdpode::KLModel random_model(std::mt19937_64& rng, std::size_t du, std::size_t dn,
                                    std::size_t x0 = 0) {
  const auto d = static_cast<Eigen::Index>(du * dn);
  return mdpode::KLModel(mdpode::StateSpace::numbered(du, dn),
                         mdpode::NatureKernel(random_stochastic(rng, d, static_cast<Eigen::Index>(dn))),
                         mdpode::ControlKernel(random_stochastic(rng, d, static_cast<Eigen::Index>(du))),
                         random_vector(rng, d), x0);
}

// Invariant pmf by iterating mu <- mu P from uniform.
inline Vector power_invariant(const Matrix& p, int iterations = 20000) {
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Constant(p.rows(), 1.0 / p.rows());
  for (int k = 0; k < iterations; ++k) {
    const Eigen::RowVectorXd next = mu * p;
    const double change = (next - mu).cwiseAbs().maxCoeff();
    mu = next;
    if (change < 1e-16) break;
  }
  return mu.transpose() / mu.sum();
}

// sum_{n=0}^{terms-1} (P - 1 pi)^n
inline Matrix fundamental_series(const Matrix& p, const Vector& pi, int terms) {
  const Eigen::Index d = p.rows();
  const Matrix centered = p - Vector::Ones(d) * pi.transpose();
  Matrix term = Matrix::Identity(d, d);
  Matrix sum = Matrix::Zero(d, d);
  for (int n = 0; n < terms; ++n) {
    sum += term;
    term = term * centered;
  }
  return sum;
}

// sum_{n=0}^{terms-1} beta^n P^n f
inline Vector neumann_series(const Matrix& p, const Vector& f, double beta, int terms) {
  Vector term = f;
  Vector sum = Vector::Zero(f.size());
  for (int n = 0; n < terms; ++n) {
    sum += term;
    term = beta * (p * term);
  }
  return sum;
}

// Transition matrix of control kernel r combined with the model's nature
// kernel, by explicit enumeration over (x_u', x_n').
inline Matrix assemble_by_loops(const mdpode::KLModel& model, const Matrix& r) {
  const std::size_t du = model.space().size_u();
  const std::size_t dn = model.space().size_n();
  const std::size_t d = du * dn;
  Matrix p(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t u = 0; u < du; ++u) {
      for (std::size_t n = 0; n < dn; ++n) {
        p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(u * dn + n)) =
            r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(u)) *
            model.q0().entries()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(n));
      }
    }
  }
  return p;
}

// Twisted control matrix by direct exponentiation, no max shift.
inline Matrix naive_twisted_control(const mdpode::KLModel& model, const Vector& h) {
  const std::size_t du = model.space().size_u();
  const std::size_t dn = model.space().size_n();
  const std::size_t d = du * dn;
  Matrix r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(du));
  for (std::size_t x = 0; x < d; ++x) {
    double norm = 0.0;
    for (std::size_t u = 0; u < du; ++u) {
      double cond = 0.0;
      for (std::size_t n = 0; n < dn; ++n) {
        cond += model.q0().entries()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(n)) *
                h(static_cast<Eigen::Index>(u * dn + n));
      }
      const double w =
          model.r0().entries()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(u)) *
          std::exp(cond);
      r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(u)) = w;
      norm += w;
    }
    r.row(static_cast<Eigen::Index>(x)) /= norm;
  }
  return r;
}

// zeta pi(U) - K for control kernel r: the convex-program objective,
// evaluated with power iteration and the bivariate relative entropy.
inline double objective_by_enumeration(const mdpode::KLModel& model, const Matrix& r,
                                       double zeta) {
  const Matrix p = assemble_by_loops(model, r);
  const Matrix& p0 = model.p0().entries();
  const Vector pi = power_invariant(p);
  double k = 0.0;
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      const double joint = pi(x) * p(x, y);
      if (joint > 0.0) k += joint * std::log(joint / (pi(x) * p0(x, y)));
    }
  }
  return zeta * pi.dot(model.utility()) - k;
}

inline double sup(const Vector& v) { return v.cwiseAbs().maxCoeff(); }
inline double sup(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
