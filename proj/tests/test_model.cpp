#include <random>

#include "doctest.h"
#include "mdpode/errors.hpp"
#include "mdpode/kl_twist.hpp"
#include "mdpode/model.hpp"
#include "support.hpp"

using namespace mdpode;
using namespace testing_support;

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

BoolMatrix support_of(const Matrix& m) { return (m.array() > kSupportThreshold).matrix(); }

BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b) {
  BoolMatrix out = BoolMatrix::Constant(a.rows(), b.cols(), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (!a(i, k)) continue;
      for (Eigen::Index j = 0; j < b.cols(); ++j) out(i, j) = out(i, j) || b(k, j);
    }
  }
  return out;
}

// Support of P^n by n - 1 naive boolean products.
BoolMatrix support_power(const Matrix& p, std::size_t n) {
  BoolMatrix s = support_of(p);
  BoolMatrix out = s;
  for (std::size_t k = 1; k < n; ++k) out = bool_product(out, s);
  return out;
}

}  // namespace

TEST_CASE("state space index map is a control-major bijection") {
  const StateSpace space({"lo", "hi"}, {"a", "b", "c"});
  CHECK(space.size() == 6);
  std::vector<int> seen(6, 0);
  for (std::size_t u = 0; u < 2; ++u) {
    for (std::size_t n = 0; n < 3; ++n) {
      const std::size_t x = space.index(u, n);
      CHECK(x == u * 3 + n);
      ++seen[x];
      CHECK(space.split(x) == std::make_pair(u, n));
    }
  }
  for (int c : seen) CHECK(c == 1);
  CHECK(space.label(4) == "hi,b");
  CHECK(space.find("hi,b") == 4);
  CHECK_THROWS_AS(space.find("mid,b"), ValidationError);
  CHECK_THROWS_AS(StateSpace({}, {"a"}), Error);
}

TEST_CASE("pmf and stochastic matrix validation") {
  CHECK_NOTHROW(Pmf(Vector::Constant(4, 0.25)));
  CHECK_THROWS_AS(Pmf(Vector::Constant(4, 0.3)), ValidationError);
  Vector neg(2);
  neg << 1.5, -0.5;
  CHECK_THROWS_AS(Pmf{neg}, ValidationError);
  Vector nan(2);
  nan << std::nan(""), 1.0;
  CHECK_THROWS_AS(Pmf{nan}, ValidationError);

  Matrix p(2, 2);
  p << 0.5, 0.5, 0.49, 0.49;
  CHECK_THROWS_AS(StochasticMatrix{p}, ValidationError);
  CHECK_THROWS_AS(StochasticMatrix(Matrix::Constant(2, 3, 0.5)), StructuralError);
  // Just outside the core tolerance is refused rather than renormalized.
  p << 0.5, 0.5, 0.5, 0.5 + 1e-11;
  CHECK_THROWS_AS(StochasticMatrix{p}, ValidationError);
}

TEST_CASE("assemble_p0 small cases") {
  const StochasticMatrix single =
      assemble_p0(NatureKernel(Matrix::Ones(1, 1)), ControlKernel(Matrix::Ones(1, 1)));
  CHECK(single(0, 0) == 1.0);

  const StochasticMatrix p = assemble_p0(NatureKernel(Matrix::Ones(2, 1)),
                                         ControlKernel(Matrix::Constant(2, 2, 0.5)));
  CHECK(p.entries().isApprox(Matrix::Constant(2, 2, 0.5)));

  CHECK_THROWS_AS(assemble_p0(NatureKernel(Matrix::Ones(3, 1)),
                              ControlKernel(Matrix::Constant(2, 2, 0.5))),
                  StructuralError);
}

TEST_CASE("assemble_p0 factorizes back into its kernels") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix q = random_stochastic(rng, 4, 2, 0.0);
    const Matrix r = random_stochastic(rng, 4, 2, 0.0);
    const StochasticMatrix p = assemble_p0(NatureKernel(q), ControlKernel(r));
    CHECK(sup(Vector(p.entries().rowwise().sum().array() - 1.0)) <= 1e-12);
    // Marginalize over the nature component for R, over control for Q.
    for (Eigen::Index x = 0; x < 4; ++x) {
      for (Eigen::Index u = 0; u < 2; ++u) {
        CHECK(std::abs(p.entries()(x, u * 2) + p.entries()(x, u * 2 + 1) - r(x, u)) <= 1e-15);
      }
      for (Eigen::Index n = 0; n < 2; ++n) {
        CHECK(std::abs(p.entries()(x, n) + p.entries()(x, 2 + n) - q(x, n)) <= 1e-15);
      }
    }
  }
}

TEST_CASE("check_irreducible_aperiodic examples") {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  CHECK(check_irreducible_aperiodic(StochasticMatrix(p)) == 1);

  p << 0, 1, 1, 0;
  CHECK_THROWS_AS(check_irreducible_aperiodic(StochasticMatrix(p)), ReducibilityError);

  p << 0, 1, 0.5, 0.5;
  CHECK(check_irreducible_aperiodic(StochasticMatrix(p)) == 2);

  // Reducible: state 1 is absorbing.
  p << 0.5, 0.5, 0, 1;
  try {
    check_irreducible_aperiodic(StochasticMatrix(p));
    FAIL("expected ReducibilityError");
  } catch (const ReducibilityError& e) {
    CHECK(e.from() == 1);
    CHECK(e.to() == 0);
  }
}

TEST_CASE("primitivity exponent is the smallest full-support power") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution keep(0.35);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Eigen::Index d = 2 + trial % 5;
    Matrix p = random_stochastic(rng, d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      // Sparse rows with at least one entry.
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!keep(rng) && j != (i + 1) % d) p(i, j) = 0.0;
      }
      p.row(i) /= p.row(i).sum();
    }
    const StochasticMatrix sp(p);
    const auto d2 = static_cast<std::size_t>(d * d);
    const bool primitive = support_power(p, d2).all();
    if (!primitive) {
      CHECK_THROWS_AS(check_irreducible_aperiodic(sp), ReducibilityError);
      continue;
    }
    const std::size_t n0 = check_irreducible_aperiodic(sp);
    CHECK(n0 >= 1);
    CHECK(n0 <= d2);
    CHECK(support_power(p, n0).all());
    CHECK(support_power(p, n0 + 1).all());
    if (n0 > 1) CHECK_FALSE(support_power(p, n0 - 1).all());
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("support equivalence") {
  std::mt19937_64 rng(3);
  const Matrix p0 = random_stochastic(rng, 3, 3);
  CHECK(support_equivalence(StochasticMatrix(p0), StochasticMatrix(p0)));
  Matrix p = p0;
  p(1, 2) = 0.0;
  p.row(1) /= p.row(1).sum();
  CHECK_FALSE(support_equivalence(StochasticMatrix(p), StochasticMatrix(p0)));

  for (int trial = 0; trial < 20; ++trial) {
    const KLModel model = random_model(rng, 2, 3);
    const Vector h = random_vector(rng, 6, -20.0, 20.0);
    CHECK(support_equivalence(twist(h, model).p_h, model.p0()));
  }
}

TEST_CASE("model construction validates the nominal chain") {
  Matrix r(2, 2);
  r << 0, 1, 1, 0;
  CHECK_THROWS_AS(KLModel(StateSpace::numbered(2, 1), NatureKernel(Matrix::Ones(2, 1)),
                          ControlKernel(r), Vector::Zero(2), 0),
                  ReducibilityError);
  const Matrix half = Matrix::Constant(2, 2, 0.5);
  CHECK_THROWS_AS(KLModel(StateSpace::numbered(2, 1), NatureKernel(Matrix::Ones(2, 1)),
                          ControlKernel(half), Vector::Zero(2), 2),
                  ValidationError);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(KLModel(StateSpace::numbered(2, 1), NatureKernel(Matrix::Ones(2, 1)),
                          ControlKernel(half), bad, 0),
                  ValidationError);
  CHECK_THROWS_AS(KLModel(StateSpace::numbered(2, 1), NatureKernel(Matrix::Ones(2, 1)),
                          ControlKernel(half), Vector::Zero(3), 0),
                  StructuralError);
}

TEST_CASE("embedding a standard MDP: degenerate sizes") {
  StandardMDP one{{"s"}, {"a"}, Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  const EmbeddedKernels e1 = embed_standard_mdp(one);
  CHECK(e1.space.size() == 1);
  CHECK(e1.q0.entries()(0, 0) == 1.0);
  CHECK(e1.r0.entries()(0, 0) == 1.0);

  Matrix rho(2, 2);
  rho << 0.3, 0.7, 0.6, 0.4;
  StandardMDP single_action{{"s0", "s1"}, {"a"}, rho, Matrix::Ones(2, 1)};
  const EmbeddedKernels e2 = embed_standard_mdp(single_action);
  CHECK(e2.space.size() == 2);
  CHECK(e2.r0.entries() == Matrix::Ones(2, 1));
  CHECK(e2.q0.entries() == rho);
}

TEST_CASE("embedding matches the joint chain enumerated state by state") {
  std::mt19937_64 rng(19);
  for (std::size_t ns = 1; ns <= 4; ++ns) {
    for (std::size_t na = 1; na <= 4; ++na) {
      const auto s = static_cast<Eigen::Index>(ns);
      const auto a = static_cast<Eigen::Index>(na);
      StandardMDP m;
      for (std::size_t i = 0; i < ns; ++i) m.state_labels.push_back("s" + std::to_string(i));
      for (std::size_t i = 0; i < na; ++i) m.action_labels.push_back("a" + std::to_string(i));
      m.transition = random_stochastic(rng, s * a, s, 0.0);
      m.nominal_policy = random_stochastic(rng, s, a, 0.0);
      const EmbeddedKernels e = embed_standard_mdp(m);
      const Matrix p = assemble_p0(e.q0, e.r0).entries();

      // X = (previous action, state). The next action is drawn from the
      // policy at the current state; the next state from rho given the
      // current state and the action carried in the current X.
      for (Eigen::Index xu = 0; xu < a; ++xu) {
        for (Eigen::Index xn = 0; xn < s; ++xn) {
          for (Eigen::Index yu = 0; yu < a; ++yu) {
            for (Eigen::Index yn = 0; yn < s; ++yn) {
              const double policy = m.nominal_policy(xn, yu);
              const double law = m.transition(xn * a + xu, yn);
              CHECK(std::abs(p(xu * s + xn, yu * s + yn) - policy * law) <= 1e-14);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("standard MDP validation") {
  StandardMDP m{{"s0", "s1"}, {"a"}, Matrix::Constant(2, 2, 0.5), Matrix::Ones(3, 1)};
  CHECK_THROWS_AS(m.validate(), StructuralError);
  m.nominal_policy = Matrix::Constant(2, 1, 0.9);
  CHECK_THROWS_AS(m.validate(), ValidationError);
}
