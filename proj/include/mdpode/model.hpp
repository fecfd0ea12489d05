#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mdpode {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Row sums of every probability object must be within this distance of 1.
inline constexpr double kRowSumTolerance = 1e-12;
// An entry counts as "positive" (in the support) when it exceeds this.
inline constexpr double kSupportThreshold = 1e-14;

// Finite state space X = X_u x X_n. Flat index layout is control-major:
// x = x_u * d_n + x_n.
class StateSpace {
 public:
  StateSpace(std::vector<std::string> xu_labels, std::vector<std::string> xn_labels);

  std::size_t size_u() const { return xu_labels_.size(); }
  std::size_t size_n() const { return xn_labels_.size(); }
  std::size_t size() const { return size_u() * size_n(); }

  std::size_t index(std::size_t xu, std::size_t xn) const;
  std::pair<std::size_t, std::size_t> split(std::size_t x) const;

  const std::vector<std::string>& xu_labels() const { return xu_labels_; }
  const std::vector<std::string>& xn_labels() const { return xn_labels_; }

  // "xu_label,xn_label"
  std::string label(std::size_t x) const;
  // Inverse of label(); throws ValidationError for unknown labels.
  std::size_t find(const std::string& label) const;

  // Labels "0".."n-1", handy for synthetic models.
  static StateSpace numbered(std::size_t du, std::size_t dn);

 private:
  std::vector<std::string> xu_labels_;
  std::vector<std::string> xn_labels_;
};

bool operator==(const StateSpace& a, const StateSpace& b);

// Probability vector. Entries are nonnegative and sum to one.
class Pmf {
 public:
  explicit Pmf(Vector weights, double tolerance = kRowSumTolerance);

  const Vector& weights() const { return weights_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  double operator()(std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }

  // pi(f) = sum_x pi(x) f(x)
  double mean(const Vector& f) const;

  static Pmf point_mass(std::size_t size, std::size_t at);
  static Pmf uniform(std::size_t size);

 private:
  Vector weights_;
};

namespace detail {
// Throws ValidationError unless every entry is finite, nonnegative and every
// row sums to one within `tolerance`. `what` prefixes the diagnostic.
void validate_row_stochastic(const Matrix& m, double tolerance, const std::string& what);
}  // namespace detail

// Square row-stochastic matrix indexed by current state.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(Matrix entries, double tolerance = kRowSumTolerance);

  const Matrix& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t x, std::size_t y) const {
    return entries_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }

 private:
  Matrix entries_;
};

// Q0: d x d_n. Row x is the law of the next nature component.
class NatureKernel {
 public:
  explicit NatureKernel(Matrix entries, double tolerance = kRowSumTolerance);
  const Matrix& entries() const { return entries_; }
  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }

 private:
  Matrix entries_;
};

// R: d x d_u. Row x is the law of the next control component.
class ControlKernel {
 public:
  explicit ControlKernel(Matrix entries, double tolerance = kRowSumTolerance);
  const Matrix& entries() const { return entries_; }
  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }

 private:
  Matrix entries_;
};

// P(x, (x_u', x_n')) = R0(x, x_u') * Q0(x, x_n').
StochasticMatrix assemble_p0(const NatureKernel& q0, const ControlKernel& r0);

// Smallest n0 such that P^n has full support for every n >= n0. Throws
// ReducibilityError when P is reducible or periodic.
std::size_t check_irreducible_aperiodic(const StochasticMatrix& p);

// True iff P and P0 have identical supports (threshold kSupportThreshold).
bool support_equivalence(const StochasticMatrix& p, const StochasticMatrix& p0);

// Nature/nurture control problem: nominal kernels, state utility and the
// state where relative value functions are pinned to zero.
class KLModel {
 public:
  KLModel(StateSpace space, NatureKernel q0, ControlKernel r0, Vector utility,
          std::size_t reference_state);

  const StateSpace& space() const { return space_; }
  const NatureKernel& q0() const { return q0_; }
  const ControlKernel& r0() const { return r0_; }
  const Vector& utility() const { return utility_; }
  std::size_t reference_state() const { return reference_state_; }
  std::size_t size() const { return space_.size(); }

  // Assembled nominal chain and its primitivity exponent, computed once.
  const StochasticMatrix& p0() const { return p0_; }
  std::size_t n0() const { return n0_; }

 private:
  StateSpace space_;
  NatureKernel q0_;
  ControlKernel r0_;
  Vector utility_;
  std::size_t reference_state_;
  StochasticMatrix p0_;
  std::size_t n0_;
};

// Ordinary finite MDP under a randomized nominal policy.
struct StandardMDP {
  std::vector<std::string> state_labels;
  std::vector<std::string> action_labels;
  // Row s * |A| + a is rho(. | s, a) over S.
  Matrix transition;
  // Row s is phi0(. | s) over A.
  Matrix nominal_policy;

  void validate() const;
};

struct EmbeddedKernels {
  StateSpace space;
  NatureKernel q0;
  ControlKernel r0;
};

// Chain on X = A x S with X_n(t) = state, X_u(t) = previous action.
EmbeddedKernels embed_standard_mdp(const StandardMDP& m);

}  // namespace mdpode
