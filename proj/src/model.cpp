#include "mdpode/model.hpp"

#include <cmath>
#include <sstream>

#include "mdpode/errors.hpp"

namespace mdpode {

namespace {

using Index = Eigen::Index;

Index as_index(std::size_t i) { return static_cast<Index>(i); }

// Boolean support of a matrix as 0/1 doubles. Products stay exact because the
// entries are small integer path counts.
Matrix support_of(const Matrix& m) {
  return (m.array() > kSupportThreshold).cast<double>().matrix();
}

Matrix bool_product(const Matrix& a, const Matrix& b) {
  return ((a * b).array() > 0.5).cast<double>().matrix();
}

bool all_positive(const Matrix& m) { return (m.array() > 0.5).all(); }

std::pair<Index, Index> first_zero(const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.5) return {i, j};
    }
  }
  return {0, 0};
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> xu_labels, std::vector<std::string> xn_labels)
    : xu_labels_(std::move(xu_labels)), xn_labels_(std::move(xn_labels)) {
  if (xu_labels_.empty() || xn_labels_.empty()) {
    throw ValidationError("state space: both components need at least one label");
  }
}

std::size_t StateSpace::index(std::size_t xu, std::size_t xn) const {
  if (xu >= size_u() || xn >= size_n()) {
    throw StructuralError("state space: component index out of range");
  }
  return xu * size_n() + xn;
}

std::pair<std::size_t, std::size_t> StateSpace::split(std::size_t x) const {
  if (x >= size()) throw StructuralError("state space: flat index out of range");
  return {x / size_n(), x % size_n()};
}

std::string StateSpace::label(std::size_t x) const {
  const auto [xu, xn] = split(x);
  return xu_labels_[xu] + "," + xn_labels_[xn];
}

std::size_t StateSpace::find(const std::string& label) const {
  for (std::size_t x = 0; x < size(); ++x) {
    if (this->label(x) == label) return x;
  }
  throw ValidationError("state space: unknown state label '" + label + "'");
}

StateSpace StateSpace::numbered(std::size_t du, std::size_t dn) {
  std::vector<std::string> u;
  std::vector<std::string> n;
  for (std::size_t i = 0; i < du; ++i) u.push_back(std::to_string(i));
  for (std::size_t i = 0; i < dn; ++i) n.push_back(std::to_string(i));
  return StateSpace(std::move(u), std::move(n));
}

bool operator==(const StateSpace& a, const StateSpace& b) {
  return a.xu_labels() == b.xu_labels() && a.xn_labels() == b.xn_labels();
}

Pmf::Pmf(Vector weights, double tolerance) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw ValidationError("pmf: empty");
  for (Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_(i)) || weights_(i) < 0.0) {
      std::ostringstream msg;
      msg << "pmf: entry " << i << " = " << weights_(i) << " is not a probability";
      throw ValidationError(msg.str());
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "pmf: entries sum to " << total;
    throw ValidationError(msg.str());
  }
}

double Pmf::mean(const Vector& f) const {
  if (f.size() != weights_.size()) throw StructuralError("pmf: function has wrong length");
  return weights_.dot(f);
}

Pmf Pmf::point_mass(std::size_t size, std::size_t at) {
  Vector w = Vector::Zero(as_index(size));
  w(as_index(at)) = 1.0;
  return Pmf(std::move(w));
}

Pmf Pmf::uniform(std::size_t size) {
  return Pmf(Vector::Constant(as_index(size), 1.0 / static_cast<double>(size)));
}

namespace detail {

void validate_row_stochastic(const Matrix& m, double tolerance, const std::string& what) {
  if (m.rows() == 0 || m.cols() == 0) throw ValidationError(what + ": empty matrix");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j)) || m(i, j) < 0.0) {
        std::ostringstream msg;
        msg << what << ": entry (" << i << "," << j << ") = " << m(i, j)
            << " is not a probability";
        throw ValidationError(msg.str());
      }
    }
    const double total = m.row(i).sum();
    if (std::abs(total - 1.0) > tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << ": row " << i << " sums to " << total;
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace detail

StochasticMatrix::StochasticMatrix(Matrix entries, double tolerance)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw StructuralError("stochastic matrix: not square");
  }
  detail::validate_row_stochastic(entries_, tolerance, "stochastic matrix");
}

NatureKernel::NatureKernel(Matrix entries, double tolerance) : entries_(std::move(entries)) {
  detail::validate_row_stochastic(entries_, tolerance, "Q0");
}

ControlKernel::ControlKernel(Matrix entries, double tolerance) : entries_(std::move(entries)) {
  detail::validate_row_stochastic(entries_, tolerance, "R");
}

StochasticMatrix assemble_p0(const NatureKernel& q0, const ControlKernel& r0) {
  const std::size_t du = r0.cols();
  const std::size_t dn = q0.cols();
  const std::size_t d = du * dn;
  if (q0.rows() != d || r0.rows() != d) {
    std::ostringstream msg;
    msg << "assemble_p0: expected " << d << " rows (d_u=" << du << ", d_n=" << dn
        << "), got Q0 " << q0.rows() << " and R " << r0.rows();
    throw StructuralError(msg.str());
  }
  const Matrix& q = q0.entries();
  const Matrix& r = r0.entries();
  Matrix p(as_index(d), as_index(d));
  for (Index x = 0; x < as_index(d); ++x) {
    for (Index u = 0; u < as_index(du); ++u) {
      for (Index n = 0; n < as_index(dn); ++n) {
        p(x, u * as_index(dn) + n) = r(x, u) * q(x, n);
      }
    }
  }
  // Row x of P sums to (sum R(x,.)) * (sum Q0(x,.)), so the input row-sum
  // errors carry over additively.
  const double drift = (r.rowwise().sum().array() - 1.0).abs().maxCoeff() +
                       (q.rowwise().sum().array() - 1.0).abs().maxCoeff();
  return StochasticMatrix(std::move(p), drift + kRowSumTolerance);
}

std::size_t check_irreducible_aperiodic(const StochasticMatrix& p) {
  const Matrix b = support_of(p.entries());
  const std::size_t d = p.size();
  const std::size_t bound = d * d;

  // Full support is monotone in n once reached (every row of b is nonempty),
  // so doubling to a horizon >= d^2 decides primitivity and binary lifting
  // over the stored powers finds the exact threshold.
  std::vector<Matrix> powers{b};
  std::size_t horizon = 1;
  while (horizon < bound) {
    powers.push_back(bool_product(powers.back(), powers.back()));
    horizon *= 2;
  }
  if (!all_positive(powers.back())) {
    const auto [i, j] = first_zero(powers.back());
    std::ostringstream msg;
    msg << "chain is reducible or periodic: state " << j << " is not reached from state " << i
        << " at horizon " << horizon;
    throw ReducibilityError(msg.str(), static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }

  Matrix acc = Matrix::Identity(as_index(d), as_index(d));
  std::size_t n = 0;
  for (std::size_t k = powers.size(); k-- > 0;) {
    Matrix candidate = bool_product(acc, powers[k]);
    if (!all_positive(candidate)) {
      acc = std::move(candidate);
      n += std::size_t{1} << k;
    }
  }
  const std::size_t n0 = n + 1;
  if (n0 > bound) {
    throw ReducibilityError("chain primitivity exponent exceeds d^2", 0, 0);
  }
  return n0;
}

bool support_equivalence(const StochasticMatrix& p, const StochasticMatrix& p0) {
  if (p.size() != p0.size()) throw StructuralError("support_equivalence: size mismatch");
  return ((p.entries().array() > kSupportThreshold) ==
          (p0.entries().array() > kSupportThreshold))
      .all();
}

KLModel::KLModel(StateSpace space, NatureKernel q0, ControlKernel r0, Vector utility,
                 std::size_t reference_state)
    : space_(std::move(space)),
      q0_(std::move(q0)),
      r0_(std::move(r0)),
      utility_(std::move(utility)),
      reference_state_(reference_state),
      p0_(assemble_p0(q0_, r0_)),
      n0_(0) {
  if (q0_.cols() != space_.size_n() || r0_.cols() != space_.size_u() ||
      p0_.size() != space_.size()) {
    throw StructuralError("KL model: kernel shapes do not match the state space");
  }
  if (static_cast<std::size_t>(utility_.size()) != space_.size()) {
    throw StructuralError("KL model: utility has wrong length");
  }
  if (!utility_.allFinite()) throw ValidationError("KL model: utility must be finite");
  if (reference_state_ >= space_.size()) {
    throw ValidationError("KL model: reference state out of range");
  }
  n0_ = check_irreducible_aperiodic(p0_);
}

void StandardMDP::validate() const {
  const auto ns = static_cast<Index>(state_labels.size());
  const auto na = static_cast<Index>(action_labels.size());
  if (ns == 0 || na == 0) throw ValidationError("standard MDP: empty state or action set");
  if (transition.rows() != ns * na || transition.cols() != ns) {
    throw StructuralError("standard MDP: transition law must be (|S||A|) x |S|");
  }
  if (nominal_policy.rows() != ns || nominal_policy.cols() != na) {
    throw StructuralError("standard MDP: nominal policy must be |S| x |A|");
  }
  detail::validate_row_stochastic(transition, kRowSumTolerance, "rho");
  detail::validate_row_stochastic(nominal_policy, kRowSumTolerance, "phi0");
}

EmbeddedKernels embed_standard_mdp(const StandardMDP& m) {
  m.validate();
  StateSpace space(m.action_labels, m.state_labels);
  const auto na = static_cast<Index>(m.action_labels.size());
  const auto ns = static_cast<Index>(m.state_labels.size());
  const Index d = na * ns;
  Matrix q(d, ns);
  Matrix r(d, na);
  for (Index a = 0; a < na; ++a) {
    for (Index s = 0; s < ns; ++s) {
      const Index x = a * ns + s;
      q.row(x) = m.transition.row(s * na + a);
      r.row(x) = m.nominal_policy.row(s);
    }
  }
  return EmbeddedKernels{std::move(space), NatureKernel(std::move(q)),
                         ControlKernel(std::move(r))};
}

}  // namespace mdpode
