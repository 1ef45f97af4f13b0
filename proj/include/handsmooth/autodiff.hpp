#pragma once

// Tape-based reverse-mode automatic differentiation.
//
// `ad::Var` is a scalar that records every arithmetic operation onto the
// thread's active `Tape`. It plugs into Eigen as a custom scalar type, so the
// same templated kinematics / projection / loss code runs on `double` (plain
// evaluation, finite differences) and on `ad::Var` (gradient recording).
//
// Constants (Vars created from a double) never touch the tape. Only values
// that depend on a recorded variable allocate nodes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "handsmooth/errors.hpp"

namespace handsmooth::ad {

// Raised when a recorded operation leaves its domain (division by zero, sqrt
// of a negative or zero argument). `site()` names the primitive.
class DomainError : public Error {
 public:
  DomainError(std::string site, const std::string& what)
      : Error(site + ": " + what), site_(std::move(site)) {}
  const std::string& site() const { return site_; }

 private:
  std::string site_;
};

class Tape {
 public:
  using Index = std::int32_t;
  static constexpr Index kNone = -1;

  struct Node {
    Index lhs;
    Index rhs;
    double d_lhs;
    double d_rhs;
  };

  Index push(Index lhs, double d_lhs, Index rhs = kNone, double d_rhs = 0.0) {
    nodes_.push_back({lhs, rhs, d_lhs, d_rhs});
    return static_cast<Index>(nodes_.size() - 1);
  }

  Index variable() { return push(kNone, 0.0); }

  std::size_t size() const { return nodes_.size(); }

  // Drops all nodes but keeps the allocation for the next recording.
  void clear() { nodes_.clear(); }

  // Single reverse sweep from `output`; returns d output / d node for the
  // first `num_leaves` nodes.
  Eigen::VectorXd backprop(Index output, Eigen::Index num_leaves) const;

  static Tape* active() { return active_; }

 private:
  friend class TapeScope;
  std::vector<Node> nodes_;
  static thread_local Tape* active_;
};

// Makes `tape` the recording target for the current thread for the lifetime
// of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : previous_(Tape::active_) { Tape::active_ = &tape; }
  ~TapeScope() { Tape::active_ = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

class Var {
 public:
  using Index = Tape::Index;

  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT: implicit constant
  Var(double value, Index index) : value_(value), index_(index) {}

  double value() const { return value_; }
  Index index() const { return index_; }
  bool is_constant() const { return index_ == Tape::kNone; }

  Var& operator+=(const Var& o) { return *this = *this + o; }
  Var& operator-=(const Var& o) { return *this = *this - o; }
  Var& operator*=(const Var& o) { return *this = *this * o; }
  Var& operator/=(const Var& o) { return *this = *this / o; }

  friend Var operator+(const Var& a, const Var& b) {
    return unary_or_binary(a.value_ + b.value_, a, 1.0, b, 1.0);
  }
  friend Var operator-(const Var& a, const Var& b) {
    return unary_or_binary(a.value_ - b.value_, a, 1.0, b, -1.0);
  }
  friend Var operator*(const Var& a, const Var& b) {
    return unary_or_binary(a.value_ * b.value_, a, b.value_, b, a.value_);
  }
  friend Var operator/(const Var& a, const Var& b) {
    if (b.value_ == 0.0 && !(a.is_constant() && b.is_constant())) {
      throw DomainError("div", "division by zero");
    }
    const double q = a.value_ / b.value_;
    return unary_or_binary(q, a, 1.0 / b.value_, b, -q / b.value_);
  }
  friend Var operator-(const Var& a) { return unary_or_binary(-a.value_, a, -1.0, Var(), 0.0); }
  friend Var operator+(const Var& a) { return a; }

  friend bool operator<(const Var& a, const Var& b) { return a.value_ < b.value_; }
  friend bool operator>(const Var& a, const Var& b) { return a.value_ > b.value_; }
  friend bool operator<=(const Var& a, const Var& b) { return a.value_ <= b.value_; }
  friend bool operator>=(const Var& a, const Var& b) { return a.value_ >= b.value_; }
  friend bool operator==(const Var& a, const Var& b) { return a.value_ == b.value_; }
  friend bool operator!=(const Var& a, const Var& b) { return a.value_ != b.value_; }

  friend Var sin(const Var& a) { return unary(std::sin(a.value_), a, std::cos(a.value_)); }
  friend Var cos(const Var& a) { return unary(std::cos(a.value_), a, -std::sin(a.value_)); }
  friend Var exp(const Var& a) {
    const double e = std::exp(a.value_);
    return unary(e, a, e);
  }
  friend Var sqrt(const Var& a) {
    if (!a.is_constant() && !(a.value_ > 0.0)) {
      throw DomainError("sqrt", "argument " + std::to_string(a.value_) + " is not positive");
    }
    const double s = std::sqrt(a.value_);
    return unary(s, a, a.is_constant() ? 0.0 : 0.5 / s);
  }
  // Exact absolute value; subgradient 0 at the origin. Losses use
  // `smooth_abs` instead.
  friend Var abs(const Var& a) {
    const double sign = a.value_ > 0.0 ? 1.0 : (a.value_ < 0.0 ? -1.0 : 0.0);
    return unary(std::abs(a.value_), a, sign);
  }
  friend bool isfinite(const Var& a) { return std::isfinite(a.value_); }

 private:
  static Var unary(double value, const Var& a, double d_a) {
    if (a.is_constant()) return Var(value);
    return Var(value, Tape::active()->push(a.index_, d_a));
  }
  static Var unary_or_binary(double value, const Var& a, double d_a, const Var& b, double d_b) {
    if (a.is_constant()) {
      if (b.is_constant()) return Var(value);
      return Var(value, Tape::active()->push(b.index_, d_b));
    }
    if (b.is_constant()) return Var(value, Tape::active()->push(a.index_, d_a));
    return Var(value, Tape::active()->push(a.index_, d_a, b.index_, d_b));
  }

  double value_ = 0.0;
  Index index_ = Tape::kNone;
};

}  // namespace handsmooth::ad

namespace Eigen {

template <>
struct NumTraits<handsmooth::ad::Var> : NumTraits<double> {
  using Real = handsmooth::ad::Var;
  using NonInteger = handsmooth::ad::Var;
  using Nested = handsmooth::ad::Var;
  using Literal = handsmooth::ad::Var;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2,
    MulCost = 2
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<handsmooth::ad::Var, double, BinaryOp> {
  using ReturnType = handsmooth::ad::Var;
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, handsmooth::ad::Var, BinaryOp> {
  using ReturnType = handsmooth::ad::Var;
};

}  // namespace Eigen

namespace handsmooth::ad {

inline double value(double x) { return x; }
inline double value(const Var& x) { return x.value(); }

// Smoothing width of `smooth_abs`.
inline constexpr double kAbsSmoothing = 1e-8;

// sqrt(s + delta^2) - delta for s >= 0, evaluated as s / (sqrt(s + delta^2) + delta)
// to avoid cancellation.
template <typename Scalar>
Scalar smooth_sqrt(const Scalar& s, double delta = kAbsSmoothing) {
  using std::sqrt;
  return s / (sqrt(s + delta * delta) + delta);
}

// |x|_delta = sqrt(x^2 + delta^2) - delta. Differentiable at 0, within delta
// of |x| everywhere.
template <typename Scalar>
Scalar smooth_abs(const Scalar& x, double delta = kAbsSmoothing) {
  return smooth_sqrt<Scalar>(x * x, delta);
}

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct Gradient {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Evaluates `objective` on `params` while recording, then runs one backward
// pass. `objective` must accept `const VectorX<Var>&` and return `Var`.
template <typename Objective>
Gradient record_and_backprop(Objective&& objective, const Eigen::VectorXd& params) {
  thread_local Tape tape;
  tape.clear();
  TapeScope scope(tape);

  VectorX<Var> x(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) x[i] = Var(params[i], tape.variable());

  const Var out = objective(std::as_const(x));
  Gradient result;
  result.loss = out.value();
  if (out.is_constant()) {
    result.grad = Eigen::VectorXd::Zero(params.size());
  } else {
    result.grad = tape.backprop(out.index(), params.size());
  }
  return result;
}

// max_i |grad_AD[i] - grad_FD[i]| / max(1, |grad_FD[i]|), central differences
// with step h in the unit-scaled coordinates u_i = x_i / scale[i]. `objective`
// must be callable on both `VectorX<Var>` and `Eigen::VectorXd` (a generic
// lambda over the scalar type).
template <typename Objective>
double check_gradient(Objective&& objective, const Eigen::VectorXd& params, double h, const Eigen::VectorXd& scale) {
  if (!(h > 0.0)) throw InvalidArgument("check_gradient: step must be positive");
  if (scale.size() != params.size()) throw InvalidArgument("check_gradient: scale length mismatch");
  if (!(scale.array() > 0.0).all()) throw InvalidArgument("check_gradient: scales must be positive");
  const Gradient ad = record_and_backprop(objective, params);

  Eigen::VectorXd x = params;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double p = x[i];
    x[i] = p + h * scale[i];
    const double f_plus = objective(std::as_const(x));
    x[i] = p - h * scale[i];
    const double f_minus = objective(std::as_const(x));
    x[i] = p;
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double err = std::abs(scale[i] * ad.grad[i] - fd) / std::max(1.0, std::abs(fd));
    if (std::isnan(err)) return err;
    worst = std::max(worst, err);
  }
  return worst;
}

template <typename Objective>
double check_gradient(Objective&& objective, const Eigen::VectorXd& params, double h) {
  return check_gradient(std::forward<Objective>(objective), params, h, Eigen::VectorXd::Ones(params.size()));
}

}  // namespace handsmooth::ad
