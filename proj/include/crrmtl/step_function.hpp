#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "crrmtl/errors.hpp"
#include "crrmtl/numeric.hpp"

namespace crrmtl {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// f(t) = values[i] for the largest knot[i] <= t, and `initial` before the
/// first knot. Knots are strictly increasing and stored with cumulative values
/// so evaluation is a binary search.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double initial) : initial_(initial) {}

  StepFunction(std::vector<double> knots, std::vector<double> values, double initial)
      : knots_(std::move(knots)), values_(std::move(values)), initial_(initial) {
    if (knots_.size() != values_.size()) throw DomainError("step function: knots and values differ in length");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i] > knots_[i - 1])) throw DomainError("step function: knots must be strictly increasing");
    }
  }

  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> values() const noexcept { return values_; }
  double initial() const noexcept { return initial_; }
  std::size_t size() const noexcept { return knots_.size(); }

  double operator()(double t) const noexcept {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  /// f(t-), the value just before t.
  double left_limit(double t) const noexcept {
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
    if (it == knots_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
  }

  /// Exact area under f over [0, upper].
  double integral(double upper) const {
    if (!(upper > 0.0)) throw DomainError("integration bound must be positive");
    return area(0.0, upper);
  }

  /// Exact area under f over [lower, upper], 0 <= lower <= upper.
  double integral(double lower, double upper) const {
    if (lower < 0.0 || upper < lower) throw DomainError("integration interval must satisfy 0 <= lower <= upper");
    return area(lower, upper);
  }

 private:
  double area(double lower, double upper) const {
    CompensatedSum acc;
    double left = lower;
    double level = (*this)(lower);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), lower);
    for (; it != knots_.end() && *it < upper; ++it) {
      acc += level * (*it - left);
      left = *it;
      level = values_[static_cast<std::size_t>(it - knots_.begin())];
    }
    acc += level * (upper - left);
    return acc.value();
  }

  std::vector<double> knots_;
  std::vector<double> values_;
  double initial_ = 0.0;
};

/// Convenience wrapper matching the estimator vocabulary.
inline double integrate_step(const StepFunction& f, double upper) { return f.integral(upper); }

}  // namespace crrmtl
