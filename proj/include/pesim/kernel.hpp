#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pesim/errors.hpp"

namespace pesim {

/// Nonnegative influence kernel phi(r) of inter-agent distance, r >= 0.
///
/// Three families are supported, each with a derivable Lipschitz constant:
///   - constant:          phi(r) = c
///   - piecewise_linear:  linear interpolation through a knot table
///                        (r_0 = 0 < r_1 < ...), constant past the last knot
///   - rational_decay:    phi(r) = a / (1 + b r^2)^p
///
/// A declared Lipschitz bound may override the derived one via
/// set_lipschitz_bound.
template <typename Scalar = double>
class InfluenceKernel {
 public:
  enum class Family { constant, piecewise_linear, rational_decay };

  static InfluenceKernel constant(Scalar c) {
    if (!(c >= Scalar(0))) throw std::invalid_argument("constant kernel: c must be >= 0");
    InfluenceKernel k;
    k.family_ = Family::constant;
    k.a_ = c;
    k.lipschitz_ = Scalar(0);
    return k;
  }

  static InfluenceKernel piecewise_linear(std::vector<Scalar> radii, std::vector<Scalar> values) {
    if (radii.size() != values.size() || radii.empty())
      throw std::invalid_argument("piecewise-linear kernel: knot tables must be nonempty and equal length");
    if (radii.front() != Scalar(0))
      throw std::invalid_argument("piecewise-linear kernel: first knot must be at r = 0");
    Scalar max_slope = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(values[i] >= Scalar(0)))
        throw std::invalid_argument("piecewise-linear kernel: knot values must be >= 0");
      if (i > 0) {
        if (!(radii[i] > radii[i - 1]))
          throw std::invalid_argument("piecewise-linear kernel: knot radii must be strictly increasing");
        max_slope = std::max(max_slope, std::abs(values[i] - values[i - 1]) / (radii[i] - radii[i - 1]));
      }
    }
    InfluenceKernel k;
    k.family_ = Family::piecewise_linear;
    k.radii_ = std::move(radii);
    k.values_ = std::move(values);
    k.lipschitz_ = max_slope;
    return k;
  }

  static InfluenceKernel rational_decay(Scalar a, Scalar b, Scalar p) {
    if (!(a > Scalar(0))) throw std::invalid_argument("rational-decay kernel: a must be > 0");
    if (!(b >= Scalar(0))) throw std::invalid_argument("rational-decay kernel: b must be >= 0");
    if (!(p >= Scalar(0))) throw std::invalid_argument("rational-decay kernel: p must be >= 0");
    InfluenceKernel k;
    k.family_ = Family::rational_decay;
    k.a_ = a;
    k.b_ = b;
    k.p_ = p;
    // |phi'| peaks at r^2 = 1/(b(2p+1)); zero when the kernel is flat.
    if (b == Scalar(0) || p == Scalar(0)) {
      k.lipschitz_ = Scalar(0);
    } else {
      using std::pow;
      using std::sqrt;
      const Scalar q = 2 * p + 1;
      k.lipschitz_ = 2 * a * p * sqrt(b) / sqrt(q) * pow(q / (q + 1), p + 1);
    }
    return k;
  }

  /// Evaluates phi at distance r >= 0. Never returns a negative value.
  Scalar operator()(Scalar r) const {
    switch (family_) {
      case Family::constant:
        return a_;
      case Family::piecewise_linear: {
        if (r <= radii_.front()) return values_.front();
        if (r >= radii_.back()) return values_.back();
        auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
        const std::size_t hi = static_cast<std::size_t>(it - radii_.begin());
        const Scalar w = (r - radii_[hi - 1]) / (radii_[hi] - radii_[hi - 1]);
        return values_[hi - 1] + w * (values_[hi] - values_[hi - 1]);
      }
      case Family::rational_decay: {
        const Scalar u = 1 + b_ * r * r;
        if (p_ == Scalar(0)) return a_;
        if (p_ == Scalar(1)) return a_ / u;
        if (p_ == Scalar(2)) return a_ / (u * u);
        return a_ * std::pow(u, -p_);
      }
    }
    return Scalar(0);  // unreachable
  }

  Family family() const { return family_; }
  Scalar lipschitz_bound() const { return lipschitz_; }

  InfluenceKernel& set_lipschitz_bound(Scalar bound) {
    lipschitz_ = bound;
    return *this;
  }

  // Family parameters, exposed for config round-tripping.
  Scalar constant_value() const { return a_; }
  const std::vector<Scalar>& knot_radii() const { return radii_; }
  const std::vector<Scalar>& knot_values() const { return values_; }
  Scalar decay_a() const { return a_; }
  Scalar decay_b() const { return b_; }
  Scalar decay_p() const { return p_; }

 private:
  InfluenceKernel() = default;

  Family family_ = Family::constant;
  Scalar a_ = 1;
  Scalar b_ = 0;
  Scalar p_ = 0;
  std::vector<Scalar> radii_;
  std::vector<Scalar> values_;
  Scalar lipschitz_ = 0;
};

using InfluenceKernelXd = InfluenceKernel<double>;

}  // namespace pesim
