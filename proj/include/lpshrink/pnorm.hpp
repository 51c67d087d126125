#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "lpshrink/format.hpp"

namespace lpshrink {

/// Exponent of an lp norm: any positive real (quasi-norms 0 < p < 1 included)
/// or the sup norm as a distinguished case. The sup norm is not a sentinel
/// float, so exponent expressions such as (2-p-alpha)/p are evaluated at
/// their analytic limit instead of producing NaN.
class PNorm {
 public:
  static PNorm finite(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("PNorm: exponent must be a positive finite real");
    }
    return PNorm(p, false);
  }
  static PNorm sup() { return PNorm(0.0, true); }

  bool is_sup() const { return sup_; }
  double value() const {
    if (sup_) throw std::logic_error("PNorm: sup norm has no finite exponent");
    return p_;
  }

  friend bool operator==(const PNorm& a, const PNorm& b) {
    return a.sup_ == b.sup_ && (a.sup_ || a.p_ == b.p_);
  }

 private:
  PNorm(double p, bool sup) : p_(p), sup_(sup) {}
  double p_;
  bool sup_;
};

/// Parses "inf" or a positive decimal.
inline PNorm parse_pnorm(const std::string& text) {
  if (text == "inf") return PNorm::sup();
  std::size_t pos = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("p: expected a positive decimal or \"inf\", got \"" + text + "\"");
  }
  if (pos != text.size() || !(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("p: expected a positive decimal or \"inf\", got \"" + text + "\"");
  }
  return PNorm::finite(p);
}

inline std::string render_pnorm(const PNorm& p) {
  return p.is_sup() ? std::string("inf") : format_double(p.value());
}

/// (sum |z_i|^p)^{1/p}, or max |z_i| for the sup norm. The entries are
/// rescaled by max |z_i| before powering, so quasi-norm exponents do not
/// overflow: (sum |z_i|^0.1)^10 is hopeless evaluated naively.
inline double lp_norm(std::span<const double> z, PNorm p) {
  if (z.empty()) throw std::invalid_argument("lp_norm: empty vector");
  double top = 0.0;
  for (double x : z) top = std::max(top, std::abs(x));
  if (top == 0.0) return 0.0;
  if (p.is_sup()) return top;
  const double q = p.value();
  double sum = 0.0;
  for (double x : z) sum += std::pow(std::abs(x) / top, q);
  return top * std::pow(sum, 1.0 / q);
}

/// Result of evaluating one of the norm inequalities below: both sides,
/// whether the inequality holds up to the relative tolerance, and the
/// smallest relative slack observed across the checked chain.
struct InequalityCheck {
  bool holds;
  double left;
  double right;
  double margin;
};

inline constexpr double kInequalityRelTol = 1e-9;

namespace detail {

inline double rel_margin(double left, double right) {
  const double scale = std::max({std::abs(left), std::abs(right), 1.0});
  return (right - left) / scale;
}

}  // namespace detail

/// Norm ordering chain for q > r > 0:
///   ||z||_q^r <= ||z||_r^r <= d^{1-r/q} ||z||_q^r.
/// `left`/`right` are the two ends of the chain; `margin` is the smaller of
/// the two relative slacks.
inline InequalityCheck check_norm_ordering(std::span<const double> z, double q, double r) {
  if (!(q > r && r > 0.0)) {
    throw std::invalid_argument("check_norm_ordering: requires q > r > 0");
  }
  if (z.empty()) throw std::invalid_argument("check_norm_ordering: empty vector");
  const double d = static_cast<double>(z.size());
  const double lo = std::pow(lp_norm(z, PNorm::finite(q)), r);
  const double mid = std::pow(lp_norm(z, PNorm::finite(r)), r);
  const double hi = std::pow(d, 1.0 - r / q) * lo;
  const double margin = std::min(detail::rel_margin(lo, mid), detail::rel_margin(mid, hi));
  return {margin >= -kInequalityRelTol, lo, hi, margin};
}

/// Correlation (Chebyshev sum) inequality for q >= 0, r >= 0 and all z_i != 0:
///   d * sum |z_i|^{q-r} <= (sum |z_i|^{-r}) (sum |z_i|^q).
inline InequalityCheck check_power_sum_correlation(std::span<const double> z, double q, double r) {
  if (!(q >= 0.0 && r >= 0.0)) {
    throw std::invalid_argument("check_power_sum_correlation: requires q >= 0 and r >= 0");
  }
  if (z.empty()) throw std::invalid_argument("check_power_sum_correlation: empty vector");
  for (double x : z) {
    if (x == 0.0) {
      throw std::invalid_argument(
          "check_power_sum_correlation: zero entry makes |z_i|^{-r} ill-defined");
    }
  }
  double mixed = 0.0, neg = 0.0, pos = 0.0;
  for (double x : z) {
    const double a = std::abs(x);
    mixed += std::pow(a, q - r);
    neg += std::pow(a, -r);
    pos += std::pow(a, q);
  }
  const double left = static_cast<double>(z.size()) * mixed;
  const double right = neg * pos;
  const double margin = detail::rel_margin(left, right);
  return {margin >= -kInequalityRelTol, left, right, margin};
}

/// Power-sum ratio bound on the probability simplex, for a >= 0 and b <= 1:
///   (sum s_i^a) / (sum s_i^b) <= max(1, d^{b-a}).
/// Uses the IEEE convention 0^0 = 1, so the exponent-0 sum counts every
/// coordinate.
inline InequalityCheck check_simplex_power_ratio(std::span<const double> s, double a, double b) {
  if (!(a >= 0.0 && b <= 1.0)) {
    throw std::invalid_argument("check_simplex_power_ratio: requires a >= 0 and b <= 1");
  }
  if (s.empty()) throw std::invalid_argument("check_simplex_power_ratio: empty vector");
  double total = 0.0;
  for (double x : s) {
    if (!(x >= 0.0)) {
      throw std::invalid_argument("check_simplex_power_ratio: entries must be non-negative");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("check_simplex_power_ratio: entries must sum to 1");
  }
  double num = 0.0, den = 0.0;
  for (double x : s) {
    num += std::pow(x, a);
    den += std::pow(x, b);
  }
  const double left = num / den;
  const double right = std::max(1.0, std::pow(static_cast<double>(s.size()), b - a));
  const double margin = detail::rel_margin(left, right);
  return {margin >= -kInequalityRelTol, left, right, margin};
}

}  // namespace lpshrink
