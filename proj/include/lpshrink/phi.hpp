#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "lpshrink/format.hpp"
#include "lpshrink/pnorm.hpp"

namespace lpshrink {

/// Scaling constant of the admissible shrinkage band,
///   gamma(d,p,alpha) = min(1, d^{(2-p-alpha)/p}) * (1 - alpha (d-1)/(d-2)),
/// with the analytic limit d^{-1} for the sup norm. Defined for d >= 3 and
/// 0 <= alpha < (d-2)/(d-1); the result lies in (0, 1].
inline double band_gamma(int d, PNorm p, double alpha) {
  if (d < 3) {
    throw std::invalid_argument("band_gamma: requires d >= 3, got d = " + std::to_string(d));
  }
  const double alpha_max = static_cast<double>(d - 2) / static_cast<double>(d - 1);
  if (!(alpha >= 0.0 && alpha < alpha_max)) {
    throw std::invalid_argument("band_gamma: requires 0 <= alpha < (d-2)/(d-1) = " +
                                format_double(alpha_max) + ", got alpha = " +
                                format_double(alpha));
  }
  const double dd = static_cast<double>(d);
  const double shape = 1.0 - alpha * (dd - 1.0) / (dd - 2.0);
  const double scale =
      p.is_sup() ? 1.0 / dd : std::min(1.0, std::pow(dd, (2.0 - p.value() - alpha) / p.value()));
  return scale * shape;
}

/// Upper edge of the band of admissible phi values: 2(d-2) gamma(d,p,alpha).
inline double phi_band_limit(int d, PNorm p, double alpha) {
  return 2.0 * static_cast<double>(d - 2) * band_gamma(d, p, alpha);
}

/// Named choice of the shrinkage profile phi. `Auto` resolves to the band
/// boundary constant at configuration time.
struct PhiSpec {
  enum class Kind { Constant, DS, DSUnknown, Auto };

  Kind kind = Kind::Auto;
  double c = 0.0;       // Constant
  double lambda = 0.0;  // DS / DSUnknown
  int n = 0;            // DSUnknown

  static PhiSpec constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("PhiSpec: constant requires c >= 0");
    }
    PhiSpec s;
    s.kind = Kind::Constant;
    s.c = c;
    return s;
  }
  static PhiSpec ds(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("PhiSpec: ds requires lambda > 0");
    }
    PhiSpec s;
    s.kind = Kind::DS;
    s.lambda = lambda;
    return s;
  }
  static PhiSpec ds_unknown(double lambda, int n) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("PhiSpec: ds-unknown requires lambda > 0");
    }
    if (n < 1) throw std::invalid_argument("PhiSpec: ds-unknown requires n >= 1");
    PhiSpec s;
    s.kind = Kind::DSUnknown;
    s.lambda = lambda;
    s.n = n;
    return s;
  }
  static PhiSpec automatic() { return PhiSpec{}; }
};

/// Text grammar: `constant:<c>`, `ds:<lambda>`, `ds-unknown:<lambda>`, `auto`.
/// The ds-unknown sample size is supplied separately (CLI --n).
inline PhiSpec parse_phi_spec(const std::string& text) {
  auto numeric_tail = [&](const std::string& prefix) {
    const std::string tail = text.substr(prefix.size());
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("phi: bad numeric value in \"" + text + "\"");
    }
    if (pos != tail.size() || !std::isfinite(v)) {
      throw std::invalid_argument("phi: bad numeric value in \"" + text + "\"");
    }
    return v;
  };
  if (text == "auto") return PhiSpec::automatic();
  if (text.rfind("constant:", 0) == 0) return PhiSpec::constant(numeric_tail("constant:"));
  if (text.rfind("ds-unknown:", 0) == 0) {
    PhiSpec s;
    s.kind = PhiSpec::Kind::DSUnknown;
    s.lambda = numeric_tail("ds-unknown:");
    if (!(s.lambda > 0.0)) throw std::invalid_argument("phi: ds-unknown requires lambda > 0");
    s.n = 0;  // filled in from context before make_phi
    return s;
  }
  if (text.rfind("ds:", 0) == 0) return PhiSpec::ds(numeric_tail("ds:"));
  throw std::invalid_argument(
      "phi: expected constant:<c>, ds:<lambda>, ds-unknown:<lambda> or auto, got \"" + text +
      "\"");
}

inline std::string render_phi_spec(const PhiSpec& spec) {
  switch (spec.kind) {
    case PhiSpec::Kind::Constant:
      return "constant:" + format_double(spec.c);
    case PhiSpec::Kind::DS:
      return "ds:" + format_double(spec.lambda);
    case PhiSpec::Kind::DSUnknown:
      return "ds-unknown:" + format_double(spec.lambda);
    case PhiSpec::Kind::Auto:
      return "auto";
  }
  return "auto";
}

/// Evaluable shrinkage profile v -> phi(v) with its analytic derivative and a
/// finite sup. Immutable after construction; shareable across workers.
///
/// Constant(c):      phi == c.
/// DS(lambda):       phi(v) = 2(d-2)gamma / (1 + lambda v^K), K = d-2-alpha(d-1);
///                   decreasing, solves the zero-margin equation of the band.
/// DSUnknown(l., n): same numerator with exponent K / (1 + 2K/(n+2)).
class PhiFunction {
 public:
  double eval(double v) const {
    if (spec_.kind == PhiSpec::Kind::Constant) return amplitude_;
    return amplitude_ / (1.0 + spec_.lambda * std::pow(v, exponent_));
  }
  double deriv(double v) const {
    if (spec_.kind == PhiSpec::Kind::Constant) return 0.0;
    const double t = spec_.lambda * std::pow(v, exponent_);
    const double denom = 1.0 + t;
    return -amplitude_ * exponent_ * t / (v * denom * denom);
  }
  /// Finite upper bound: c for constants, the band limit for the DS families
  /// (approached as v -> 0, never attained for v > 0).
  double sup() const { return amplitude_; }

  /// sup() - eval(v) without cancellation: for the decaying families the
  /// direct subtraction loses all precision once lambda v^K is below 1e-7.
  double sup_gap(double v) const {
    if (spec_.kind == PhiSpec::Kind::Constant) return 0.0;
    const double t = spec_.lambda * std::pow(v, exponent_);
    return amplitude_ * t / (1.0 + t);
  }

  bool is_constant() const { return spec_.kind == PhiSpec::Kind::Constant; }
  double constant_value() const {
    if (!is_constant()) throw std::logic_error("PhiFunction: not a constant profile");
    return amplitude_;
  }
  /// True when phi(v) < sup() strictly for every v > 0.
  bool strictly_below_sup() const { return !is_constant(); }

  /// Spec after Auto resolution, so reports show the concrete constant.
  const PhiSpec& spec() const { return spec_; }

 private:
  friend PhiFunction make_phi(const PhiSpec&, int, PNorm, double);
  PhiSpec spec_;
  double amplitude_ = 0.0;
  double exponent_ = 0.0;
};

/// Builds the evaluable profile for `spec` in the context (d, p, alpha).
/// Auto resolves here, at configuration time, to Constant(2(d-2)gamma).
inline PhiFunction make_phi(const PhiSpec& spec, int d, PNorm p, double alpha) {
  PhiFunction f;
  switch (spec.kind) {
    case PhiSpec::Kind::Constant:
      if (!(spec.c >= 0.0)) throw std::invalid_argument("make_phi: constant requires c >= 0");
      f.spec_ = spec;
      f.amplitude_ = spec.c;
      return f;
    case PhiSpec::Kind::Auto:
      f.spec_ = PhiSpec::constant(phi_band_limit(d, p, alpha));
      f.amplitude_ = f.spec_.c;
      return f;
    case PhiSpec::Kind::DS: {
      f.spec_ = spec;
      f.amplitude_ = phi_band_limit(d, p, alpha);
      f.exponent_ = static_cast<double>(d - 2) - alpha * static_cast<double>(d - 1);
      return f;
    }
    case PhiSpec::Kind::DSUnknown: {
      if (spec.n < 1) throw std::invalid_argument("make_phi: ds-unknown requires n >= 1");
      f.spec_ = spec;
      f.amplitude_ = phi_band_limit(d, p, alpha);
      const double k = static_cast<double>(d - 2) - alpha * static_cast<double>(d - 1);
      f.exponent_ = k / (1.0 + 2.0 * k / (static_cast<double>(spec.n) + 2.0));
      return f;
    }
  }
  throw std::invalid_argument("make_phi: unknown phi kind");
}

}  // namespace lpshrink
