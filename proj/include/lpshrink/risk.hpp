#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lpshrink/estimator.hpp"

namespace lpshrink {

namespace detail {

/// Power sums of the magnitudes rescaled by their maximum, t_i = |z_i|/max.
/// All members stay well scaled regardless of p; the max-norm factors cancel
/// exactly in the risk-margin expressions below.
struct ScaledPowers {
  double top = 0.0;           // max |z_i|
  std::size_t top_count = 0;  // multiplicity of the maximum (sup-norm limits)
  std::vector<double> t;      // |z_i| / top
};

inline ScaledPowers scale_magnitudes(std::span<const double> z) {
  ScaledPowers s;
  for (double x : z) s.top = std::max(s.top, std::abs(x));
  if (s.top == 0.0) return s;
  s.t.reserve(z.size());
  for (double x : z) {
    const double t = std::abs(x) / s.top;
    s.t.push_back(t);
    if (t == 1.0) ++s.top_count;
  }
  return s;
}

inline double power_sum(const std::vector<double>& t, double e) {
  double sum = 0.0;
  for (double x : t) sum += std::pow(x, e);
  return sum;
}

/// v phi'(v)/phi(v), with the 0/0 convention: zero when both vanish,
/// otherwise a domain error (the margin expressions divide by phi).
inline double log_deriv_term(const PhiFunction& phi, double v) {
  const double value = phi.eval(v);
  const double slope = phi.deriv(v);
  if (value == 0.0) {
    if (slope != 0.0) {
      throw std::domain_error("risk margin: phi(v) = 0 with phi'(v) != 0");
    }
    return 0.0;
  }
  return v * slope / value;
}

}  // namespace detail

/// Data-dependent margin of the unbiased risk estimate (scale normalized to
/// 1 by the caller):
///   psi(z) = phi(v) v^{p+alpha-2} S_{2(1-alpha)}/S_{p-alpha}
///            - 2(1-alpha) v^p S_{-alpha}/S_{p-alpha}
///            - 2 (alpha - 2 + v phi'(v)/phi(v)),
/// with v = ||z||_p and S_e = sum |z_i|^e. For the sup norm the power-sum
/// factors take their analytic limits (the max's multiplicity cancels).
/// Defined off the measure-zero set {z = 0} and, when alpha > 0,
/// {some z_i = 0}.
inline double psi_phi(std::span<const double> z, const ShrinkageConfig& cfg) {
  detail::check_dims(z.size(), cfg);
  const auto sp = detail::scale_magnitudes(z);
  if (sp.top == 0.0) throw std::domain_error("psi_phi: zero vector");
  if (cfg.alpha > 0.0) {
    for (double x : z) {
      if (x == 0.0) throw std::domain_error("psi_phi: zero coordinate with alpha > 0");
    }
  }
  const double v = lp_norm(z, cfg.p);
  const double sum_sq = detail::power_sum(sp.t, 2.0 * (1.0 - cfg.alpha));
  const double sum_neg = detail::power_sum(sp.t, -cfg.alpha);
  double term1, term2;
  if (cfg.p.is_sup()) {
    // u^{p+alpha-2} and S_{p-alpha} both tend to the max's multiplicity,
    // which cancels between numerator and denominator.
    term1 = cfg.phi.eval(v) * sum_sq;
    term2 = -2.0 * (1.0 - cfg.alpha) * sum_neg;
  } else {
    const double p = cfg.p.value();
    const double sum_mid = detail::power_sum(sp.t, p - cfg.alpha);
    const double u = lp_norm(sp.t, cfg.p);  // = v / max|z_i|, in [1, d^{1/p}]
    term1 = cfg.phi.eval(v) * std::pow(u, p + cfg.alpha - 2.0) * sum_sq / sum_mid;
    term2 = -2.0 * (1.0 - cfg.alpha) * std::pow(u, p) * sum_neg / sum_mid;
  }
  const double term3 = -2.0 * (cfg.alpha - 2.0 + detail::log_deriv_term(cfg.phi, v));
  return term1 + term2 + term3;
}

/// Data-independent upper bound on psi_phi at v = ||z||_p:
///   Psi(v) = max(1, d^{(p+alpha-2)/p}) phi(v) - 2{d-2-alpha(d-1)}
///            - 2 v phi'(v)/phi(v),
/// with the sup-norm factor at its analytic limit d. Non-positivity of Psi
/// for all v > 0 is the sufficient condition for minimaxity under known
/// scale.
inline double psi_upper(double v, const ShrinkageConfig& cfg) {
  if (!(v > 0.0)) throw std::invalid_argument("psi_upper: requires v > 0");
  const double dd = static_cast<double>(cfg.d);
  const double factor =
      cfg.p.is_sup() ? dd
                     : std::max(1.0, std::pow(dd, (cfg.p.value() + cfg.alpha - 2.0) / cfg.p.value()));
  const double k = dd - 2.0 - cfg.alpha * (dd - 1.0);
  return factor * cfg.phi.eval(v) - 2.0 * k - 2.0 * detail::log_deriv_term(cfg.phi, v);
}

/// Unknown-scale margin at u = ||z||_p / sigma_hat:
///   Psi(u) - 2 u phi'(u) / (n + 2).
/// Non-positive for all u > 0 certifies minimaxity under unknown scale.
inline double unknown_risk_margin(double u, const ShrinkageConfig& cfg, int n) {
  if (n < 1) throw std::invalid_argument("unknown_risk_margin: requires n >= 1");
  return psi_upper(u, cfg) - 2.0 * u * cfg.phi.deriv(u) / (static_cast<double>(n) + 2.0);
}

/// Unbiased risk estimate for one known-scale observation plus the pieces it
/// is assembled from. `value` has expectation equal to the estimator's risk
/// E ||theta_hat - theta||^2 / sigma^2.
struct SureReport {
  double value;
  std::vector<double> per_coordinate_weights;  // (|z_i| / ||z||_p)^{p-alpha}
  double psi;        // psi_phi(z/sigma)
  double psi_upper;  // Psi(||z||_p / sigma); psi <= psi_upper whenever phi >= 0
};

/// Scalar unbiased risk estimate for simulation loops; `w` is the
/// observation already normalized by sigma.
inline double sure_value_normalized(std::span<const double> w, const ShrinkageConfig& cfg) {
  const auto sp = detail::scale_magnitudes(w);
  if (sp.top == 0.0) throw std::domain_error("sure: zero vector");
  const double u = lp_norm(w, cfg.p);
  double weight_sum = 0.0;
  if (cfg.p.is_sup()) {
    weight_sum = static_cast<double>(sp.top_count);
  } else {
    const double unorm = lp_norm(sp.t, cfg.p);
    for (double t : sp.t) weight_sum += std::pow(t / unorm, cfg.p.value() - cfg.alpha);
  }
  return static_cast<double>(cfg.d) + weight_sum * cfg.phi.eval(u) * psi_phi(w, cfg) / (u * u);
}

/// value = d + (sum of weights) * phi(u) * psi / u^2 with u = ||z||_p/sigma;
/// psi is shared across coordinates so the coordinate sum factors.
inline SureReport sure(const Observation& obs, const ShrinkageConfig& cfg) {
  if (cfg.scale_mode != ScaleMode::Known || obs.mode != ScaleMode::Known) {
    throw std::invalid_argument("sure: defined for known scale only");
  }
  detail::check_dims(obs.z.size(), cfg);
  const double sigma = std::sqrt(obs.sigma2);
  std::vector<double> w(obs.z.size());
  for (std::size_t i = 0; i < obs.z.size(); ++i) w[i] = obs.z[i] / sigma;

  const auto sp = detail::scale_magnitudes(w);
  if (sp.top == 0.0) throw std::domain_error("sure: zero vector");
  const double u = lp_norm(w, cfg.p);

  SureReport rep;
  rep.per_coordinate_weights.resize(w.size());
  double weight_sum = 0.0;
  if (cfg.p.is_sup()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      rep.per_coordinate_weights[i] = sp.t[i] == 1.0 ? 1.0 : 0.0;
      weight_sum += rep.per_coordinate_weights[i];
    }
  } else {
    const double unorm = lp_norm(sp.t, cfg.p);
    for (std::size_t i = 0; i < w.size(); ++i) {
      rep.per_coordinate_weights[i] = std::pow(sp.t[i] / unorm, cfg.p.value() - cfg.alpha);
      weight_sum += rep.per_coordinate_weights[i];
    }
  }
  rep.psi = psi_phi(w, cfg);
  rep.psi_upper = lpshrink::psi_upper(u, cfg);
  rep.value = static_cast<double>(cfg.d) + weight_sum * cfg.phi.eval(u) * rep.psi / (u * u);
  return rep;
}

}  // namespace lpshrink
