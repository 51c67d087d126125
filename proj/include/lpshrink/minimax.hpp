#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lpshrink/estimator.hpp"
#include "lpshrink/format.hpp"

namespace lpshrink {

/// The four certification rule sets:
///   T1: known scale, monotone non-decreasing phi within the band.
///   T2: known scale, Efron-Morris-type ratio g_phi non-decreasing.
///   T3: unknown scale, monotone phi (needs n).
///   T4: unknown scale, ratio condition with the (n+2)-adjusted exponent.
enum class Theorem { T1, T2, T3, T4 };

inline std::string render_theorem(Theorem t) {
  switch (t) {
    case Theorem::T1: return "t1";
    case Theorem::T2: return "t2";
    case Theorem::T3: return "t3";
    case Theorem::T4: return "t4";
  }
  return "t1";
}

inline Theorem parse_theorem(const std::string& text) {
  if (text == "t1") return Theorem::T1;
  if (text == "t2") return Theorem::T2;
  if (text == "t3") return Theorem::T3;
  if (text == "t4") return Theorem::T4;
  throw std::invalid_argument("theorem: expected t1|t2|t3|t4, got \"" + text + "\"");
}

/// Log-spaced evaluation grid. The monotonicity conditions quantify over all
/// v > 0, which is undecidable for a black-box profile; certification is on
/// this grid plus analytic-derivative sign checks, and the report records the
/// resolution so a failure is attributable.
struct GridSpec {
  double lo = 1e-3;
  double hi = 1e3;
  std::size_t points = 2000;

  void validate() const {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("grid: requires 0 < lo < hi");
    if (lo > 1e-3 || hi < 1e3 || points < 1000) {
      throw std::invalid_argument("grid: must cover [1e-3, 1e3] with at least 1000 points");
    }
  }
  std::vector<double> make() const {
    std::vector<double> xs(points);
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      xs[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
    }
    xs.front() = lo;
    xs.back() = hi;
    return xs;
  }
  std::string describe() const {
    return "log[" + format_double(lo) + "," + format_double(hi) + "]x" + format_u64(points);
  }
};

/// Efron-Morris-type monotonicity functional. Known-scale variant:
///   g(v) = v^K phi(v) / (A - phi(v)),          K = d-2-alpha(d-1), A = 2(d-2)gamma;
/// unknown-scale variant (n given) raises the denominator to 1 + 2K/(n+2).
/// Returns nothing when phi(x) >= A: the condition only constrains g below
/// the band limit, and the caller handles limit points via the plateau rule.
inline std::optional<double> g_phi(double x, const ShrinkageConfig& cfg,
                                   std::optional<int> n = std::nullopt) {
  if (!(x > 0.0)) throw std::invalid_argument("g_phi: requires x > 0");
  if (n && *n < 1) throw std::invalid_argument("g_phi: requires n >= 1");
  const double limit = phi_band_limit(cfg.d, cfg.p, cfg.alpha);
  const double value = cfg.phi.eval(x);
  // A decaying profile pinned to this band sits strictly below the limit for
  // every x > 0, and its gap has a cancellation-free form; a direct limit -
  // value would be pure roundoff once the decay term drops below ~1e-7.
  const double gap = (!cfg.phi.is_constant() && cfg.phi.sup() == limit)
                         ? cfg.phi.sup_gap(x)
                         : limit - value;
  if (!(gap > 0.0)) return std::nullopt;
  const double k = static_cast<double>(cfg.d - 2) - cfg.alpha * static_cast<double>(cfg.d - 1);
  const double expo = n ? 1.0 + 2.0 * k / (static_cast<double>(*n) + 2.0) : 1.0;
  return std::pow(x, k) * value / std::pow(gap, expo);
}

struct MinimaxReport {
  Theorem theorem = Theorem::T1;
  bool band_ok = false;      // 0 <= phi <= 2(d-2)gamma on the grid
  bool monotone_ok = false;  // phi for T1/T3, g_phi for T2/T4
  bool plateau_ok = false;   // once phi reaches the band limit it stays there
  bool alpha_ok = false;     // alpha < (d-2)/(d-1)
  bool d_ok = false;         // d >= 3
  std::string grid;
  bool verdict = false;
};

inline constexpr double kBandAbsTol = 1e-12;
inline constexpr double kPlateauTol = 1e-9;
inline constexpr double kMonotoneSlopeTol = 1e-12;
inline constexpr double kMonotoneRatioTol = 1e-9;

/// Certifies the hypotheses of the requested rule set on the grid. d and
/// alpha are checked exactly; the band, monotonicity and plateau clauses are
/// checked at the grid points (derivative signs where the analytic derivative
/// exists). The verdict conjoins exactly the flags the rule set requires.
inline MinimaxReport check_minimax(const ShrinkageConfig& cfg, Theorem theorem,
                                   std::optional<int> n = std::nullopt, GridSpec grid = {}) {
  const bool needs_n = theorem == Theorem::T3 || theorem == Theorem::T4;
  if (needs_n && !n) {
    throw std::invalid_argument("check_minimax: " + render_theorem(theorem) + " requires n");
  }
  if (n && *n < 1) throw std::invalid_argument("check_minimax: requires n >= 1");
  grid.validate();

  MinimaxReport rep;
  rep.theorem = theorem;
  rep.grid = grid.describe();
  rep.d_ok = cfg.d >= 3;
  rep.alpha_ok = cfg.alpha >= 0.0 &&
                 rep.d_ok && cfg.alpha < static_cast<double>(cfg.d - 2) / static_cast<double>(cfg.d - 1);
  if (!rep.d_ok || !rep.alpha_ok) {
    // The band limit is undefined outside these bounds; nothing certifiable.
    rep.verdict = false;
    return rep;
  }

  const double limit = phi_band_limit(cfg.d, cfg.p, cfg.alpha);
  const auto xs = grid.make();

  rep.band_ok = true;
  for (double x : xs) {
    const double value = cfg.phi.eval(x);
    if (!(value >= 0.0) || value > limit + kBandAbsTol) {
      rep.band_ok = false;
      break;
    }
  }

  const bool ratio_condition = theorem == Theorem::T2 || theorem == Theorem::T4;
  rep.monotone_ok = true;
  if (!ratio_condition) {
    double prev = cfg.phi.eval(xs.front());
    for (double x : xs) {
      const double value = cfg.phi.eval(x);
      if (cfg.phi.deriv(x) < -kMonotoneSlopeTol ||
          value < prev - kMonotoneSlopeTol * std::max(1.0, std::abs(prev))) {
        rep.monotone_ok = false;
        break;
      }
      prev = value;
    }
  } else {
    std::optional<int> n_for_g = theorem == Theorem::T4 ? n : std::nullopt;
    std::optional<double> prev;
    for (double x : xs) {
      const auto g = g_phi(x, cfg, n_for_g);
      if (!g) continue;  // at the band limit; handled by the plateau clause
      if (prev && *g < *prev - kMonotoneRatioTol * std::max(1.0, std::abs(*prev))) {
        rep.monotone_ok = false;
        break;
      }
      prev = g;
    }
  }

  // Plateau clause. The DS-family profiles sit strictly below the band limit
  // for every v > 0, but at double precision they round onto it for small v
  // once the decay exponent is large, so the grid test would misfire; the
  // kind-level fact decides for them.
  if (cfg.phi.strictly_below_sup() && cfg.phi.sup() <= limit + kBandAbsTol) {
    rep.plateau_ok = true;
  } else {
    rep.plateau_ok = true;
    const double attain_tol = kPlateauTol * std::max(1.0, limit);
    bool attained = false;
    for (double x : xs) {
      const double value = cfg.phi.eval(x);
      if (!attained && value >= limit - attain_tol) attained = true;
      else if (attained && std::abs(value - limit) > attain_tol) {
        rep.plateau_ok = false;
        break;
      }
    }
  }

  rep.verdict = rep.d_ok && rep.alpha_ok && rep.band_ok && rep.monotone_ok &&
                (!ratio_condition || rep.plateau_ok);
  return rep;
}

/// Parameter-level entry point: reports alpha/d violations as a false verdict
/// instead of failing phi resolution (an automatic profile cannot even be
/// built when the band is undefined).
inline MinimaxReport check_minimax_params(int d, PNorm p, double alpha, const PhiSpec& spec,
                                          Theorem theorem, std::optional<int> n = std::nullopt,
                                          GridSpec grid = {}) {
  grid.validate();
  const bool d_ok = d >= 3;
  const bool alpha_ok =
      alpha >= 0.0 && d_ok && alpha < static_cast<double>(d - 2) / static_cast<double>(d - 1);
  if (!d_ok || !alpha_ok) {
    MinimaxReport rep;
    rep.theorem = theorem;
    rep.grid = grid.describe();
    rep.d_ok = d_ok;
    rep.alpha_ok = alpha_ok;
    rep.verdict = false;
    return rep;
  }
  const ScaleMode mode =
      (theorem == Theorem::T3 || theorem == Theorem::T4) ? ScaleMode::Unknown : ScaleMode::Known;
  ShrinkageConfig cfg(d, p, alpha, spec, /*positive_part=*/false, mode);
  return check_minimax(cfg, theorem, n, grid);
}

}  // namespace lpshrink
