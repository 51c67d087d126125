#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lpshrink/format.hpp"
#include "lpshrink/mc.hpp"
#include "lpshrink/minimax.hpp"
#include "lpshrink/pnorm.hpp"
#include "lpshrink/risk.hpp"
#include "lpshrink/rng.hpp"

namespace lpshrink {

/// Outcome of one randomized property oracle. On failure `detail` lists the
/// first offending inputs.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::uint64_t trials = 0;
  std::string detail;
};

namespace detail {

inline std::string render_vector(std::span<const double> z) {
  std::string out = "(";
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i) out += ",";
    out += format_double(z[i]);
  }
  out += ")";
  return out;
}

struct FailureLog {
  int count = 0;
  std::string text;
  void add(const std::string& line) {
    ++count;
    if (count <= 3) {
      if (!text.empty()) text += "; ";
      text += line;
    }
  }
  std::string summary() const {
    if (count == 0) return "";
    std::string out = std::to_string(count) + " failure(s): " + text;
    if (count > 3) out += "; ...";
    return out;
  }
};

}  // namespace detail

/// Randomized trials of the three norm inequalities plus the homogeneity and
/// sup-limit properties of lp_norm.
inline std::vector<CheckResult> run_lemma_suite(std::uint64_t trials, std::uint64_t seed) {
  std::vector<CheckResult> results;

  // Part 1: norm ordering chain, random normal vectors, random q > r > 0.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 1);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 20);
      std::vector<double> z(d);
      for (auto& x : z) x = rng.next_normal();
      const double r = std::exp(2.0 * rng.next_unit() - 1.0);
      const double q = r + std::exp(2.0 * rng.next_unit() - 1.0);
      const auto chk = check_norm_ordering(z, q, r);
      if (!chk.holds) {
        log.add("z=" + detail::render_vector(z) + " q=" + format_double(q) +
                " r=" + format_double(r) + " margin=" + format_double(chk.margin));
      }
    }
    results.push_back({"norm-ordering-chain", log.count == 0, trials, log.summary()});
  }

  // Part 2: correlation inequality, strictly nonzero vectors, q, r >= 0.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 2);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 20);
      std::vector<double> z(d);
      for (auto& x : z) {
        do {
          x = rng.next_normal();
        } while (x == 0.0);
      }
      const double q = 4.0 * rng.next_unit();
      const double r = 4.0 * rng.next_unit();
      const auto chk = check_power_sum_correlation(z, q, r);
      if (!chk.holds) {
        log.add("z=" + detail::render_vector(z) + " q=" + format_double(q) +
                " r=" + format_double(r) + " margin=" + format_double(chk.margin));
      }
    }
    results.push_back({"power-sum-correlation", log.count == 0, trials, log.summary()});
  }

  // Part 3: simplex power ratio (normalized exponentials), a >= 0, b <= 1;
  // when a < b the ratio must also stay within [1, d].
  {
    detail::FailureLog log;
    StreamRng rng(seed, 3);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 20);
      std::vector<double> s(d);
      double total = 0.0;
      for (auto& x : s) {
        x = std::exp(rng.next_normal());
        total += x;
      }
      for (auto& x : s) x /= total;
      const double a = 3.0 * rng.next_unit();
      const double b = 1.0 - 3.0 * rng.next_unit();
      const auto chk = check_simplex_power_ratio(s, a, b);
      bool ok = chk.holds;
      if (a < b) {
        // the proof's own chain: the ratio stays within [1, d]
        const double ratio = chk.left;
        ok = ok && ratio >= 1.0 - kInequalityRelTol &&
             ratio <= static_cast<double>(d) * (1.0 + kInequalityRelTol);
      }
      if (!ok) {
        log.add("s=" + detail::render_vector(s) + " a=" + format_double(a) +
                " b=" + format_double(b) + " ratio=" + format_double(chk.left) +
                " bound=" + format_double(chk.right));
      }
    }
    results.push_back({"simplex-power-ratio", log.count == 0, trials, log.summary()});
  }

  // Weaker form of the above that is provable: for a < b the ratio stays in
  // [1, d]; for a >= b it stays at or below 1.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 3);  // same draws as the strict check
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 20);
      std::vector<double> s(d);
      double total = 0.0;
      for (auto& x : s) {
        x = std::exp(rng.next_normal());
        total += x;
      }
      for (auto& x : s) x /= total;
      const double a = 3.0 * rng.next_unit();
      const double b = 1.0 - 3.0 * rng.next_unit();
      const auto chk = check_simplex_power_ratio(s, a, b);
      const double ratio = chk.left;
      const double hi = a < b ? static_cast<double>(d) : 1.0;
      const double lo = a < b ? 1.0 : 0.0;
      if (ratio < lo - kInequalityRelTol || ratio > hi * (1.0 + kInequalityRelTol)) {
        log.add("s=" + detail::render_vector(s) + " a=" + format_double(a) +
                " b=" + format_double(b) + " ratio=" + format_double(ratio));
      }
    }
    results.push_back({"simplex-power-ratio-chain", log.count == 0, trials, log.summary()});
  }

  // Absolute homogeneity: lp_norm(c z) = |c| lp_norm(z).
  {
    detail::FailureLog log;
    StreamRng rng(seed, 4);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 10);
      std::vector<double> z(d), cz(d);
      for (auto& x : z) x = rng.next_normal();
      double c = 6.0 * rng.next_unit() - 3.0;
      if (c == 0.0) c = 1.0;
      for (int i = 0; i < d; ++i) cz[i] = c * z[i];
      const PNorm p = (rng.next_u64() % 8 == 0) ? PNorm::sup()
                                                : PNorm::finite(std::exp(3.0 * rng.next_unit() - 1.5));
      const double lhs = lp_norm(cz, p);
      const double rhs = std::abs(c) * lp_norm(z, p);
      if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, rhs)) {
        log.add("z=" + detail::render_vector(z) + " c=" + format_double(c) +
                " p=" + render_pnorm(p));
      }
    }
    results.push_back({"homogeneity", log.count == 0, trials, log.summary()});
  }

  // Sup-norm limit: for p = 64 and d <= 10 the relative gap to the sup norm
  // is at most d^{1/64} - 1.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 5);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 10);
      std::vector<double> z(d);
      for (auto& x : z) x = rng.next_normal();
      const double hi = lp_norm(z, PNorm::finite(64.0));
      const double sup = lp_norm(z, PNorm::sup());
      if (sup == 0.0) continue;
      const double gap = hi / sup - 1.0;
      const double bound = std::pow(static_cast<double>(d), 1.0 / 64.0) - 1.0;
      if (gap < -1e-12 || gap > bound + 1e-12) {
        log.add("z=" + detail::render_vector(z) + " gap=" + format_double(gap));
      }
    }
    results.push_back({"sup-limit-gap", log.count == 0, trials, log.summary()});
  }

  return results;
}

/// Monte Carlo identity checks and per-sample margin oracles.
inline std::vector<CheckResult> run_identity_suite(std::uint64_t trials, std::uint64_t seed,
                                                   unsigned workers = 0) {
  std::vector<CheckResult> results;
  const std::uint64_t reps = std::max<std::uint64_t>(trials, 10000);

  auto push_zscore = [&](const std::string& name, const IdentityCheck& chk) {
    const bool pass = std::abs(chk.zscore) <= 4.0;
    std::string detail = "lhs=" + format_double(chk.lhs) + " rhs=" + format_double(chk.rhs) +
                         " zscore=" + format_double(chk.zscore);
    results.push_back({name, pass, chk.reps, detail});
  };

  {
    const std::vector<double> theta{0.3, -1.0, 2.0};
    push_zscore("stein-linear-field",
                stein_linear_check(theta, 1.7, reps, seed + 11, workers));
  }
  {
    ShrinkageConfig cfg(5, PNorm::finite(2.0), 0.3, PhiSpec::constant(1.0), false,
                        ScaleMode::Known);
    const std::vector<double> theta{0.5, -0.25, 1.5, 0.0, -2.0};
    push_zscore("stein-correction-field",
                stein_correction_check(cfg, theta, 1.0, reps, seed + 12, workers));
  }
  push_zscore("chi-square-constant",
              chi_square_identity_check(ChiSquareTestFn::One, 6, 1.3, reps, seed + 13, workers));
  push_zscore("chi-square-linear",
              chi_square_identity_check(ChiSquareTestFn::Identity, 6, 1.3, reps, seed + 14,
                                        workers));
  push_zscore("chi-square-sqrt",
              chi_square_identity_check(ChiSquareTestFn::Sqrt, 6, 1.3, reps, seed + 15, workers));

  // Per-sample margin bound: psi_phi(z) <= Psi(||z||_p) for nonnegative phi.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 21);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const int d = 3 + static_cast<int>(rng.next_u64() % 8);
      const double alpha_max = static_cast<double>(d - 2) / static_cast<double>(d - 1);
      const double alpha = 0.9 * alpha_max * rng.next_unit();
      const PNorm p = (rng.next_u64() % 8 == 0)
                          ? PNorm::sup()
                          : PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
      // profiles within the admissible band, the regime the bound certifies
      PhiSpec spec;
      switch (rng.next_u64() % 3) {
        case 0:
          spec = PhiSpec::constant(phi_band_limit(d, p, alpha) * rng.next_unit());
          break;
        case 1:
          spec = PhiSpec::ds(std::exp(2.0 * rng.next_unit() - 1.0));
          break;
        default:
          spec = PhiSpec::automatic();
          break;
      }
      ShrinkageConfig cfg(d, p, alpha, spec, false, ScaleMode::Known);
      std::vector<double> z(d);
      for (auto& x : z) {
        do {
          x = rng.next_normal();
        } while (x == 0.0);
      }
      const double psi = psi_phi(z, cfg);
      const double bound = psi_upper(lp_norm(z, p), cfg);
      if (psi > bound + 1e-9 * std::max(1.0, std::abs(bound))) {
        log.add("z=" + detail::render_vector(z) + " d=" + std::to_string(d) +
                " p=" + render_pnorm(p) + " alpha=" + format_double(alpha) +
                " phi=" + render_phi_spec(spec) + " psi=" + format_double(psi) +
                " bound=" + format_double(bound));
      }
    }
    results.push_back({"psi-upper-bound", log.count == 0, trials, log.summary()});
  }

  // The DS profile solves the zero-margin equation: Psi == 0 identically.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 22);
    const GridSpec grid;
    const auto xs = grid.make();
    for (int t = 0; t < 5; ++t) {
      const int d = 3 + static_cast<int>(rng.next_u64() % 8);
      const double alpha_max = static_cast<double>(d - 2) / static_cast<double>(d - 1);
      const double alpha = 0.9 * alpha_max * rng.next_unit();
      const PNorm p = PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
      const double lambda = std::exp(2.0 * rng.next_unit() - 1.0);
      ShrinkageConfig cfg(d, p, alpha, PhiSpec::ds(lambda), false, ScaleMode::Known);
      double worst = 0.0;
      for (double x : xs) worst = std::max(worst, std::abs(psi_upper(x, cfg)));
      if (worst > 1e-12) {
        log.add("d=" + std::to_string(d) + " p=" + render_pnorm(p) +
                " alpha=" + format_double(alpha) + " lambda=" + format_double(lambda) +
                " max|Psi|=" + format_double(worst));
      }
    }
    results.push_back({"ds-zero-margin", log.count == 0, 5, log.summary()});
  }

  // Analytic phi derivatives against central differences on a log grid.
  {
    detail::FailureLog log;
    StreamRng rng(seed, 23);
    for (int t = 0; t < 20; ++t) {
      const int d = 3 + static_cast<int>(rng.next_u64() % 8);
      const double alpha_max = static_cast<double>(d - 2) / static_cast<double>(d - 1);
      const double alpha = 0.9 * alpha_max * rng.next_unit();
      const PNorm p = PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
      const double lambda = std::exp(2.0 * rng.next_unit() - 1.0);
      const PhiSpec spec = (t % 2 == 0) ? PhiSpec::ds(lambda)
                                        : PhiSpec::ds_unknown(lambda, 2 + static_cast<int>(
                                                                              rng.next_u64() % 30));
      const PhiFunction phi = make_phi(spec, d, p, alpha);
      for (double v = 1e-3; v <= 1e3 * 1.0001; v *= std::pow(10.0, 0.25)) {
        // relative step: a fixed absolute step is 10x the abscissa at the
        // left end of the grid and its truncation error swamps the tolerance
        // for decay exponents below 1
        const double h = v * 1e-5;
        const double numeric = (phi.eval(v + h) - phi.eval(v - h)) / (2.0 * h);
        const double analytic = phi.deriv(v);
        if (std::abs(analytic - numeric) > 1e-6 * (1.0 + std::abs(analytic))) {
          log.add("phi=" + render_phi_spec(spec) + " v=" + format_double(v) +
                  " analytic=" + format_double(analytic) + " numeric=" + format_double(numeric));
        }
      }
    }
    results.push_back({"phi-derivative", log.count == 0, 20, log.summary()});
  }

  return results;
}

}  // namespace lpshrink
