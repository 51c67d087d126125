#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lpshrink/minimax.hpp"
#include "lpshrink/risk.hpp"
#include "lpshrink/rng.hpp"

using namespace lpshrink;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ShrinkageConfig known_config(int d, PNorm p, double alpha, const PhiSpec& spec) {
  return ShrinkageConfig(d, p, alpha, spec, false, ScaleMode::Known);
}

// straight-line evaluation of the three-term margin, no rescaling tricks
double psi_reference(const std::vector<double>& z, const ShrinkageConfig& cfg) {
  const double p = cfg.p.value();
  const double v = lp_norm(z, cfg.p);
  double s_sq = 0.0, s_neg = 0.0, s_mid = 0.0;
  for (double x : z) {
    s_sq += std::pow(std::abs(x), 2.0 * (1.0 - cfg.alpha));
    s_neg += std::pow(std::abs(x), -cfg.alpha);
    s_mid += std::pow(std::abs(x), p - cfg.alpha);
  }
  const double phi_v = cfg.phi.eval(v);
  const double ratio = phi_v == 0.0 ? 0.0 : v * cfg.phi.deriv(v) / phi_v;
  return phi_v * std::pow(v, p + cfg.alpha - 2.0) * s_sq / s_mid -
         2.0 * (1.0 - cfg.alpha) * std::pow(v, p) * s_neg / s_mid -
         2.0 * (cfg.alpha - 2.0 + ratio);
}

}  // namespace

TEST_CASE("psi_phi collapses to c - 2(d-2) for p=2, alpha=0, constant c") {
  StreamRng rng(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double c = 6.0 * rng.next_unit();
    const auto cfg = known_config(d, PNorm::finite(2.0), 0.0, PhiSpec::constant(c));
    std::vector<double> z(d);
    for (auto& x : z) x = rng.next_normal() + 0.1;
    CHECK_THAT(psi_phi(z, cfg), WithinAbs(c - 2.0 * (d - 2), 1e-11));
  }
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(3.0));
  const std::vector<double> z{0.4, -1.0, 2.0, 0.7, -0.2};
  CHECK_THAT(psi_phi(z, cfg), WithinAbs(-3.0, 1e-12));
}

TEST_CASE("psi_phi matches the unscaled reference evaluation") {
  StreamRng rng(6, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 8);
    const double alpha = 0.9 * rng.next_unit();
    const PNorm p = PNorm::finite(std::exp(2.0 * rng.next_unit() - 1.0));
    PhiSpec spec = (trial % 2 && d >= 3 && alpha < (d - 2.0) / (d - 1.0))
                       ? PhiSpec::ds(1.0)
                       : PhiSpec::constant(2.0 * rng.next_unit());
    const auto cfg = known_config(d, p, alpha, spec);
    std::vector<double> z(d);
    for (auto& x : z) {
      do {
        x = rng.next_normal();
      } while (x == 0.0);
    }
    const double got = psi_phi(z, cfg);
    const double want = psi_reference(z, cfg);
    CHECK_THAT(got, WithinAbs(want, 1e-9 * (1.0 + std::abs(want))));
  }
}

TEST_CASE("psi_phi is non-positive under the zero-margin profile") {
  StreamRng rng(14, 0);
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.2, PhiSpec::ds(1.0));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(5);
    for (auto& x : z) {
      do {
        x = rng.next_normal();
      } while (x == 0.0);
    }
    CHECK(psi_phi(z, cfg) <= 1e-9);
    CHECK_THAT(psi_upper(lp_norm(z, cfg.p), cfg), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("psi_phi with phi == 0: shrink-free terms only") {
  const auto cfg = known_config(4, PNorm::finite(1.5), 0.3, PhiSpec::constant(0.0));
  const std::vector<double> z{0.5, -1.5, 2.0, 0.25};
  const double v = lp_norm(z, cfg.p);
  double s_neg = 0.0, s_mid = 0.0;
  for (double x : z) {
    s_neg += std::pow(std::abs(x), -0.3);
    s_mid += std::pow(std::abs(x), 1.5 - 0.3);
  }
  const double want = -2.0 * 0.7 * std::pow(v, 1.5) * s_neg / s_mid - 2.0 * (0.3 - 2.0);
  CHECK_THAT(psi_phi(z, cfg), WithinRel(want, 1e-12));
}

TEST_CASE("psi_phi domain errors") {
  const auto cfg = known_config(3, PNorm::finite(2.0), 0.5, PhiSpec::constant(1.0));
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(psi_phi(zero, cfg), std::domain_error);
  const std::vector<double> with_zero{1.0, 0.0, 2.0};
  CHECK_THROWS_AS(psi_phi(with_zero, cfg), std::domain_error);
  // alpha = 0 tolerates zero coordinates
  const auto cfg0 = known_config(3, PNorm::finite(2.0), 0.0, PhiSpec::constant(1.0));
  CHECK_NOTHROW(psi_phi(with_zero, cfg0));
}

TEST_CASE("psi_upper hand-evaluated cases") {
  // boundary of the band: max-factor 1, 2(d-2) - 2(d-2) = 0
  for (int d : {3, 5, 9}) {
    const auto cfg =
        known_config(d, PNorm::finite(2.0), 0.0, PhiSpec::constant(2.0 * (d - 2.0)));
    CHECK_THAT(psi_upper(1.7, cfg), WithinAbs(0.0, 1e-12));
  }
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(3.0));
  CHECK_THAT(psi_upper(0.4, cfg), WithinAbs(-3.0, 1e-13));
  // sup norm: factor is d
  const auto sup_cfg = known_config(5, PNorm::sup(), 0.0, PhiSpec::constant(1.0));
  CHECK_THAT(psi_upper(2.0, sup_cfg), WithinAbs(5.0 * 1.0 - 6.0, 1e-13));
  CHECK_THROWS_AS(psi_upper(0.0, cfg), std::invalid_argument);
}

TEST_CASE("ds profile solves the zero-margin equation") {
  StreamRng rng(77, 0);
  const GridSpec grid;
  const auto xs = grid.make();
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double alpha_max = (d - 2.0) / (d - 1.0);
    const double alpha = 0.9 * alpha_max * rng.next_unit();
    const PNorm p = PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
    const double lambda = std::exp(2.0 * rng.next_unit() - 1.0);
    const auto cfg = known_config(d, p, alpha, PhiSpec::ds(lambda));
    for (double x : xs) {
      REQUIRE_THAT(psi_upper(x, cfg), WithinAbs(0.0, 1e-12));
    }
  }
  // sup-norm variant uses the limit factor d and still cancels
  const auto sup_cfg = known_config(6, PNorm::sup(), 0.2, PhiSpec::ds(2.0));
  for (double x : xs) REQUIRE_THAT(psi_upper(x, sup_cfg), WithinAbs(0.0, 1e-12));
}

TEST_CASE("psi_phi is bounded by psi_upper") {
  StreamRng rng(8, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double alpha_max = (d - 2.0) / (d - 1.0);
    const double alpha = 0.9 * alpha_max * rng.next_unit();
    const PNorm p = (trial % 8 == 0) ? PNorm::sup()
                                     : PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
    // band-limited profiles: the regime the bound exists to certify
    PhiSpec spec;
    switch (trial % 3) {
      case 0: spec = PhiSpec::constant(phi_band_limit(d, p, alpha) * rng.next_unit()); break;
      case 1: spec = PhiSpec::ds(std::exp(2.0 * rng.next_unit() - 1.0)); break;
      default: spec = PhiSpec::automatic(); break;
    }
    const auto cfg = known_config(d, p, alpha, spec);
    std::vector<double> z(d);
    for (auto& x : z) {
      do {
        x = rng.next_normal();
      } while (x == 0.0);
    }
    const double psi = psi_phi(z, cfg);
    const double bound = psi_upper(lp_norm(z, p), cfg);
    REQUIRE(psi <= bound + 1e-9 * std::max(1.0, std::abs(bound)));
  }
}

TEST_CASE("sure: classical reduction d + c(c - 2(d-2))/||z||^2") {
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(3.0));
  const auto rep = sure(Observation::known({2.0, 2.0, 1.0, 0.0, 0.0}, 1.0), cfg);
  CHECK_THAT(rep.value, WithinRel(4.0, 1e-12));
  CHECK_THAT(rep.psi, WithinAbs(-3.0, 1e-12));
  CHECK_THAT(rep.psi_upper, WithinAbs(-3.0, 1e-12));
  double weight_sum = 0.0;
  for (double w : rep.per_coordinate_weights) weight_sum += w;
  CHECK_THAT(weight_sum, WithinRel(1.0, 1e-12));

  // any z with the same norm gives the same value
  const auto rep2 = sure(Observation::known({3.0, 0.0, 0.0, 0.0, 0.0}, 1.0), cfg);
  CHECK_THAT(rep2.value, WithinRel(4.0, 1e-12));
}

TEST_CASE("sure: phi == 0 returns d exactly") {
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(0.0));
  const auto rep = sure(Observation::known({1.0, -2.0, 0.5, 3.0, 0.1}, 2.0), cfg);
  CHECK(rep.value == 5.0);
}

TEST_CASE("sure: weight sum equals the simplex power sum") {
  StreamRng rng(9, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 7);
    const double alpha = 0.9 * rng.next_unit();
    const double pval = std::exp(2.4 * rng.next_unit() - 1.2);
    const auto cfg = known_config(d, PNorm::finite(pval), alpha, PhiSpec::constant(1.0));
    std::vector<double> z(d);
    for (auto& x : z) {
      do {
        x = rng.next_normal();
      } while (x == 0.0);
    }
    const double sigma2 = 0.5 + rng.next_unit();
    const auto rep = sure(Observation::known(z, sigma2), cfg);
    // s_i = |z_i|^p / ||z||_p^p; weights sum to sum_i s_i^{(p-alpha)/p}
    const double v = lp_norm(z, cfg.p);
    double want = 0.0;
    for (double x : z) {
      const double s = std::pow(std::abs(x), pval) / std::pow(v, pval);
      want += std::pow(s, (pval - alpha) / pval);
    }
    double got = 0.0;
    for (double w : rep.per_coordinate_weights) got += w;
    CHECK_THAT(got, WithinRel(want, 1e-9));
    CHECK(rep.psi <= rep.psi_upper + 1e-9 * std::max(1.0, std::abs(rep.psi_upper)));
  }
}

TEST_CASE("sure: scale invariance of value through sigma") {
  const auto cfg = known_config(4, PNorm::finite(1.5), 0.2, PhiSpec::constant(0.8));
  const std::vector<double> z{1.0, -0.5, 2.0, 0.75};
  const auto rep1 = sure(Observation::known(z, 1.0), cfg);
  std::vector<double> z2(z);
  for (auto& x : z2) x *= 3.0;
  const auto rep2 = sure(Observation::known(z2, 9.0), cfg);
  CHECK_THAT(rep2.value, WithinRel(rep1.value, 1e-12));
}

TEST_CASE("sure rejects unknown scale") {
  ShrinkageConfig cfg(3, PNorm::finite(2.0), 0.0, PhiSpec::constant(1.0), false,
                      ScaleMode::Unknown);
  CHECK_THROWS_AS(sure(Observation::unknown({1.0, 2.0, 3.0}, 4.0, 6), cfg),
                  std::invalid_argument);
}

TEST_CASE("unknown_risk_margin: constant profile reduces to psi_upper") {
  const auto cfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(3.0));
  for (double u : {0.1, 1.0, 14.0}) {
    CHECK(unknown_risk_margin(u, cfg, 6) == psi_upper(u, cfg));
  }
  // boundary constant: margin 0
  const auto bcfg = known_config(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(6.0));
  CHECK_THAT(unknown_risk_margin(2.0, bcfg, 6), WithinAbs(0.0, 1e-12));
  CHECK_THROWS_AS(unknown_risk_margin(1.0, cfg, 0), std::invalid_argument);
}

TEST_CASE("unknown_risk_margin: ds-unknown profile stays non-positive") {
  ShrinkageConfig cfg(5, PNorm::finite(2.0), 0.0, PhiSpec::ds_unknown(1.0, 6), false,
                      ScaleMode::Unknown);
  const GridSpec grid;
  for (double u : grid.make()) {
    REQUIRE(unknown_risk_margin(u, cfg, 6) <= 1e-12);
  }
}
