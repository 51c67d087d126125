#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lpshrink/minimax.hpp"
#include "lpshrink/risk.hpp"
#include "lpshrink/rng.hpp"

using namespace lpshrink;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ShrinkageConfig cfg_of(int d, PNorm p, double alpha, const PhiSpec& spec,
                       ScaleMode mode = ScaleMode::Known) {
  return ShrinkageConfig(d, p, alpha, spec, false, mode);
}

}  // namespace

TEST_CASE("g_phi: ds profile gives the constant 1/lambda") {
  for (double lambda : {0.25, 1.0, 4.0}) {
    const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::ds(lambda));
    for (double x : {1e-3, 0.01, 0.4, 1.0, 25.0, 900.0}) {
      const auto g = g_phi(x, cfg);
      REQUIRE(g);
      CHECK_THAT(*g, WithinRel(1.0 / lambda, 1e-12));
    }
  }
}

TEST_CASE("g_phi: constant inside the band is an increasing power") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(3.0));
  // (c/(A-c)) x^K with A=6, K=3
  for (double x : {0.5, 1.0, 2.0}) {
    const auto g = g_phi(x, cfg);
    REQUIRE(g);
    CHECK_THAT(*g, WithinRel(3.0 / (6.0 - 3.0) * std::pow(x, 3.0), 1e-12));
  }
  CHECK(*g_phi(0.5, cfg) < *g_phi(1.0, cfg));
  CHECK(*g_phi(1.0, cfg) < *g_phi(2.0, cfg));
}

TEST_CASE("g_phi: out of domain at the band limit") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::automatic());
  CHECK_FALSE(g_phi(1.0, cfg).has_value());
}

TEST_CASE("g_phi: unknown variant with ds-unknown profile is non-decreasing") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::ds_unknown(1.0, 6));
  const auto g1 = g_phi(0.5, cfg, 6);
  const auto g2 = g_phi(1.0, cfg, 6);
  const auto g3 = g_phi(2.0, cfg, 6);
  REQUIRE(g1);
  REQUIRE(g2);
  REQUIRE(g3);
  CHECK(*g1 <= *g2);
  CHECK(*g2 <= *g3);
}

TEST_CASE("check_minimax: boundary constant passes the monotone rule") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(6.0));
  const auto rep = check_minimax(cfg, Theorem::T1);
  CHECK(rep.d_ok);
  CHECK(rep.alpha_ok);
  CHECK(rep.band_ok);
  CHECK(rep.monotone_ok);
  CHECK(rep.verdict);
  CHECK(rep.grid == "log[0.001,1000]x2000");
}

TEST_CASE("check_minimax: constant just above the band fails band_ok") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::constant(6.1));
  const auto rep = check_minimax(cfg, Theorem::T1);
  CHECK_FALSE(rep.band_ok);
  CHECK_FALSE(rep.verdict);
}

TEST_CASE("check_minimax: alpha out of range fails before grid work") {
  const auto rep = check_minimax_params(5, PNorm::finite(2.0), 0.8, PhiSpec::automatic(),
                                        Theorem::T1);
  CHECK_FALSE(rep.alpha_ok);
  CHECK_FALSE(rep.verdict);
  CHECK(rep.d_ok);
  const auto rep2 = check_minimax_params(2, PNorm::finite(2.0), 0.0, PhiSpec::constant(1.0),
                                         Theorem::T1);
  CHECK_FALSE(rep2.d_ok);
  CHECK_FALSE(rep2.verdict);
}

TEST_CASE("check_minimax: ds profile passes the ratio rule, not the monotone rule") {
  const auto cfg = cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::ds(1.0));
  CHECK(check_minimax(cfg, Theorem::T2).verdict);
  const auto t1 = check_minimax(cfg, Theorem::T1);
  CHECK_FALSE(t1.monotone_ok);
  CHECK_FALSE(t1.verdict);
}

TEST_CASE("check_minimax: ds profile at d=10 (decay rounds onto the limit)") {
  // phi(1e-3) is indistinguishable from the band limit in double precision
  // here; the strictly-below-limit family fact keeps the plateau rule honest.
  const auto cfg = cfg_of(10, PNorm::finite(2.0), 0.0, PhiSpec::ds(1.0));
  const auto rep = check_minimax(cfg, Theorem::T2);
  CHECK(rep.plateau_ok);
  CHECK(rep.verdict);
}

TEST_CASE("check_minimax: unknown-scale rules") {
  CHECK_THROWS_AS(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::automatic()),
                                Theorem::T3),
                  std::invalid_argument);
  CHECK(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::automatic()), Theorem::T3, 5)
            .verdict);
  CHECK(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::ds_unknown(1.0, 6)),
                      Theorem::T4, 6)
            .verdict);
  // the known-scale ds profile does not satisfy the unknown-scale ratio rule
  CHECK_FALSE(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::ds(1.0)), Theorem::T4, 6)
                  .monotone_ok);
}

TEST_CASE("check_minimax grid validation") {
  GridSpec bad;
  bad.points = 100;
  CHECK_THROWS_AS(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::automatic()),
                                Theorem::T1, std::nullopt, bad),
                  std::invalid_argument);
  GridSpec narrow;
  narrow.lo = 0.1;
  CHECK_THROWS_AS(check_minimax(cfg_of(5, PNorm::finite(2.0), 0.0, PhiSpec::automatic()),
                                Theorem::T1, std::nullopt, narrow),
                  std::invalid_argument);
}

TEST_CASE("T1 verdict implies non-positive risk margin on the grid") {
  StreamRng rng(31, 0);
  const GridSpec grid;
  const auto xs = grid.make();
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double alpha_max = (d - 2.0) / (d - 1.0);
    const double alpha = 0.9 * alpha_max * rng.next_unit();
    const PNorm p = (trial % 5 == 0) ? PNorm::sup()
                                     : PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
    const double limit = phi_band_limit(d, p, alpha);
    const auto cfg = cfg_of(d, p, alpha, PhiSpec::constant(limit * rng.next_unit()));
    const auto rep = check_minimax(cfg, Theorem::T1, std::nullopt, grid);
    REQUIRE(rep.verdict);
    for (double x : xs) REQUIRE(psi_upper(x, cfg) <= 1e-9);
  }
}

TEST_CASE("T3 verdict implies non-positive unknown-scale margin on the grid") {
  StreamRng rng(32, 0);
  const GridSpec grid;
  const auto xs = grid.make();
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double alpha_max = (d - 2.0) / (d - 1.0);
    const double alpha = 0.9 * alpha_max * rng.next_unit();
    const int n = 2 + static_cast<int>(rng.next_u64() % 30);
    const PNorm p = PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
    const double limit = phi_band_limit(d, p, alpha);
    ShrinkageConfig cfg(d, p, alpha, PhiSpec::constant(limit * rng.next_unit()), false,
                        ScaleMode::Unknown);
    const auto rep = check_minimax(cfg, Theorem::T3, n, grid);
    REQUIRE(rep.verdict);
    for (double x : xs) REQUIRE(unknown_risk_margin(x, cfg, n) <= 1e-9);
  }
}

TEST_CASE("T1 verdict implies T2 verdict for the same configuration") {
  StreamRng rng(33, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 3 + static_cast<int>(rng.next_u64() % 8);
    const double alpha_max = (d - 2.0) / (d - 1.0);
    const double alpha = 0.9 * alpha_max * rng.next_unit();
    const PNorm p = PNorm::finite(std::exp(2.8 * rng.next_unit() - 1.4));
    const double limit = phi_band_limit(d, p, alpha);
    const auto cfg = cfg_of(d, p, alpha, PhiSpec::constant(limit * rng.next_unit()));
    if (check_minimax(cfg, Theorem::T1).verdict) {
      REQUIRE(check_minimax(cfg, Theorem::T2).verdict);
    }
  }
}
