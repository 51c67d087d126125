#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lpshrink/estimator.hpp"
#include "lpshrink/risk.hpp"
#include "lpshrink/rng.hpp"

namespace lpshrink {

/// Monte Carlo estimate of E ||theta_hat - theta||^2 / sigma^2 for one
/// (estimator, mean, scale) cell. std_err is the sample standard deviation
/// over replicates divided by sqrt(reps).
struct RiskEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
};

/// Sampling configuration: Z ~ N_d(theta, sigma2 I), plus S ~ sigma2 chi^2_n
/// in unknown-scale mode.
struct MeanConfig {
  std::vector<double> theta;
  double sigma2 = 1.0;
  ScaleMode mode = ScaleMode::Known;
  int n = 0;

  static MeanConfig known(std::vector<double> theta, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("MeanConfig: sigma2 must be > 0");
    MeanConfig m;
    m.theta = std::move(theta);
    m.sigma2 = sigma2;
    return m;
  }
  static MeanConfig unknown(std::vector<double> theta, double sigma2, int n) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("MeanConfig: sigma2 must be > 0");
    if (n < 1) throw std::invalid_argument("MeanConfig: n must be >= 1");
    MeanConfig m;
    m.theta = std::move(theta);
    m.sigma2 = sigma2;
    m.mode = ScaleMode::Unknown;
    m.n = n;
    return m;
  }
};

namespace detail {

inline constexpr std::uint64_t kBlockLen = 4096;

inline unsigned effective_workers(unsigned workers) {
  if (workers != 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(begin, end) over fixed-size replicate blocks and returns the
/// per-block partials in block order. The block layout and the ordered
/// reduction make every aggregate independent of the worker count.
template <typename Partial, typename BlockFn>
std::vector<Partial> run_blocks(std::uint64_t count, unsigned workers, BlockFn fn) {
  const std::uint64_t n_blocks = (count + kBlockLen - 1) / kBlockLen;
  std::vector<Partial> partials(static_cast<std::size_t>(n_blocks));
  auto run_one = [&](std::uint64_t b) {
    const std::uint64_t lo = b * kBlockLen;
    const std::uint64_t hi = std::min(count, lo + kBlockLen);
    partials[static_cast<std::size_t>(b)] = fn(lo, hi);
  };
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::uint64_t>(effective_workers(workers), n_blocks));
  if (n_workers <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_one(b);
    return partials;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= n_blocks || failed.load()) return;
        run_one(b);
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(error);
  return partials;
}

struct MomentAccum {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
};

inline double mean_of(const MomentAccum& a, std::uint64_t n) {
  return a.sum / static_cast<double>(n);
}

inline double std_err_of(const MomentAccum& a, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  const double var = std::max(0.0, (a.sum_sq - a.sum * a.sum / nn) / (nn - 1.0));
  return std::sqrt(var / nn);
}

inline void draw_observation(StreamRng& rng, const MeanConfig& mean_cfg,
                             std::span<double> z_out, double& sigma2_eff_out) {
  const double sigma = std::sqrt(mean_cfg.sigma2);
  for (std::size_t i = 0; i < z_out.size(); ++i) {
    z_out[i] = mean_cfg.theta[i] + sigma * rng.next_normal();
  }
  if (mean_cfg.mode == ScaleMode::Known) {
    sigma2_eff_out = mean_cfg.sigma2;
  } else {
    const double s = mean_cfg.sigma2 * rng.next_chi_square(static_cast<double>(mean_cfg.n));
    sigma2_eff_out = s / (static_cast<double>(mean_cfg.n) + 2.0);
  }
}

inline void validate_cell(const ShrinkageConfig& cfg, const MeanConfig& mean_cfg,
                          std::uint64_t reps) {
  if (reps < 2) throw std::invalid_argument("mc_risk: reps must be >= 2");
  if (mean_cfg.theta.size() != static_cast<std::size_t>(cfg.d)) {
    throw std::invalid_argument("mc_risk: theta length does not match config.d");
  }
  if (mean_cfg.mode != cfg.scale_mode) {
    throw std::invalid_argument("mc_risk: sampling scale mode does not match config");
  }
}

}  // namespace detail

struct McSummary {
  RiskEstimate risk;
  bool has_sure = false;
  double sure_mean = 0.0;
  double sure_std_err = 0.0;
  double zeroed_fraction = 0.0;  // mean fraction of exactly-zero coordinates
};

/// One pass over reps replicates: loss, optionally the per-draw unbiased risk
/// estimate (known scale only), and the average zeroed-coordinate fraction.
/// Replicate k draws from stream (seed, k); output depends on (seed, reps)
/// but not on `workers`.
inline McSummary mc_summary(const ShrinkageConfig& cfg, const MeanConfig& mean_cfg,
                            std::uint64_t reps, std::uint64_t seed, unsigned workers = 0,
                            bool with_sure = false) {
  detail::validate_cell(cfg, mean_cfg, reps);
  if (with_sure && cfg.scale_mode != ScaleMode::Known) {
    throw std::invalid_argument("mc_summary: sure requires known scale");
  }
  const double sigma = std::sqrt(mean_cfg.sigma2);

  struct Partial {
    detail::MomentAccum loss, sure_acc;
    double zero_sum = 0.0;
  };
  auto partials = detail::run_blocks<Partial>(
      reps, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        Partial acc;
        std::vector<double> z(cfg.d), est(cfg.d), w(with_sure ? cfg.d : 0);
        for (std::uint64_t k = lo; k < hi; ++k) {
          StreamRng rng(seed, k);
          double sigma2_eff = 0.0;
          detail::draw_observation(rng, mean_cfg, z, sigma2_eff);
          shrink_into(z, sigma2_eff, cfg, est);
          double loss = 0.0;
          int zeroed = 0;
          for (int i = 0; i < cfg.d; ++i) {
            const double diff = est[i] - mean_cfg.theta[i];
            loss += diff * diff;
            if (est[i] == 0.0) ++zeroed;
          }
          acc.loss.add(loss / mean_cfg.sigma2);
          acc.zero_sum += static_cast<double>(zeroed) / static_cast<double>(cfg.d);
          if (with_sure) {
            for (int i = 0; i < cfg.d; ++i) w[i] = z[i] / sigma;
            acc.sure_acc.add(sure_value_normalized(w, cfg));
          }
        }
        return acc;
      });

  Partial total;
  for (const auto& p : partials) {
    total.loss.sum += p.loss.sum;
    total.loss.sum_sq += p.loss.sum_sq;
    total.sure_acc.sum += p.sure_acc.sum;
    total.sure_acc.sum_sq += p.sure_acc.sum_sq;
    total.zero_sum += p.zero_sum;
  }

  McSummary out;
  out.risk = {detail::mean_of(total.loss, reps), detail::std_err_of(total.loss, reps), reps, seed};
  out.zeroed_fraction = total.zero_sum / static_cast<double>(reps);
  if (with_sure) {
    out.has_sure = true;
    out.sure_mean = detail::mean_of(total.sure_acc, reps);
    out.sure_std_err = detail::std_err_of(total.sure_acc, reps);
  }
  return out;
}

inline RiskEstimate mc_risk(const ShrinkageConfig& cfg, const MeanConfig& mean_cfg,
                            std::uint64_t reps, std::uint64_t seed, unsigned workers = 0) {
  return mc_summary(cfg, mean_cfg, reps, seed, workers, false).risk;
}

/// Paired comparison with common random numbers: both estimators see the same
/// draws, so the difference of losses has small variance.
struct PairedRisk {
  double diff_mean = 0.0;  // mean of loss(first) - loss(second)
  double diff_std_err = 0.0;
  RiskEstimate first, second;
};

inline PairedRisk mc_risk_paired(const ShrinkageConfig& first, const ShrinkageConfig& second,
                                 const MeanConfig& mean_cfg, std::uint64_t reps,
                                 std::uint64_t seed, unsigned workers = 0) {
  detail::validate_cell(first, mean_cfg, reps);
  detail::validate_cell(second, mean_cfg, reps);

  struct Partial {
    detail::MomentAccum a, b, diff;
  };
  auto partials = detail::run_blocks<Partial>(
      reps, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        Partial acc;
        std::vector<double> z(first.d), est(first.d);
        for (std::uint64_t k = lo; k < hi; ++k) {
          StreamRng rng(seed, k);
          double sigma2_eff = 0.0;
          detail::draw_observation(rng, mean_cfg, z, sigma2_eff);
          auto loss_of = [&](const ShrinkageConfig& cfg) {
            shrink_into(z, sigma2_eff, cfg, est);
            double loss = 0.0;
            for (int i = 0; i < cfg.d; ++i) {
              const double diff = est[i] - mean_cfg.theta[i];
              loss += diff * diff;
            }
            return loss / mean_cfg.sigma2;
          };
          const double la = loss_of(first);
          const double lb = loss_of(second);
          acc.a.add(la);
          acc.b.add(lb);
          acc.diff.add(la - lb);
        }
        return acc;
      });

  Partial total;
  for (const auto& p : partials) {
    total.a.sum += p.a.sum;
    total.a.sum_sq += p.a.sum_sq;
    total.b.sum += p.b.sum;
    total.b.sum_sq += p.b.sum_sq;
    total.diff.sum += p.diff.sum;
    total.diff.sum_sq += p.diff.sum_sq;
  }

  PairedRisk out;
  out.diff_mean = detail::mean_of(total.diff, reps);
  out.diff_std_err = detail::std_err_of(total.diff, reps);
  out.first = {detail::mean_of(total.a, reps), detail::std_err_of(total.a, reps), reps, seed};
  out.second = {detail::mean_of(total.b, reps), detail::std_err_of(total.b, reps), reps, seed};
  return out;
}

/// Studentized two-sided Monte Carlo comparison of both sides of an identity,
/// using common random numbers: zscore = mean(lhs_k - rhs_k) / se(lhs_k -
/// rhs_k). A large zscore is a finding, not an error.
struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_std_err = 0.0;
  double rhs_std_err = 0.0;
  double zscore = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
};

namespace detail {

template <typename PairFn>
IdentityCheck identity_mc(std::uint64_t reps, std::uint64_t seed, unsigned workers, PairFn fn) {
  if (reps < 2) throw std::invalid_argument("identity check: reps must be >= 2");
  struct Partial {
    MomentAccum lhs, rhs, diff;
  };
  auto partials = run_blocks<Partial>(reps, workers, [&](std::uint64_t lo, std::uint64_t hi) {
    Partial acc;
    for (std::uint64_t k = lo; k < hi; ++k) {
      StreamRng rng(seed, k);
      const auto [l, r] = fn(rng);
      acc.lhs.add(l);
      acc.rhs.add(r);
      acc.diff.add(l - r);
    }
    return acc;
  });
  Partial total;
  for (const auto& p : partials) {
    total.lhs.sum += p.lhs.sum;
    total.lhs.sum_sq += p.lhs.sum_sq;
    total.rhs.sum += p.rhs.sum;
    total.rhs.sum_sq += p.rhs.sum_sq;
    total.diff.sum += p.diff.sum;
    total.diff.sum_sq += p.diff.sum_sq;
  }
  IdentityCheck out;
  out.lhs = mean_of(total.lhs, reps);
  out.rhs = mean_of(total.rhs, reps);
  out.lhs_std_err = std_err_of(total.lhs, reps);
  out.rhs_std_err = std_err_of(total.rhs, reps);
  const double diff_se = std_err_of(total.diff, reps);
  out.zscore = diff_se == 0.0 ? 0.0 : mean_of(total.diff, reps) / diff_se;
  out.reps = reps;
  out.seed = seed;
  return out;
}

}  // namespace detail

/// Gaussian integration-by-parts identity with the first-coordinate linear
/// field xi(z) = z_1 e_1: E[(z_1 - theta_1) z_1] against sigma^2 E[1].
inline IdentityCheck stein_linear_check(std::span<const double> theta, double sigma2,
                                        std::uint64_t reps, std::uint64_t seed,
                                        unsigned workers = 0) {
  if (theta.empty()) throw std::invalid_argument("stein_linear_check: empty theta");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("stein_linear_check: sigma2 must be > 0");
  const double sigma = std::sqrt(sigma2);
  std::vector<double> th(theta.begin(), theta.end());
  return detail::identity_mc(reps, seed, workers, [&, th](StreamRng& rng) {
    double z1 = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      const double zi = th[i] + sigma * rng.next_normal();
      if (i == 0) z1 = zi;
    }
    return std::pair<double, double>{(z1 - th[0]) * z1, sigma2 * 1.0};
  });
}

/// Correction field of the unclamped estimator,
///   xi_i(z) = theta_hat_i - z_i = -sigma^2 phi(||z||_p/sigma) z_i
///             / (||z||_p^{2-alpha} |z_i|^alpha),
/// for a known-scale configuration. xi_i = 0 at z_i = 0 and for z = 0.
inline void correction_field(std::span<const double> z, double sigma2,
                             const ShrinkageConfig& cfg, std::span<double> out) {
  detail::check_dims(z.size(), cfg);
  if (out.size() != z.size()) throw std::invalid_argument("correction_field: length mismatch");
  const double v = lp_norm(z, cfg.p);
  if (v == 0.0) {
    for (auto& x : out) x = 0.0;
    return;
  }
  const double sigma = std::sqrt(sigma2);
  const double base = sigma2 * cfg.phi.eval(v / sigma) / std::pow(v, 2.0 - cfg.alpha);
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = z[i] == 0.0 ? 0.0 : -base * z[i] / std::pow(std::abs(z[i]), cfg.alpha);
  }
}

/// Analytic divergence sum_i d xi_i / d z_i of the correction field,
/// evaluated through max-rescaled magnitudes (the rescaling factors cancel
/// exactly, as in psi_phi). Requires all z_i != 0 when alpha > 0.
inline double correction_divergence(std::span<const double> z, double sigma2,
                                    const ShrinkageConfig& cfg) {
  detail::check_dims(z.size(), cfg);
  const double sigma = std::sqrt(sigma2);
  std::vector<double> w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] / sigma;
  const auto sp = detail::scale_magnitudes(w);
  if (sp.top == 0.0) throw std::domain_error("correction_divergence: zero vector");
  if (cfg.alpha > 0.0) {
    for (double x : w) {
      if (x == 0.0) throw std::domain_error("correction_divergence: zero coordinate");
    }
  }
  const double m = sp.top;
  const double u = lp_norm(w, cfg.p);
  const double phi_u = cfg.phi.eval(u);
  const double dphi_u = cfg.phi.deriv(u);
  const double sum_neg = detail::power_sum(sp.t, -cfg.alpha);

  double div_sum;  // sum_i d/dw_i [phi(u) u^{alpha-2} |w_i|^{-alpha} w_i]
  if (cfg.p.is_sup()) {
    const double k = static_cast<double>(sp.top_count);
    div_sum = (1.0 - cfg.alpha) * phi_u * sum_neg / (m * m) +
              k * ((cfg.alpha - 2.0) * phi_u / (u * u) + dphi_u / u);
  } else {
    const double pval = cfg.p.value();
    const double ut = lp_norm(sp.t, cfg.p);
    const double sum_mid = detail::power_sum(sp.t, pval - cfg.alpha);
    div_sum = phi_u *
                  ((1.0 - cfg.alpha) * std::pow(ut, cfg.alpha - 2.0) * sum_neg +
                   (cfg.alpha - 2.0) * std::pow(ut, cfg.alpha - pval - 2.0) * sum_mid) /
                  (m * m) +
              dphi_u * std::pow(ut, cfg.alpha - pval - 1.0) * sum_mid / m;
  }
  // xi_i(z) = -sigma F_i(z/sigma), so d xi_i/d z_i = -dF_i/dw_i exactly.
  return -div_sum;
}

/// Same identity with the estimator's correction field, summed over
/// coordinates: E[sum_i (z_i - theta_i) xi_i] against sigma^2 E[div xi] with
/// the analytic divergence.
inline IdentityCheck stein_correction_check(const ShrinkageConfig& cfg,
                                            std::span<const double> theta, double sigma2,
                                            std::uint64_t reps, std::uint64_t seed,
                                            unsigned workers = 0) {
  if (cfg.scale_mode != ScaleMode::Known) {
    throw std::invalid_argument("stein_correction_check: known-scale field only");
  }
  if (theta.size() != static_cast<std::size_t>(cfg.d)) {
    throw std::invalid_argument("stein_correction_check: theta length does not match config.d");
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("stein_correction_check: sigma2 must be > 0");
  const double sigma = std::sqrt(sigma2);
  std::vector<double> th(theta.begin(), theta.end());

  return detail::identity_mc(reps, seed, workers, [&, th](StreamRng& rng) {
    std::vector<double> z(cfg.d), xi(cfg.d);
    for (int i = 0; i < cfg.d; ++i) z[i] = th[i] + sigma * rng.next_normal();
    correction_field(z, sigma2, cfg, xi);
    double lhs = 0.0;
    for (int i = 0; i < cfg.d; ++i) lhs += (z[i] - th[i]) * xi[i];
    const double rhs = sigma2 * correction_divergence(z, sigma2, cfg);
    return std::pair<double, double>{lhs, rhs};
  });
}

enum class ChiSquareTestFn { One, Identity, Sqrt };

/// Chi-square moment identity E[s h(s)] = sigma^2 E[n h(s) + 2 s h'(s)] for
/// s ~ sigma^2 chi^2_n and a selectable test function h.
inline IdentityCheck chi_square_identity_check(ChiSquareTestFn fn, int n, double sigma2,
                                               std::uint64_t reps, std::uint64_t seed,
                                               unsigned workers = 0) {
  if (n < 1) throw std::invalid_argument("chi_square_identity_check: n must be >= 1");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("chi_square_identity_check: sigma2 must be > 0");
  return detail::identity_mc(reps, seed, workers, [=](StreamRng& rng) {
    const double s = sigma2 * rng.next_chi_square(static_cast<double>(n));
    double h = 0.0, hprime = 0.0;
    switch (fn) {
      case ChiSquareTestFn::One:
        h = 1.0;
        hprime = 0.0;
        break;
      case ChiSquareTestFn::Identity:
        h = s;
        hprime = 1.0;
        break;
      case ChiSquareTestFn::Sqrt:
        h = std::sqrt(s);
        hprime = 0.5 / std::sqrt(s);
        break;
    }
    return std::pair<double, double>{s * h,
                                     sigma2 * (static_cast<double>(n) * h + 2.0 * s * hprime)};
  });
}

}  // namespace lpshrink
