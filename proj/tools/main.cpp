// lpshrink: lp-norm based shrinkage estimation of a multivariate normal mean.
// Subcommands: estimate, sure, risk-sim, risk-curve, check-minimax, verify.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpshrink/lpshrink.hpp"

namespace {

using nlohmann::json;
using namespace lpshrink;

// Inline comma-separated values, or a path to a single-row/single-column CSV
// file. A value that names an existing file is read as a file.
std::vector<double> parse_vector_arg(const std::string& flag, const std::string& text) {
  std::string payload = text;
  if (std::filesystem::exists(text) && std::filesystem::is_regular_file(text)) {
    std::ifstream in(text);
    if (!in) throw std::invalid_argument(flag + ": cannot open file " + text);
    std::stringstream buf;
    buf << in.rdbuf();
    payload = buf.str();
  }
  std::vector<double> out;
  std::string token;
  for (char ch : payload) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == ' ' || ch == '\t') {
      if (!token.empty()) {
        out.push_back(0.0);
        try {
          std::size_t pos = 0;
          out.back() = std::stod(token, &pos);
          if (pos != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
          throw std::invalid_argument(flag + ": bad numeric value \"" + token + "\"");
        }
        token.clear();
      }
      continue;
    }
    token += ch;
  }
  if (!token.empty()) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(token, &pos));
      if (pos != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": bad numeric value \"" + token + "\"");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty vector");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << text;
}

void emit(const std::optional<std::string>& out_path, const std::string& text) {
  if (out_path) {
    write_text(*out_path, text);
  } else {
    std::cout << text;
  }
}

// Flags shared by `estimate` and `sure`.
struct EstimatorArgs {
  std::string z_text;
  std::string p_text = "2";
  double alpha = 0.0;
  std::string phi_text = "auto";
  double sigma2 = 1.0;
  bool sigma2_given = false;
  double s = 0.0;
  bool s_given = false;
  int n = 0;
  bool n_given = false;
  bool positive_part = false;

  void attach(CLI::App* cmd, bool require_z) {
    auto* z_opt = cmd->add_option("--z", z_text, "observation vector: inline CSV or a file path");
    if (require_z) z_opt->required();
    cmd->add_option("--p", p_text, "norm exponent: positive decimal or \"inf\"")
        ->capture_default_str();
    cmd->add_option("--alpha", alpha, "coordinate exponent in [0,1)")->capture_default_str();
    cmd->add_option("--phi", phi_text,
                    "shrinkage profile: constant:<c>, ds:<lambda>, ds-unknown:<lambda>, auto")
        ->capture_default_str();
    cmd->add_option("--sigma2", sigma2, "known variance")
        ->capture_default_str()
        ->trigger_on_parse()
        ->each([this](const std::string&) { sigma2_given = true; });
    cmd->add_option("--s", s, "scale statistic s ~ sigma2 chi^2_n (unknown-variance mode)")
        ->trigger_on_parse()
        ->each([this](const std::string&) { s_given = true; });
    cmd->add_option("--n", n, "chi-square degrees of freedom for --s / ds-unknown")
        ->trigger_on_parse()
        ->each([this](const std::string&) { n_given = true; });
    cmd->add_flag("--positive-part", positive_part, "clamp the shrinkage factor at zero");
  }

  ScaleMode mode() const {
    if (s_given && sigma2_given) {
      throw std::invalid_argument("pass either --sigma2 (known) or --s with --n (unknown)");
    }
    return s_given ? ScaleMode::Unknown : ScaleMode::Known;
  }

  PhiSpec phi_spec() const {
    PhiSpec spec = parse_phi_spec(phi_text);
    if (spec.kind == PhiSpec::Kind::DSUnknown) {
      if (!n_given) throw std::invalid_argument("phi ds-unknown requires --n");
      spec.n = n;
    }
    return spec;
  }

  Observation observation(const std::vector<double>& z) const {
    if (mode() == ScaleMode::Unknown) {
      if (!n_given) throw std::invalid_argument("--s requires --n");
      return Observation::unknown(z, s, n);
    }
    return Observation::known(z, sigma2);
  }

  ShrinkageConfig config(int d) const {
    return ShrinkageConfig(d, parse_pnorm(p_text), alpha, phi_spec(), positive_part, mode());
  }

  json describe(const ShrinkageConfig& cfg) const {
    json j;
    j["d"] = cfg.d;
    j["p"] = render_pnorm(cfg.p);
    j["alpha"] = cfg.alpha;
    j["phi"] = render_phi_spec(cfg.phi.spec());
    j["positive_part"] = cfg.positive_part;
    j["scale_mode"] = render_scale_mode(cfg.scale_mode);
    if (cfg.scale_mode == ScaleMode::Known) {
      j["sigma2"] = sigma2;
    } else {
      j["s"] = s;
      j["n"] = n;
    }
    return j;
  }
};

int cmd_estimate(const EstimatorArgs& args, const std::optional<std::string>& out_path) {
  const auto z = parse_vector_arg("--z", args.z_text);
  const auto cfg = args.config(static_cast<int>(z.size()));
  const auto obs = args.observation(z);
  const auto est = shrink(obs, cfg);

  json j = args.describe(cfg);
  j["estimate"] = est;
  // Sparsity indices are defined for the thresholding family only
  // (positive part, alpha > 0, constant profile); otherwise empty.
  std::vector<std::size_t> zeros;
  if (cfg.positive_part && cfg.alpha > 0.0 && cfg.phi.is_constant()) {
    zeros = zero_set(obs, cfg);
    j["zero_threshold"] = zero_threshold(obs, cfg);
  }
  j["zero_set"] = zeros;
  emit(out_path, j.dump(2) + "\n");
  return 0;
}

int cmd_sure(const EstimatorArgs& args, const std::optional<std::string>& out_path) {
  if (args.mode() != ScaleMode::Known) {
    throw std::invalid_argument("sure requires known scale (--sigma2)");
  }
  const auto z = parse_vector_arg("--z", args.z_text);
  const auto cfg = args.config(static_cast<int>(z.size()));
  const auto rep = sure(args.observation(z), cfg);

  json j = args.describe(cfg);
  j["value"] = rep.value;
  j["per_coordinate_weights"] = rep.per_coordinate_weights;
  j["psi"] = rep.psi;
  j["psi_upper"] = rep.psi_upper;
  emit(out_path, j.dump(2) + "\n");
  return 0;
}

// Flags shared by risk-sim and risk-curve.
struct SweepArgs {
  int d = 5;
  std::string p_text = "2";
  double alpha = 0.0;
  std::string phi_text = "auto";
  std::string theta_norms_text;
  std::string direction_text = "first-axis";
  double sigma2 = 1.0;
  std::string scale_text = "known";
  int n = 0;
  bool n_given = false;
  bool positive_part = false;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--d", d, "dimension")->capture_default_str();
    cmd->add_option("--p", p_text, "norm exponent: positive decimal or \"inf\"")
        ->capture_default_str();
    cmd->add_option("--alpha", alpha, "coordinate exponent in [0,1)")->capture_default_str();
    cmd->add_option("--phi", phi_text,
                    "shrinkage profile: constant:<c>, ds:<lambda>, ds-unknown:<lambda>, auto")
        ->capture_default_str();
    cmd->add_option("--theta-norms", theta_norms_text, "comma list of mean norms to sweep")
        ->required();
    cmd->add_option("--direction", direction_text,
                    "mean direction: \"first-axis\" or an inline/file vector")
        ->capture_default_str();
    cmd->add_option("--sigma2", sigma2, "sampling variance")->capture_default_str();
    cmd->add_option("--scale", scale_text, "known | unknown")->capture_default_str();
    cmd->add_option("--n", n, "chi-square degrees of freedom (unknown scale / ds-unknown)")
        ->trigger_on_parse()
        ->each([this](const std::string&) { n_given = true; });
    cmd->add_flag("--positive-part", positive_part, "clamp the shrinkage factor at zero");
    cmd->add_option("--reps", reps, "Monte Carlo replicates per cell")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--workers", workers, "worker threads (0 = hardware)")->capture_default_str();
  }

  ScaleMode mode() const {
    if (scale_text == "known") return ScaleMode::Known;
    if (scale_text == "unknown") return ScaleMode::Unknown;
    throw std::invalid_argument("--scale: expected known or unknown, got \"" + scale_text + "\"");
  }
};

struct SweepOutput {
  std::vector<ReportRow> rows;
  std::string csv;
  int d;
};

SweepOutput run_sweep(const SweepArgs& args) {
  const ScaleMode mode = args.mode();
  if (mode == ScaleMode::Unknown && !args.n_given) {
    throw std::invalid_argument("--scale unknown requires --n");
  }
  if (!(args.sigma2 > 0.0)) throw std::invalid_argument("--sigma2 must be > 0");

  PhiSpec spec = parse_phi_spec(args.phi_text);
  if (spec.kind == PhiSpec::Kind::DSUnknown) {
    if (!args.n_given) throw std::invalid_argument("phi ds-unknown requires --n");
    spec.n = args.n;
  }
  const ShrinkageConfig cfg(args.d, parse_pnorm(args.p_text), args.alpha, spec,
                            args.positive_part, mode);

  auto norms = parse_vector_arg("--theta-norms", args.theta_norms_text);
  for (double v : norms) {
    if (!(v >= 0.0)) throw std::invalid_argument("--theta-norms: norms must be non-negative");
  }
  std::sort(norms.begin(), norms.end());

  std::vector<double> direction(static_cast<std::size_t>(args.d), 0.0);
  if (args.direction_text == "first-axis") {
    direction[0] = 1.0;
  } else {
    direction = parse_vector_arg("--direction", args.direction_text);
    if (direction.size() != static_cast<std::size_t>(args.d)) {
      throw std::invalid_argument("--direction: length does not match --d");
    }
    const double len = lp_norm(direction, PNorm::finite(2.0));
    if (len == 0.0) throw std::invalid_argument("--direction: zero vector");
    for (auto& x : direction) x /= len;
  }

  SweepOutput out;
  out.d = args.d;
  std::string csv;
  csv += "# lpshrink risk sweep\n";
  csv += "# d=" + std::to_string(args.d) + " p=" + render_pnorm(cfg.p) +
         " alpha=" + format_double(cfg.alpha) + " phi=" + render_phi_spec(cfg.phi.spec()) +
         " scale_mode=" + render_scale_mode(mode) +
         (mode == ScaleMode::Unknown ? " n=" + std::to_string(args.n) : std::string()) +
         " sigma2=" + format_double(args.sigma2) +
         " positive_part=" + (args.positive_part ? std::string("true") : std::string("false")) +
         "\n";
  csv += "# direction=" + args.direction_text + " reps=" + format_u64(args.reps) +
         " seed=" + format_u64(args.seed) + "\n";
  csv += report_csv_header() + "\n";

  for (double norm : norms) {
    std::vector<double> theta(direction.size());
    for (std::size_t i = 0; i < direction.size(); ++i) theta[i] = norm * direction[i];
    const MeanConfig mean_cfg = mode == ScaleMode::Known
                                    ? MeanConfig::known(theta, args.sigma2)
                                    : MeanConfig::unknown(theta, args.sigma2, args.n);
    const bool with_sure = mode == ScaleMode::Known;
    const McSummary summary =
        mc_summary(cfg, mean_cfg, args.reps, args.seed, args.workers, with_sure);

    ReportRow row;
    row.d = args.d;
    row.p = render_pnorm(cfg.p);
    row.alpha = cfg.alpha;
    row.phi = render_phi_spec(cfg.phi.spec());
    row.scale_mode = render_scale_mode(mode);
    if (mode == ScaleMode::Unknown) row.n = args.n;
    row.theta_norm = norm;
    row.reps = args.reps;
    row.seed = args.seed;
    row.risk_mean = summary.risk.mean;
    row.risk_stderr = summary.risk.std_err;
    if (summary.has_sure) row.sure_mean = summary.sure_mean;
    if (args.positive_part) row.zeroed_fraction = summary.zeroed_fraction;
    csv += to_csv(row) + "\n";
    out.rows.push_back(std::move(row));
  }
  out.csv = std::move(csv);
  return out;
}

int cmd_risk_sim(const SweepArgs& args, const std::optional<std::string>& out_path) {
  const auto out = run_sweep(args);
  emit(out_path, out.csv);
  return 0;
}

int cmd_risk_curve(const SweepArgs& args, const std::optional<std::string>& out_path,
                   const std::string& svg_path) {
  const auto out = run_sweep(args);
  const std::string title = "risk vs theta norm (d=" + std::to_string(out.d) + ")";
  write_text(svg_path, render_risk_curve_svg(out.rows, static_cast<double>(out.d), title));
  if (out_path) write_text(*out_path, out.csv);
  return 0;
}

int cmd_check_minimax(int d, const std::string& p_text, double alpha, const std::string& phi_text,
                      const std::string& theorem_text, std::optional<int> n, GridSpec grid,
                      const std::optional<std::string>& out_path) {
  PhiSpec spec = parse_phi_spec(phi_text);
  if (spec.kind == PhiSpec::Kind::DSUnknown) {
    if (!n) throw std::invalid_argument("phi ds-unknown requires --n");
    spec.n = *n;
  }
  const Theorem theorem = parse_theorem(theorem_text);
  const MinimaxReport rep =
      check_minimax_params(d, parse_pnorm(p_text), alpha, spec, theorem, n, grid);

  json j;
  j["theorem"] = render_theorem(rep.theorem);
  j["d"] = d;
  j["p"] = p_text;
  j["alpha"] = alpha;
  j["phi"] = phi_text;
  if (n) j["n"] = *n;
  j["d_ok"] = rep.d_ok;
  j["alpha_ok"] = rep.alpha_ok;
  j["band_ok"] = rep.band_ok;
  j["monotone_ok"] = rep.monotone_ok;
  j["plateau_ok"] = rep.plateau_ok;
  j["grid"] = rep.grid;
  j["verdict"] = rep.verdict;
  emit(out_path, j.dump(2) + "\n");
  return rep.verdict ? 0 : 1;
}

int cmd_verify(const std::string& suite, std::uint64_t trials, std::uint64_t seed,
               unsigned workers) {
  if (suite != "lemmas" && suite != "identities" && suite != "all") {
    throw std::invalid_argument("--suite: expected lemmas, identities or all");
  }
  std::vector<CheckResult> results;
  if (suite == "lemmas" || suite == "all") {
    auto part = run_lemma_suite(trials, seed);
    results.insert(results.end(), part.begin(), part.end());
  }
  if (suite == "identities" || suite == "all") {
    auto part = run_identity_suite(trials, seed, workers);
    results.insert(results.end(), part.begin(), part.end());
  }
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (trials=" << r.trials << ")";
    if (!r.detail.empty()) std::cout << " " << r.detail;
    std::cout << "\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lp-norm based shrinkage estimation with minimaxity and sparsity"};
  app.require_subcommand(1);
  app.failure_message(
      [](const CLI::App*, const CLI::Error& e) { return std::string("error: ") + e.what() + "\n"; });

  EstimatorArgs est_args;
  std::optional<std::string> est_out;
  auto* estimate = app.add_subcommand("estimate", "apply the shrinkage estimator to a vector");
  est_args.attach(estimate, /*require_z=*/true);
  estimate->add_option("--out", est_out, "write JSON here instead of stdout");

  EstimatorArgs sure_args;
  std::optional<std::string> sure_out;
  auto* sure_cmd = app.add_subcommand("sure", "unbiased risk estimate for one observation");
  sure_args.attach(sure_cmd, /*require_z=*/true);
  sure_cmd->add_option("--out", sure_out, "write JSON here instead of stdout");

  SweepArgs sim_args;
  std::optional<std::string> sim_out;
  auto* risk_sim = app.add_subcommand("risk-sim", "Monte Carlo risk sweep over mean norms (CSV)");
  sim_args.attach(risk_sim);
  risk_sim->add_option("--out", sim_out, "CSV output path (default: stdout)");

  SweepArgs curve_args;
  std::optional<std::string> curve_out;
  std::string curve_svg;
  auto* risk_curve = app.add_subcommand("risk-curve", "risk sweep plus an SVG chart");
  curve_args.attach(risk_curve);
  risk_curve->add_option("--out", curve_out, "CSV output path (optional)");
  risk_curve->add_option("--svg", curve_svg, "SVG output path")->required();

  int mm_d = 5;
  std::string mm_p = "2";
  double mm_alpha = 0.0;
  std::string mm_phi = "auto";
  std::string mm_theorem = "t1";
  int mm_n = 0;
  bool mm_n_given = false;
  GridSpec mm_grid;
  std::optional<std::string> mm_out;
  auto* check_mm = app.add_subcommand("check-minimax",
                                      "certify the minimaxity conditions; exit 0 iff they hold");
  check_mm->add_option("--d", mm_d, "dimension")->capture_default_str();
  check_mm->add_option("--p", mm_p, "norm exponent: positive decimal or \"inf\"")
      ->capture_default_str();
  check_mm->add_option("--alpha", mm_alpha, "coordinate exponent in [0,1)")->capture_default_str();
  check_mm->add_option("--phi", mm_phi, "shrinkage profile spec")->capture_default_str();
  check_mm->add_option("--theorem", mm_theorem, "rule set: t1|t2|t3|t4")->capture_default_str();
  check_mm->add_option("--n", mm_n, "chi-square degrees of freedom (t3/t4, ds-unknown)")
      ->trigger_on_parse()
      ->each([&mm_n_given](const std::string&) { mm_n_given = true; });
  check_mm->add_option("--grid-lo", mm_grid.lo, "grid lower end")->capture_default_str();
  check_mm->add_option("--grid-hi", mm_grid.hi, "grid upper end")->capture_default_str();
  check_mm->add_option("--grid-points", mm_grid.points, "log-spaced grid points")
      ->capture_default_str();
  check_mm->add_option("--out", mm_out, "write JSON here instead of stdout");

  std::string verify_suite = "all";
  std::uint64_t verify_trials = 10000;
  std::uint64_t verify_seed = 0;
  unsigned verify_workers = 0;
  auto* verify_cmd =
      app.add_subcommand("verify", "run the randomized property suites; exit 0 iff all pass");
  verify_cmd->add_option("--suite", verify_suite, "lemmas | identities | all")
      ->capture_default_str();
  verify_cmd->add_option("--trials", verify_trials, "randomized trials per property")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "random seed")->capture_default_str();
  verify_cmd->add_option("--workers", verify_workers, "worker threads (0 = hardware)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) return cmd_estimate(est_args, est_out);
    if (sure_cmd->parsed()) return cmd_sure(sure_args, sure_out);
    if (risk_sim->parsed()) return cmd_risk_sim(sim_args, sim_out);
    if (risk_curve->parsed()) return cmd_risk_curve(curve_args, curve_out, curve_svg);
    if (check_mm->parsed()) {
      return cmd_check_minimax(mm_d, mm_p, mm_alpha, mm_phi, mm_theorem,
                               mm_n_given ? std::optional<int>(mm_n) : std::nullopt, mm_grid,
                               mm_out);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(verify_suite, verify_trials, verify_seed, verify_workers);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
