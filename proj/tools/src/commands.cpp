#include "pam_cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "pam/clt_harness.hpp"
#include "pam/csv.hpp"
#include "pam/limit_covariance.hpp"

namespace pam::cli {
namespace fs = std::filesystem;

namespace {

std::string comment_line(const RunConfig& cfg) { return csv::header_comment(cfg.hash()); }

quad::Options quad_options(const RunConfig& cfg) {
  quad::Options opt;
  opt.rel_tol = cfg.verify.quad_rel_tol;
  return opt;
}

std::string limit_formula(LimitFamily family) {
  switch (family) {
    case LimitFamily::G: return "g(t1,t2) = tau (2 pi)^-d \\int ds \\int psi(s z) f^(dz)";
    case LimitFamily::D1Finite: return "(t1 ^ t2) f(R)";
    case LimitFamily::C1: return "c1(t1,t2) = (t1 ^ t2)^(1-beta) tau^beta / (1-beta) \\int tent(z) |z|^-beta dz";
    case LimitFamily::C2: return "c2(t1,t2) = 2 tau kappa_{1,d} (2 pi)^-d \\int psi(z) |z|^(1-d) dz";
    case LimitFamily::C3:
      return "c3(t1,t2) = tau^(2-beta) kappa (2 pi)^-d Gamma(beta-1) \\int psi(z) |z|^(2-beta-d) dz";
  }
  return {};
}

// Limit matrix for the config, or nullopt with the exit code set.
std::optional<LimitCovariance> compute_limits(const RunConfig& cfg, const CovarianceModel& model,
                                              std::ostream& err, int& code) {
  try {
    const RegimeClassification rc = classify_regime(model);
    return limit_matrix(model, cfg.times, rc.family, quad_options(cfg), cfg.threads);
  } catch (const UnsupportedRegimeError& e) {
    err << "error: " << e.what() << '\n';
    code = kRegimeMismatch;
  } catch (const QuadratureError& e) {
    err << "error: " << e.what() << '\n';
    code = kConfigError;
  }
  return std::nullopt;
}

std::optional<std::uint32_t> read_manifest_crc(const fs::path& manifest, std::uint32_t& hash) {
  const RunConfig m = load_config(manifest);
  hash = m.hash();
  return m.ensemble_crc;
}

}  // namespace

int cmd_limits(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const CovarianceModel model = cfg.build_model();
  RegimeClassification rc;
  try {
    rc = classify_regime(model);
  } catch (const UnsupportedRegimeError& e) {
    err << "error: " << e.what() << '\n';
    return kRegimeMismatch;
  }
  out << "model: " << model.describe() << '\n'
      << "regime: " << to_string(rc.regime) << '\n'
      << "sigma_N: " << rc.rate.describe() << '\n'
      << "limit: " << limit_formula(rc.family) << '\n';
  if (rc.family == LimitFamily::D1Finite) {
    out << "bracket: [(t1 ^ t2) f(R), 2 (t1 ^ t2) f(R)], f(R) = " << csv::format(total_mass(model))
        << (rc.rajchman ? " (Rajchman: limit attained)" : " (limit not pinned)") << '\n';
  }
  int code = kPass;
  const auto lc = compute_limits(cfg, model, err, code);
  if (!lc) return code;
  const fs::path dir(cfg.out);
  const std::string comment = comment_line(cfg);
  write_limit_csv(*lc, dir / "limits.csv", dir / "limits_errors.csv", comment);
  if (lc->family == LimitFamily::D1Finite) {
    csv::write_file(dir / "limits_lower.csv", limit_csv(*lc, lc->lower, comment));
    csv::write_file(dir / "limits_upper.csv", limit_csv(*lc, lc->upper, comment));
  }
  out << "max quadrature error: " << csv::format(lc->max_error) << '\n'
      << "wrote " << (dir / "limits.csv").string() << '\n';
  return kPass;
}

namespace {

// Runs the ensemble and writes ensemble.csv + manifest.ini. On blow-up the
// completed replicas are still written.
int simulate_into(const RunConfig& cfg, const CovarianceModel& model, FieldEnsemble& ens,
                  std::ostream& out, std::ostream& err) {
  EnsembleOptions opt;
  opt.threads = cfg.threads;
  opt.zero_noise = cfg.zero_noise;
  opt.blow_up = cfg.blow_up;
  opt.keep_partial = true;
  ens = run_ensemble(model, cfg.grid, cfg.replicas, cfg.seed, cfg.times, opt);
  const fs::path dir(cfg.out);
  const std::string body = ensemble_csv(ens, comment_line(cfg));
  csv::write_file(dir / "ensemble.csv", body);
  csv::write_file(dir / "manifest.ini", manifest_text(cfg, csv::crc32(body)));
  double neg = 0.0;
  for (double v : ens.negative_fraction) neg = std::max(neg, v);
  out << "replicas: " << ens.completed_count() << '/' << ens.replicas << '\n'
      << "max negative fraction: " << csv::format(neg) << '\n'
      << "wrote " << (dir / "ensemble.csv").string() << '\n';
  if (!ens.failure.empty()) {
    err << "error: numerical blow-up, " << ens.failure << '\n';
    return kBlowUp;
  }
  return kPass;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const CovarianceModel model = cfg.build_model();
  try {
    classify_regime(model);
  } catch (const UnsupportedRegimeError& e) {
    err << "error: " << e.what() << '\n';
    return kRegimeMismatch;
  }
  FieldEnsemble ens;
  return simulate_into(cfg, model, ens, out, err);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const CovarianceModel model = cfg.build_model();
  RegimeClassification rc;
  try {
    rc = classify_regime(model);
  } catch (const UnsupportedRegimeError& e) {
    err << "error: " << e.what() << '\n';
    return kRegimeMismatch;
  }
  const fs::path dir(cfg.out);
  const fs::path ens_path = dir / "ensemble.csv";
  const fs::path manifest = dir / "manifest.ini";
  FieldEnsemble ens;
  if (fs::exists(ens_path)) {
    if (!fs::exists(manifest)) {
      err << "error: " << ens_path.string() << " has no manifest\n";
      return kIntegrity;
    }
    std::uint32_t manifest_hash = 0;
    std::optional<std::uint32_t> crc;
    try {
      crc = read_manifest_crc(manifest, manifest_hash);
    } catch (const Error& e) {
      err << "error: unreadable manifest: " << e.what() << '\n';
      return kIntegrity;
    }
    const std::string body = csv::read_file(ens_path);
    if (!crc || csv::crc32(body) != *crc) {
      err << "error: checksum mismatch for " << ens_path.string() << '\n';
      return kIntegrity;
    }
    const csv::Table table = csv::parse(body);
    std::uint32_t header_hash = 0;
    if (table.comments.empty() || !csv::parse_header_comment(table.comments.front(), header_hash) ||
        header_hash != manifest_hash) {
      err << "error: ensemble header does not match its manifest\n";
      return kIntegrity;
    }
    if (header_hash != cfg.hash()) {
      err << "error: ensemble was produced by a different configuration (config="
          << csv::hex32(header_hash) << ", expected " << csv::hex32(cfg.hash()) << ")\n";
      return kIntegrity;
    }
    ens = parse_ensemble_csv(body, cfg.grid, cfg.seed, rc.rate);
    if (ens.times != cfg.times || ens.boxes != cfg.grid.boxes) {
      err << "error: ensemble grid differs from the configuration\n";
      return kRegimeMismatch;
    }
    out << "using " << ens_path.string() << '\n';
  } else {
    const int code = simulate_into(cfg, model, ens, out, err);
    if (code != kPass) return code;
  }

  std::optional<LimitCovariance> limits;
  if (cfg.verify.limits) {
    int code = kPass;
    limits = compute_limits(cfg, model, err, code);
    if (!limits) return code;
    if (limits->times != ens.times) {
      err << "error: limit and ensemble time grids differ\n";
      return kRegimeMismatch;
    }
  }
  ReportOptions ropt;
  const bool normality_skipped =
      cfg.verify.normality && ens.completed_count() < cfg.verify.normality_min_samples;
  ropt.normality = cfg.verify.normality && !normality_skipped;
  ropt.normality_min_samples = cfg.verify.normality_min_samples;
  McReport rep;
  try {
    rep = build_report(ens, limits, ropt);
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  write_report(rep, dir / "report", comment_line(cfg));

  bool ok = true;
  auto verdict = [&](bool pass) {
    ok = ok && pass;
    return pass ? "PASS" : "FAIL";
  };
  out << std::setprecision(4);
  out << "regime: " << to_string(rc.regime) << ", sigma_N = " << rc.rate.describe() << '\n';
  if (cfg.verify.regression) {
    for (const auto& row : rep.regression) {
      if (!row.fit) {
        out << "regression t=" << row.t << ": skipped (needs 4 box sizes)\n";
        continue;
      }
      const auto& f = *row.fit;
      const double half = 0.5 * (f.fit.ci_hi - f.fit.ci_lo);
      out << "regression t=" << row.t << ": slope " << f.fit.slope << " ± " << half << " (expected "
          << f.expected << (f.log_compensated ? ", log-compensated" : "") << ", tol "
          << cfg.verify.slope_tolerance << ") "
          << verdict(std::abs(f.deviation()) <= cfg.verify.slope_tolerance) << '\n';
    }
  }
  if (normality_skipped) {
    out << "normality: skipped (" << ens.completed_count() << " replicas, needs "
        << cfg.verify.normality_min_samples << ")\n";
  }
  if (ropt.normality) {
    for (const auto& row : rep.normality) {
      if (row.n_box != rep.boxes.back()) continue;
      const auto& s = row.stats;
      const bool pass = std::abs(s.skewness) < cfg.verify.max_skew &&
                        std::abs(s.excess_kurtosis) < cfg.verify.max_excess_kurtosis &&
                        s.ks < cfg.verify.max_ks;
      out << "normality N=" << row.n_box << " t=" << row.t << ": skew " << s.skewness << ", kurt "
          << s.excess_kurtosis << ", ks " << s.ks << ' ' << verdict(pass) << '\n';
    }
  }
  if (rep.comparison) {
    const LimitComparison& c = *rep.comparison;
    for (std::size_t i = 0; i < c.k; ++i) {
      for (std::size_t j = i; j < c.k; ++j) {
        const std::size_t e = i * c.k + j;
        out << "limit N=" << rep.boxes.back() << " (" << rep.times[i] << "," << rep.times[j]
            << "): empirical " << c.empirical[e] << " ± " << c.standard_error[e] << ", limit "
            << c.limit[e] << ", z " << c.z[e];
        if (limits->family == LimitFamily::D1Finite) {
          const double lo = cfg.verify.bracket_lo * limits->lower[e];
          const double hi = cfg.verify.bracket_hi * limits->lower[e];
          out << ", bracket [" << lo << ", " << hi << "] "
              << verdict(c.empirical[e] >= lo && c.empirical[e] <= hi);
        } else if (cfg.verify.max_abs_z > 0.0) {
          out << ' ' << verdict(std::abs(c.z[e]) <= cfg.verify.max_abs_z);
        }
        out << '\n';
      }
    }
  }
  out << "wrote " << (dir / "report").string() << '\n'
      << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? kPass : kChecksFailed;
}

int run(int argc, char** argv) {
  CLI::App app{"Parabolic Anderson model: limit covariances, simulation and CLT checks"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool zero_noise = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--zero-noise", zero_noise, "debug: switch the noise off");
  };
  auto* limits = app.add_subcommand("limits", "evaluate the limit covariance on the time grid");
  auto* simulate = app.add_subcommand("simulate", "run the replica ensemble");
  auto* verify = app.add_subcommand("verify", "Monte Carlo report and acceptance checks");
  for (auto* s : {limits, simulate, verify}) add_common(s);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return kConfigError;
  }
  if (!out_dir.empty()) cfg.out = out_dir;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (zero_noise) cfg.zero_noise = true;

  try {
    if (limits->parsed()) return cmd_limits(cfg, std::cout, std::cerr);
    if (simulate->parsed()) return cmd_simulate(cfg, std::cout, std::cerr);
    return cmd_verify(cfg, std::cout, std::cerr);
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBlowUp;
  } catch (const UnsupportedRegimeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRegimeMismatch;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace pam::cli
