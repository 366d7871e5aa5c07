#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pam/clt_harness.hpp"
#include "pam/csv.hpp"
#include "pam/errors.hpp"
#include "pam/statistics.hpp"
#include "pam_cli/commands.hpp"
#include "pam_cli/run_config.hpp"

using namespace pam;
namespace fs = std::filesystem;

namespace {

GridSpec small_grid(std::vector<double> boxes) {
  GridSpec g = GridSpec::defaults(1);
  g.boxes = std::move(boxes);
  return g;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pam_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSmall = R"([model]
kind = riesz
dimension = 1
beta = 0.5

[grid]
N = 4, 8, 16, 32

[ensemble]
replicas = 32
seed = 5
times = 0.5, 1
)";

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pam");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("ensemble basics") {
  const auto model = CovarianceModel::gaussian(1);
  const auto two = run_ensemble(model, small_grid({8}), 2, 1, {1.0});
  CHECK(two.completed_count() == 2);
  CHECK(two.averages.size() == 2);
  CHECK(two.S(0, 0, 0) != two.S(1, 0, 0));

  EnsembleOptions one, four;
  four.threads = 4;
  const auto a = run_ensemble(model, small_grid({4, 8}), 9, 77, {0.5, 1.0}, one);
  const auto b = run_ensemble(model, small_grid({4, 8}), 9, 77, {0.5, 1.0}, four);
  CHECK(a.averages == b.averages);
  CHECK(a.negative_fraction == b.negative_fraction);

  std::set<std::uint64_t> seeds;
  for (std::size_t r = 0; r < 1000; ++r) seeds.insert(replica_seed(77, r));
  CHECK(seeds.size() == 1000);

  const auto sub = a.first(4);
  CHECK(sub.replicas == 4);
  CHECK(sub.S(3, 1, 1) == a.S(3, 1, 1));
  CHECK_THROWS_AS(a.first(10), DomainError);
  CHECK_THROWS_AS(run_ensemble(model, small_grid({8}), 2, 1, {1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(run_ensemble(model, small_grid({8}), 2, 1, {0.505}), DomainError);
}

TEST_CASE("independent replicas are uncorrelated") {
  EnsembleOptions opt;
  opt.threads = 4;
  const std::size_t m = 400;
  const auto ens = run_ensemble(CovarianceModel::gaussian(1), small_grid({8}), m, 3, {1.0}, opt);
  std::vector<double> pairs;
  for (std::size_t r = 0; r < m / 2; ++r) {
    pairs.push_back(ens.S(r, 0, 0));
    pairs.push_back(ens.S(r + m / 2, 0, 0));
  }
  const auto c = stats::covariance_jackknife(pairs, 2);
  const double corr = c(0, 1) / std::sqrt(c(0, 0) * c(1, 1));
  CHECK(std::abs(corr) < 3.0 / std::sqrt(m / 2.0));
}

TEST_CASE("blow-up inside an ensemble") {
  EnsembleOptions opt;
  opt.blow_up = 1.5;
  opt.threads = 3;
  const auto model = CovarianceModel::space_time_white();
  try {
    run_ensemble(model, small_grid({8}), 6, 1, {1.0}, opt);
    FAIL("expected a blow-up");
  } catch (const ReplicaBlowUpError& e) {
    CHECK(e.replica == 0);
    CHECK(std::string(e.what()).find("replica 0") == 0);
  }
  opt.keep_partial = true;
  const auto ens = run_ensemble(model, small_grid({8}), 6, 1, {1.0}, opt);
  CHECK(ens.completed_count() < 6);
  CHECK_FALSE(ens.failure.empty());
}

TEST_CASE("ensemble CSV round trip and report bundle") {
  const auto model = CovarianceModel::riesz(1, 0.5);
  const auto rate = classify_regime(model).rate;
  const auto ens = run_ensemble(model, small_grid({4, 8, 16, 32}), 40, 9, {0.5, 1.0});
  const std::string text = ensemble_csv(ens, "# pam 0.1.0 config=00000000");
  const auto back = parse_ensemble_csv(text, ens.grid, 9, rate);
  CHECK(back.averages == ens.averages);
  CHECK(back.times == ens.times);
  CHECK(back.boxes == ens.boxes);
  CHECK(ensemble_csv(back, "# pam 0.1.0 config=00000000") == text);

  const auto table = csv::parse(text);
  CHECK(table.header == std::vector<std::string>{"replica", "N", "t", "S", "sigma_N_S"});
  CHECK(table.rows.size() == 40 * 4 * 2);

  ReportOptions ropt;
  ropt.normality = false;
  const auto rep = build_report(ens, std::nullopt, ropt);
  CHECK(rep.normality.empty());
  CHECK_FALSE(rep.comparison);
  REQUIRE(rep.regression.size() == 2);
  CHECK(rep.regression[0].fit);
  for (const auto& c : rep.covariance) {
    for (double s : c.se) CHECK(s > 0.0);
  }
  TempDir dir("report");
  write_report(rep, dir.path, "# x");
  CHECK(fs::exists(dir.path / "covariance.csv"));
  CHECK(fs::exists(dir.path / "regression.csv"));
  CHECK_FALSE(fs::exists(dir.path / "normality.csv"));
  CHECK_FALSE(fs::exists(dir.path / "zscores.csv"));
}

TEST_CASE("config parsing reports fields and lines") {
  const auto cfg = cli::parse_config(kSmall);
  CHECK(cfg.model.kind == "riesz");
  CHECK(cfg.grid.half_width == 35.0);
  CHECK(cfg.times == std::vector<double>{0.5, 1.0});
  CHECK(cli::parse_config(cfg.canonical()).hash() == cfg.hash());
  CHECK(cli::parse_config(cfg.canonical()).canonical() == cfg.canonical());

  const std::string bad = "[model]\nkind = riesz\ndimension = 1\nbeta = 2.5\n[grid]\nN = 8\ndt = 0.5\n"
                          "[ensemble]\nreplicas = 0\ntimes = 0.3, 0.2\n";
  try {
    cli::parse_config(bad);
    FAIL("expected a config error");
  } catch (const cli::ConfigError& e) {
    std::map<std::string, int> lines;
    for (const auto& i : e.issues) lines[i.field] = i.line;
    CHECK(lines.count("model.beta"));
    CHECK(lines["model.beta"] == 4);
    CHECK(lines.count("grid.dt"));
    CHECK(lines["grid.dt"] == 7);
    CHECK(lines.count("ensemble.replicas"));
    CHECK(lines.count("ensemble.times"));
  }
  CHECK_THROWS_AS(cli::parse_config("[model]\nkind = riesz\ncolour = red\n"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config("[models]\nkind = riesz\n"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config("[grid]\nh = abc\nN = 8\n"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config("[model]\nkind = cauchy\ndimension = 2\n[grid]\nN = 8\n"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config("[grid]\nN = 8\nL = 9\n"), cli::ConfigError);
}

TEST_CASE("cli limits") {
  TempDir dir("limits");
  write(dir.path / "a.ini", "[model]\nkind = riesz\ndimension = 1\nbeta = 0.5\n[grid]\nN = 8\n[ensemble]\ntimes = 1\n");
  CHECK(run_cli({"limits", "--config", (dir.path / "a.ini").string(), "--out", (dir.path / "a").string()}) == 0);
  const auto t = csv::parse(csv::read_file(dir.path / "a" / "limits.csv"));
  CHECK(std::stod(t.rows.at(0).at(1)) == doctest::Approx(16.0 / 3.0).epsilon(1e-10));
  CHECK(fs::exists(dir.path / "a" / "limits_errors.csv"));

  auto cfg = cli::parse_config("[model]\nkind = gaussian\ndimension = 1\n[grid]\nN = 8\n");
  cfg.out = (dir.path / "g").string();
  std::ostringstream out, err;
  CHECK(cli::cmd_limits(cfg, out, err) == cli::kPass);
  CHECK(out.str().find("regime: OneDimFinite") != std::string::npos);
  CHECK(out.str().find("(t1 ^ t2) f(R)") != std::string::npos);

  write(dir.path / "bad.ini", "[model]\nkind = riesz\ndimension = 1\nbeta = 2.5\n[grid]\nN = 8\n");
  CHECK(run_cli({"limits", "--config", (dir.path / "bad.ini").string(), "--out", (dir.path / "b").string()}) ==
        cli::kConfigError);
  CHECK_FALSE(fs::exists(dir.path / "b"));
  CHECK(run_cli({"limits", "--config", (dir.path / "missing.ini").string()}) == cli::kConfigError);
  CHECK(run_cli({"frobnicate"}) == cli::kConfigError);
}

TEST_CASE("cli simulate and verify") {
  TempDir dir("sim");
  const auto ini = dir.path / "small.ini";
  write(ini, kSmall);
  const std::string a = (dir.path / "a").string(), b = (dir.path / "b").string();
  REQUIRE(run_cli({"simulate", "--config", ini.string(), "--out", a}) == 0);
  REQUIRE(run_cli({"simulate", "--config", ini.string(), "--out", b, "--threads", "3"}) == 0);
  const std::string ens_a = csv::read_file(fs::path(a) / "ensemble.csv");
  CHECK(ens_a == csv::read_file(fs::path(b) / "ensemble.csv"));
  CHECK(csv::read_file(fs::path(a) / "manifest.ini") == csv::read_file(fs::path(b) / "manifest.ini"));

  // The manifest is itself a config that reproduces the run.
  const std::string c = (dir.path / "c").string();
  REQUIRE(run_cli({"simulate", "--config", a + "/manifest.ini", "--out", c}) == 0);
  CHECK(csv::read_file(fs::path(c) / "ensemble.csv") == ens_a);

  // Verify reuses the ensemble: same report regardless of thread count.
  const int va = run_cli({"verify", "--config", ini.string(), "--out", a});
  const int vb = run_cli({"verify", "--config", ini.string(), "--out", b, "--threads", "4"});
  CHECK((va == cli::kPass || va == cli::kChecksFailed));
  CHECK(va == vb);
  for (const char* f : {"covariance.csv", "errors.csv", "regression.csv", "zscores.csv"}) {
    CHECK(csv::read_file(fs::path(a) / "report" / f) == csv::read_file(fs::path(b) / "report" / f));
  }

  // A different seed is a different experiment.
  CHECK(run_cli({"verify", "--config", ini.string(), "--out", a, "--seed", "6"}) == cli::kIntegrity);

  // Tampering is caught by the checksum.
  std::string tampered = ens_a;
  tampered[tampered.size() - 3] = tampered[tampered.size() - 3] == '1' ? '2' : '1';
  write(fs::path(b) / "ensemble.csv", tampered);
  CHECK(run_cli({"verify", "--config", ini.string(), "--out", b}) == cli::kIntegrity);

  // Consistent checksum but a time grid that differs from the config.
  std::string shifted = ens_a;
  for (std::size_t p = shifted.find(",0.5,"); p != std::string::npos; p = shifted.find(",0.5,", p + 1)) {
    shifted.replace(p, 5, ",0.6,");
  }
  write(fs::path(b) / "ensemble.csv", shifted);
  auto cfg = cli::load_config(ini);
  write(fs::path(b) / "manifest.ini", cli::manifest_text(cfg, csv::crc32(shifted)));
  CHECK(run_cli({"verify", "--config", ini.string(), "--out", b}) == cli::kRegimeMismatch);
}

TEST_CASE("cli zero noise, disabled checks and blow-up") {
  TempDir dir("flags");
  const auto ini = dir.path / "small.ini";
  write(ini, kSmall);
  const std::string z = (dir.path / "z").string();
  REQUIRE(run_cli({"simulate", "--config", ini.string(), "--out", z, "--zero-noise"}) == 0);
  const auto t = csv::parse(csv::read_file(fs::path(z) / "ensemble.csv"));
  const std::size_t col = t.column("S");
  for (const auto& row : t.rows) CHECK(std::abs(std::stod(row.at(col))) < 1e-12);

  auto cfg = cli::load_config(ini);
  cfg.verify.limits = false;
  cfg.out = (dir.path / "v").string();
  std::ostringstream out, err;
  cli::cmd_verify(cfg, out, err);
  CHECK(out.str().find("limit N=") == std::string::npos);
  CHECK(out.str().find("regression t=") != std::string::npos);
  CHECK_FALSE(fs::exists(fs::path(cfg.out) / "report" / "zscores.csv"));

  cfg.model = {"white", 1, 0.0, {}};
  cfg.blow_up = 1.5;
  cfg.out = (dir.path / "w").string();
  std::ostringstream o2, e2;
  CHECK(cli::cmd_simulate(cfg, o2, e2) == cli::kBlowUp);
  CHECK(e2.str().find("blow-up") != std::string::npos);
  CHECK(fs::exists(fs::path(cfg.out) / "ensemble.csv"));
  CHECK(fs::exists(fs::path(cfg.out) / "manifest.ini"));
}
