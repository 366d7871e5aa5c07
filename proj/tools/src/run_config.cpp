#include "pam_cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pam/csv.hpp"

namespace pam::cli {
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model", {"kind", "dimension", "beta", "table"}},
      {"grid", {"h", "dt", "T", "L", "N", "start_fraction", "warmup_ratio"}},
      {"ensemble", {"replicas", "seed", "times", "threads", "zero_noise", "blow_up"}},
      {"verify",
       {"limits", "regression", "normality", "slope_tolerance", "max_skew", "max_excess_kurtosis",
        "max_ks", "normality_min_samples", "bracket_lo", "bracket_hi", "max_abs_z", "quad_rel_tol"}},
      {"output", {"dir"}},
      {"integrity", {"ensemble_crc"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// "section.key" -> line number, found by a plain scan of the text.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      lines.emplace(section, no);
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) lines.emplace(section + "." + trim(std::string_view(t).substr(0, eq)), no);
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines, std::vector<ConfigIssue>& issues)
      : tree_(tree), lines_(std::move(lines)), issues_(issues) {}

  void issue(const std::string& field, const std::string& message) {
    const auto it = lines_.find(field);
    issues_.push_back({field, it == lines_.end() ? 0 : it->second, message});
  }

  std::optional<std::string> raw(const std::string& field) {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void real(const std::string& field, double& out) {
    const auto v = raw(field);
    if (!v) return;
    double x = 0.0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), x);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size() || !std::isfinite(x)) {
      issue(field, "expected a real number, got '" + *v + "'");
      return;
    }
    out = x;
  }

  template <typename Int>
  void integer(const std::string& field, Int& out) {
    const auto v = raw(field);
    if (!v) return;
    Int x{};
    const auto res = std::from_chars(v->data(), v->data() + v->size(), x);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      issue(field, "expected a non-negative integer, got '" + *v + "'");
      return;
    }
    out = x;
  }

  void boolean(const std::string& field, bool& out) {
    const auto v = raw(field);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") {
      out = true;
    } else if (*v == "false" || *v == "0" || *v == "no") {
      out = false;
    } else {
      issue(field, "expected true or false, got '" + *v + "'");
    }
  }

  void list(const std::string& field, std::vector<double>& out) {
    const auto v = raw(field);
    if (!v) return;
    std::vector<double> xs;
    std::string item;
    std::istringstream in(*v);
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      double x = 0.0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
      if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        issue(field, "expected a comma-separated list of numbers, got '" + *v + "'");
        return;
      }
      xs.push_back(x);
    }
    if (xs.empty()) {
      issue(field, "list is empty");
      return;
    }
    out = std::move(xs);
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::vector<ConfigIssue>& issues_;
};

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += csv::format(xs[i]);
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> list)
    : Error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& i : list) {
          msg += "\n  " + i.field + (i.line ? " (line " + std::to_string(i.line) + ")" : "") + ": " +
                 i.message;
        }
        return msg;
      }()),
      issues(std::move(list)) {}

CovarianceModel RunConfig::build_model() const {
  if (model.kind == "riesz") return CovarianceModel::riesz(model.dimension, model.beta);
  if (model.kind == "gaussian") return CovarianceModel::gaussian(model.dimension);
  if (model.kind == "cauchy") {
    if (model.dimension != 1) throw InvariantError("the Cauchy kernel requires d = 1");
    return CovarianceModel::cauchy();
  }
  if (model.kind == "white") {
    if (model.dimension != 1) throw InvariantError("space-time white noise requires d = 1");
    return CovarianceModel::space_time_white();
  }
  if (model.kind == "tabulated") {
    return CovarianceModel::tabulated(model.dimension, CovarianceModel::load_table_csv(model.table));
  }
  throw InvariantError("unknown kernel kind '" + model.kind + "'");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "[model]\nkind = " << model.kind << "\ndimension = " << model.dimension << '\n';
  if (model.kind == "riesz") os << "beta = " << csv::format(model.beta) << '\n';
  if (model.kind == "tabulated") os << "table = " << model.table << '\n';
  os << "\n[grid]\nh = " << csv::format(grid.h) << "\ndt = " << csv::format(grid.dt)
     << "\nT = " << csv::format(grid.horizon) << "\nL = " << csv::format(grid.half_width)
     << "\nN = " << join(grid.boxes) << "\nstart_fraction = " << csv::format(grid.start_fraction)
     << "\nwarmup_ratio = " << csv::format(grid.warmup_ratio) << '\n';
  os << "\n[ensemble]\nreplicas = " << replicas << "\nseed = " << seed << "\ntimes = " << join(times)
     << "\nzero_noise = " << (zero_noise ? "true" : "false") << "\nblow_up = " << csv::format(blow_up)
     << '\n';
  const VerifySpec& v = verify;
  os << "\n[verify]\nlimits = " << (v.limits ? "true" : "false")
     << "\nregression = " << (v.regression ? "true" : "false")
     << "\nnormality = " << (v.normality ? "true" : "false")
     << "\nslope_tolerance = " << csv::format(v.slope_tolerance)
     << "\nmax_skew = " << csv::format(v.max_skew)
     << "\nmax_excess_kurtosis = " << csv::format(v.max_excess_kurtosis)
     << "\nmax_ks = " << csv::format(v.max_ks)
     << "\nnormality_min_samples = " << v.normality_min_samples
     << "\nbracket_lo = " << csv::format(v.bracket_lo) << "\nbracket_hi = " << csv::format(v.bracket_hi)
     << "\nmax_abs_z = " << csv::format(v.max_abs_z) << "\nquad_rel_tol = " << csv::format(v.quad_rel_tol)
     << '\n';
  return os.str();
}

std::uint32_t RunConfig::hash() const { return csv::crc32(canonical()); }

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  std::vector<ConfigIssue> issues;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({{"<file>", static_cast<int>(e.line()), e.message()}});
  }
  Reader rd(tree, key_lines(text), issues);
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) {
        rd.issue(section, "key outside any section");
      } else {
        rd.issue(section, "unknown section");
      }
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) rd.issue(section + "." + key, "unknown key");
    }
  }

  RunConfig cfg;
  if (auto k = rd.raw("model.kind")) cfg.model.kind = *k;
  rd.integer("model.dimension", cfg.model.dimension);
  rd.real("model.beta", cfg.model.beta);
  if (auto t = rd.raw("model.table")) {
    std::filesystem::path p(*t);
    cfg.model.table = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  }

  const int d = cfg.model.dimension;
  cfg.grid = GridSpec::defaults(d >= 1 ? d : 1);
  cfg.grid.dimension = d;
  rd.real("grid.h", cfg.grid.h);
  rd.real("grid.dt", cfg.grid.dt);
  rd.real("grid.T", cfg.grid.horizon);
  rd.real("grid.L", cfg.grid.half_width);
  rd.list("grid.N", cfg.grid.boxes);
  rd.real("grid.start_fraction", cfg.grid.start_fraction);
  rd.real("grid.warmup_ratio", cfg.grid.warmup_ratio);

  rd.integer("ensemble.replicas", cfg.replicas);
  rd.integer("ensemble.seed", cfg.seed);
  rd.list("ensemble.times", cfg.times);
  rd.integer("ensemble.threads", cfg.threads);
  rd.boolean("ensemble.zero_noise", cfg.zero_noise);
  rd.real("ensemble.blow_up", cfg.blow_up);

  VerifySpec& v = cfg.verify;
  rd.boolean("verify.limits", v.limits);
  rd.boolean("verify.regression", v.regression);
  rd.boolean("verify.normality", v.normality);
  rd.real("verify.slope_tolerance", v.slope_tolerance);
  rd.real("verify.max_skew", v.max_skew);
  rd.real("verify.max_excess_kurtosis", v.max_excess_kurtosis);
  rd.real("verify.max_ks", v.max_ks);
  rd.integer("verify.normality_min_samples", v.normality_min_samples);
  rd.real("verify.bracket_lo", v.bracket_lo);
  rd.real("verify.bracket_hi", v.bracket_hi);
  rd.real("verify.max_abs_z", v.max_abs_z);
  rd.real("verify.quad_rel_tol", v.quad_rel_tol);

  if (auto o = rd.raw("output.dir")) cfg.out = *o;
  if (auto c = rd.raw("integrity.ensemble_crc")) {
    std::uint32_t crc = 0;
    const auto res = std::from_chars(c->data(), c->data() + c->size(), crc, 16);
    if (res.ec != std::errc() || res.ptr != c->data() + c->size()) {
      rd.issue("integrity.ensemble_crc", "expected 8 hex digits");
    } else {
      cfg.ensemble_crc = crc;
    }
  }

  // Module invariants, reported against the owning field.
  if (!issues.empty()) throw ConfigError(std::move(issues));
  try {
    cfg.build_model();
  } catch (const Error& e) {
    const std::string msg = e.what();
    std::string field = "model.kind";
    if (cfg.model.kind == "tabulated") field = "model.table";
    if (cfg.model.kind == "riesz") field = "model.beta";
    if (msg.find("dimension") != std::string::npos || msg.find("d = ") != std::string::npos) {
      field = "model.dimension";
    }
    rd.issue(field, msg);
  }
  std::optional<SimulationGrid> grid;
  try {
    grid.emplace(cfg.grid);
    cfg.grid = grid->spec();
  } catch (const Error& e) {
    std::string msg = e.what();
    std::string field = "grid";
    for (const char* key : {"grid.dt", "grid.h", "grid.T", "grid.L", "grid.N", "grid.start_fraction",
                            "grid.warmup_ratio", "grid.dimension"}) {
      if (msg.find(key) != std::string::npos) {
        field = key;
        break;
      }
    }
    if (field == "grid.dimension") field = "model.dimension";
    rd.issue(field, msg);
  }
  if (cfg.replicas < 1) rd.issue("ensemble.replicas", "must be at least 1");
  if (cfg.threads < 1) rd.issue("ensemble.threads", "must be at least 1");
  if (!(cfg.blow_up > 1.0)) rd.issue("ensemble.blow_up", "must exceed 1");
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    if (i > 0 && !(cfg.times[i] > cfg.times[i - 1])) {
      rd.issue("ensemble.times", "times must be strictly increasing");
      break;
    }
    if (grid) {
      try {
        grid->time_index(cfg.times[i]);
      } catch (const Error& e) {
        rd.issue("ensemble.times", e.what());
        break;
      }
    }
  }
  if (!(v.slope_tolerance > 0.0)) rd.issue("verify.slope_tolerance", "must be positive");
  if (!(v.bracket_lo > 0.0 && v.bracket_hi >= v.bracket_lo)) {
    rd.issue("verify.bracket_lo", "need 0 < bracket_lo <= bracket_hi");
  }
  if (!(v.max_abs_z >= 0.0)) rd.issue("verify.max_abs_z", "must be non-negative");
  if (!(v.quad_rel_tol > 0.0 && v.quad_rel_tol < 1e-2)) rd.issue("verify.quad_rel_tol", "must lie in (0, 1e-2)");
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const Error& e) {
    throw ConfigError({{"<file>", 0, e.what()}});
  }
  return parse_config(text, path.parent_path());
}

std::string manifest_text(const RunConfig& cfg, std::optional<std::uint32_t> ensemble_crc) {
  std::string s = "; " + std::string(csv::kToolVersion) + " config=" + csv::hex32(cfg.hash()) + "\n" +
                  cfg.canonical();
  if (ensemble_crc) s += "\n[integrity]\nensemble_crc = " + csv::hex32(*ensemble_crc) + "\n";
  return s;
}

}  // namespace pam::cli
