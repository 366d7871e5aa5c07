#include "pam/clt_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "pam/csv.hpp"
#include "pam/errors.hpp"
#include "pam/parallel.hpp"
#include "pam/rng.hpp"
#include "pam/simulator.hpp"

namespace pam {

std::size_t FieldEnsemble::completed_count() const {
  return static_cast<std::size_t>(std::count(completed.begin(), completed.end(), std::uint8_t{1}));
}

std::vector<double> FieldEnsemble::column(std::size_t b, std::size_t k, bool rescaled) const {
  std::vector<double> out;
  out.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    if (completed[r]) out.push_back(rescaled ? scaled(r, b, k) : S(r, b, k));
  }
  return out;
}

std::vector<double> FieldEnsemble::scaled_matrix(std::size_t b) const {
  std::vector<double> out;
  out.reserve(replicas * times.size());
  for (std::size_t r = 0; r < replicas; ++r) {
    if (!completed[r]) continue;
    for (std::size_t k = 0; k < times.size(); ++k) out.push_back(scaled(r, b, k));
  }
  return out;
}

FieldEnsemble FieldEnsemble::first(std::size_t m) const {
  if (m > replicas) throw DomainError("ensemble has fewer replicas than requested");
  FieldEnsemble e = *this;
  e.replicas = m;
  e.averages.resize(m * boxes.size() * times.size());
  e.completed.resize(m);
  e.negative_fraction.resize(m);
  return e;
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::size_t replica) {
  return derive_seed(master_seed, replica, 0x7265706c696361ULL);
}

FieldEnsemble run_ensemble(const CovarianceModel& model, const GridSpec& grid_spec,
                           std::size_t replicas, std::uint64_t master_seed,
                           const std::vector<double>& times, const EnsembleOptions& opt) {
  if (replicas < 1) throw DomainError("ensemble needs at least one replica");
  if (times.empty()) throw DomainError("ensemble needs at least one sample time");
  const SimulationGrid grid(grid_spec);
  for (double t : times) grid.time_index(t);
  if (!std::is_sorted(times.begin(), times.end())) throw DomainError("sample times must be sorted");

  FieldEnsemble ens;
  ens.grid = grid.spec();
  ens.replicas = replicas;
  ens.master_seed = master_seed;
  ens.times = times;
  ens.boxes = grid.boxes();
  ens.rate = classify_regime(model).rate;
  const std::size_t nb = ens.boxes.size();
  const std::size_t nt = times.size();
  ens.averages.assign(replicas * nb * nt, 0.0);
  ens.completed.assign(replicas, 0);
  ens.negative_fraction.assign(replicas, 0.0);
  std::vector<std::optional<ReplicaBlowUpError>> errors(replicas);

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(replicas)));
  parallel_for(workers, workers, [&](std::size_t w) {
    Simulator sim(grid, model, {opt.zero_noise, opt.blow_up});
    for (std::size_t r = w; r < replicas; r += workers) {
      std::size_t k = 0;
      double neg = 0.0;
      try {
        sim.run(replica_seed(master_seed, r), times, [&](const FieldState& st) {
          for (std::size_t b = 0; b < nb; ++b) {
            ens.averages[(r * nb + b) * nt + k] = spatial_average(grid, st, ens.boxes[b]);
          }
          neg = std::max(neg, st.negative_fraction);
          ++k;
        });
        ens.completed[r] = 1;
      } catch (const BlowUpError& e) {
        errors[r].emplace(r, e);
      }
      ens.negative_fraction[r] = neg;
    }
  });
  // The lowest failing replica is reported, whatever the thread count.
  for (const auto& e : errors) {
    if (!e) continue;
    if (!opt.keep_partial) throw *e;
    ens.failure = e->what();
    break;
  }
  return ens;
}

stats::CovarianceEstimate empirical_covariance(const FieldEnsemble& ens, std::size_t b) {
  if (b >= ens.boxes.size()) throw DomainError("box index out of range");
  if (ens.completed_count() < 30) {
    throw InsufficientDataError("empirical covariance needs at least 30 replicas");
  }
  return stats::covariance_jackknife(ens.scaled_matrix(b), ens.times.size());
}

RateRegression rate_regression(const std::vector<double>& variances,
                               const std::vector<double>& boxes, const ScalingRate& rate) {
  if (variances.size() != boxes.size()) throw DomainError("one variance per box size required");
  if (boxes.size() < 4) throw InsufficientDataError("rate regression needs at least 4 box sizes");
  std::vector<double> x(boxes.size());
  std::vector<double> y(boxes.size());
  RateRegression out;
  out.log_compensated = rate.log_corrected;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!(variances[i] > 0.0)) throw DomainError("rate regression requires positive variances");
    if (!(boxes[i] > 1.0)) throw DomainError("rate regression requires N > 1");
    x[i] = std::log(boxes[i]);
    double v = variances[i];
    // Var ~ log N / N: regress the compensated variance, expecting slope 0.
    if (rate.log_corrected) v *= boxes[i] / std::log(boxes[i]);
    y[i] = std::log(v);
  }
  out.expected = rate.log_corrected ? 0.0 : rate.variance_slope();
  out.fit = stats::linear_regression(x, y);
  return out;
}

LimitComparison compare_to_limit(const stats::CovarianceEstimate& empirical,
                                 const std::vector<double>& times, const LimitCovariance& limits) {
  const std::size_t k = times.size();
  if (limits.times.size() != k || empirical.k != k) throw DomainError("time grids differ");
  for (std::size_t i = 0; i < k; ++i) {
    if (std::abs(limits.times[i] - times[i]) > 1e-12 * std::max(1.0, times[i])) {
      throw DomainError("time grids differ");
    }
  }
  LimitComparison c;
  c.k = k;
  c.empirical = empirical.cov;
  c.standard_error = empirical.se;
  c.limit = limits.values;
  c.z.resize(k * k);
  c.bracket.assign(k * k, -1);
  for (std::size_t i = 0; i < k * k; ++i) {
    const double diff = c.empirical[i] - c.limit[i];
    if (c.standard_error[i] > 0.0) {
      c.z[i] = diff / c.standard_error[i];
    } else {
      c.z[i] = diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff);
    }
    if (limits.family == LimitFamily::D1Finite) {
      c.bracket[i] = c.empirical[i] >= limits.lower[i] && c.empirical[i] <= limits.upper[i] ? 1 : 0;
    }
  }
  return c;
}

McReport build_report(const FieldEnsemble& ens, const std::optional<LimitCovariance>& limits,
                      const ReportOptions& opt) {
  McReport rep;
  rep.boxes = ens.boxes;
  rep.times = ens.times;
  for (std::size_t b = 0; b < ens.boxes.size(); ++b) rep.covariance.push_back(empirical_covariance(ens, b));
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    McReport::RegressionRow row;
    row.t = ens.times[k];
    bool positive = true;
    for (std::size_t b = 0; b < ens.boxes.size(); ++b) {
      const std::vector<double> col = ens.column(b, k, false);
      row.variances.push_back(stats::variance(col));
      positive = positive && row.variances.back() > 0.0;
    }
    if (ens.boxes.size() >= 4 && positive) row.fit = rate_regression(row.variances, ens.boxes, ens.rate);
    rep.regression.push_back(std::move(row));
  }
  if (opt.normality) {
    for (std::size_t b = 0; b < ens.boxes.size(); ++b) {
      for (std::size_t k = 0; k < ens.times.size(); ++k) {
        rep.normality.push_back(
            {ens.boxes[b], ens.times[k],
             stats::normality_stats(ens.column(b, k, true), opt.normality_min_samples)});
      }
    }
  }
  if (limits) {
    rep.comparison = compare_to_limit(rep.covariance.back(), ens.times, *limits);
  }
  return rep;
}

namespace {

std::string matrix_csv(const McReport& rep, bool errors, const std::string& comment) {
  std::ostringstream os;
  os << comment << '\n' << "N,t";
  for (double t : rep.times) os << ',' << csv::format(t);
  os << '\n';
  const std::size_t k = rep.times.size();
  for (std::size_t b = 0; b < rep.boxes.size(); ++b) {
    const auto& c = rep.covariance[b];
    for (std::size_t i = 0; i < k; ++i) {
      os << csv::format(rep.boxes[b]) << ',' << csv::format(rep.times[i]);
      for (std::size_t j = 0; j < k; ++j) os << ',' << csv::format(errors ? c.error(i, j) : c(i, j));
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace

void write_report(const McReport& rep, const std::filesystem::path& dir, const std::string& comment) {
  std::filesystem::create_directories(dir);
  csv::write_file(dir / "covariance.csv", matrix_csv(rep, false, comment));
  csv::write_file(dir / "errors.csv", matrix_csv(rep, true, comment));

  std::ostringstream reg;
  reg << comment << '\n' << "t,N,variance,slope,ci_lo,ci_hi,expected,log_compensated\n";
  for (const auto& row : rep.regression) {
    for (std::size_t b = 0; b < rep.boxes.size(); ++b) {
      reg << csv::format(row.t) << ',' << csv::format(rep.boxes[b]) << ','
          << csv::format(row.variances[b]);
      if (row.fit) {
        reg << ',' << csv::format(row.fit->fit.slope) << ',' << csv::format(row.fit->fit.ci_lo) << ','
            << csv::format(row.fit->fit.ci_hi) << ',' << csv::format(row.fit->expected) << ','
            << (row.fit->log_compensated ? 1 : 0);
      } else {
        reg << ",,,,,";
      }
      reg << '\n';
    }
  }
  csv::write_file(dir / "regression.csv", reg.str());

  if (!rep.normality.empty()) {
    std::ostringstream nor;
    nor << comment << '\n' << "N,t,skew,kurt,ks\n";
    for (const auto& row : rep.normality) {
      nor << csv::format(row.n_box) << ',' << csv::format(row.t) << ','
          << csv::format(row.stats.skewness) << ',' << csv::format(row.stats.excess_kurtosis) << ','
          << csv::format(row.stats.ks) << '\n';
    }
    csv::write_file(dir / "normality.csv", nor.str());
  }

  if (rep.comparison) {
    const LimitComparison& c = *rep.comparison;
    std::ostringstream zs;
    zs << comment << '\n' << "N,t1,t2,empirical,se,limit,z,bracket\n";
    for (std::size_t i = 0; i < c.k; ++i) {
      for (std::size_t j = 0; j < c.k; ++j) {
        const std::size_t e = i * c.k + j;
        zs << csv::format(rep.boxes.back()) << ',' << csv::format(rep.times[i]) << ','
           << csv::format(rep.times[j]) << ',' << csv::format(c.empirical[e]) << ','
           << csv::format(c.standard_error[e]) << ',' << csv::format(c.limit[e]) << ','
           << csv::format(c.z[e]) << ','
           << (c.bracket[e] < 0 ? "na" : (c.bracket[e] ? "inside" : "outside")) << '\n';
      }
    }
    csv::write_file(dir / "zscores.csv", zs.str());
  }
}

std::string ensemble_csv(const FieldEnsemble& ens, const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) os << comment << '\n';
  os << "replica,N,t,S,sigma_N_S\n";
  for (std::size_t r = 0; r < ens.replicas; ++r) {
    if (!ens.completed[r]) continue;
    for (std::size_t b = 0; b < ens.boxes.size(); ++b) {
      for (std::size_t k = 0; k < ens.times.size(); ++k) {
        os << r << ',' << csv::format(ens.boxes[b]) << ',' << csv::format(ens.times[k]) << ','
           << csv::format(ens.S(r, b, k)) << ',' << csv::format(ens.scaled(r, b, k)) << '\n';
      }
    }
  }
  return os.str();
}

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DomainError("malformed number '" + s + "' in ensemble CSV");
  }
  return v;
}

}  // namespace

FieldEnsemble parse_ensemble_csv(const std::string& text, const GridSpec& grid,
                                 std::uint64_t master_seed, const ScalingRate& rate) {
  const csv::Table t = csv::parse(text);
  const std::size_t c_rep = t.column("replica");
  const std::size_t c_n = t.column("N");
  const std::size_t c_t = t.column("t");
  const std::size_t c_s = t.column("S");
  std::map<double, std::size_t> box_index;
  std::map<double, std::size_t> time_index;
  std::size_t max_replica = 0;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw DomainError("ragged row in ensemble CSV");
    box_index.emplace(to_double(row[c_n]), 0);
    time_index.emplace(to_double(row[c_t]), 0);
    max_replica = std::max<std::size_t>(max_replica, static_cast<std::size_t>(to_double(row[c_rep])));
  }
  FieldEnsemble ens;
  ens.grid = grid;
  ens.master_seed = master_seed;
  ens.rate = rate;
  ens.replicas = t.rows.empty() ? 0 : max_replica + 1;
  for (auto& [v, i] : box_index) {
    i = ens.boxes.size();
    ens.boxes.push_back(v);
  }
  for (auto& [v, i] : time_index) {
    i = ens.times.size();
    ens.times.push_back(v);
  }
  const std::size_t nb = ens.boxes.size();
  const std::size_t nt = ens.times.size();
  ens.averages.assign(ens.replicas * nb * nt, 0.0);
  ens.completed.assign(ens.replicas, 0);
  ens.negative_fraction.assign(ens.replicas, 0.0);
  std::vector<std::size_t> seen(ens.replicas, 0);
  for (const auto& row : t.rows) {
    const auto r = static_cast<std::size_t>(to_double(row[c_rep]));
    const std::size_t b = box_index.at(to_double(row[c_n]));
    const std::size_t k = time_index.at(to_double(row[c_t]));
    ens.averages[(r * nb + b) * nt + k] = to_double(row[c_s]);
    ++seen[r];
  }
  for (std::size_t r = 0; r < ens.replicas; ++r) {
    if (seen[r] == nb * nt) {
      ens.completed[r] = 1;
    } else if (seen[r] != 0) {
      throw DomainError("replica " + std::to_string(r) + " is incomplete in ensemble CSV");
    }
  }
  return ens;
}

}  // namespace pam
