// Copyright 2026 The unravel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "unravel/errors.hpp"
#include "unravel/measures.hpp"
#include "unravel/parallel.hpp"
#include "unravel/systems.hpp"
#include "unravel/version.hpp"

namespace unravel::cli {

namespace {

using report::format_number;

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

// "1,10,100" or a log sweep "lo:hi:n".
std::vector<double> parse_temps(const std::string& s) {
  std::vector<double> out;
  const auto sweep = split(s, ':');
  if (sweep.size() == 3) {
    const double lo = parse_double(sweep[0]);
    const double hi = parse_double(sweep[1]);
    const int n = static_cast<int>(parse_double(sweep[2]));
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InvalidArgument("bad sweep '" + s + "'");
    for (int k = 0; k < n; ++k)
      out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
    return out;
  }
  for (const auto& item : split(s)) out.push_back(parse_double(item));
  if (out.empty()) throw InvalidArgument("empty temperature list");
  return out;
}

std::vector<measures::MeasureKind> parse_measures(const std::string& s) {
  if (s == "all") return measures::all_measures();
  std::vector<measures::MeasureKind> out;
  for (const auto& item : split(s)) out.push_back(measures::parse_measure(item));
  if (out.empty()) throw InvalidArgument("empty measure list");
  return out;
}

std::vector<trajectories::Scheme> parse_tla_schemes(const std::string& s) {
  using trajectories::Scheme;
  if (s == "all")
    return {Scheme::Direct, Scheme::HomodyneX, Scheme::HomodyneY, Scheme::Heterodyne, Scheme::AID};
  std::vector<Scheme> out;
  for (const auto& item : split(s)) {
    const Scheme k = trajectories::parse_scheme(item);
    if (k == Scheme::GeneralDyne)
      throw InvalidArgument("general-dyne is not a two-level-atom scheme");
    out.push_back(k);
  }
  if (out.empty()) throw InvalidArgument("empty scheme list");
  return out;
}

std::string clean_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Every option of the command with its effective value.
report::Header option_header(const CLI::App& sub) {
  report::Header h{{"command", sub.get_name()}, {"version", kVersion}};
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->reduced_results()) value += (value.empty() ? "" : " ") + r;
    } else {
      value = opt->get_default_str();
    }
    h.emplace_back(name, value);
  }
  return h;
}

report::Json option_json(const CLI::App& sub) {
  report::Json j = report::Json::object();
  for (const auto& [k, v] : option_header(sub)) j[k] = v;
  return j;
}

// Reads 'key = value' lines ('#' comments) into --key=value arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto lo = s.find_first_not_of(" \t\r");
      const auto hi = s.find_last_not_of(" \t\r");
      return lo == std::string::npos ? std::string() : s.substr(lo, hi - lo + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty() || key == "config")
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": bad key");
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

struct Output {
  std::ofstream file;
  std::ostream* stream;

  Output(const std::string& path, std::ostream& fallback) : stream(&fallback) {
    if (path.empty()) return;
    file.open(path, std::ios::binary);
    if (!file) throw InvalidArgument("cannot write '" + path + "'");
    stream = &file;
  }
  std::ostream& operator*() { return *stream; }
};

struct Common {
  std::string out;
  std::string config;
  int threads = 0;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--out", c.out, "Output file (default: standard output)");
  sub.add_option("--config", c.config, "Key-value file of option defaults");
  sub.add_option("--threads", c.threads, "Worker threads (0: UNRAVEL_THREADS or all cores)")
      ->capture_default_str();
}

// ------------------------------------------------------------------ commands

struct QbmOptimal {
  std::string temps = "0.1:1e5:25";
  std::string measure = "all";
};

int run_qbm_optimal(const CLI::App& sub, const QbmOptimal& a, const Common& c, std::ostream& out,
                    std::ostream& err) {
  const auto temps = parse_temps(a.temps);
  const auto kinds = parse_measures(a.measure);
  struct Row {
    double t = 0.0;
    measures::MeasureKind kind{};
    std::optional<measures::DiskOptimum> best;
    std::string error;
  };
  std::vector<Row> rows;
  for (double t : temps)
    for (auto k : kinds) rows.push_back({t, k, std::nullopt, {}});

  measures::OptimizeOptions opts;
  opts.threads = 1;
  detail::parallel_for(static_cast<long>(rows.size()), trajectories::resolve_threads(c.threads),
                       [&](long i) {
                         auto& row = rows[static_cast<std::size_t>(i)];
                         try {
                           row.best = measures::optimize_disk({row.t}, row.kind, opts);
                         } catch (const Error& e) {
                           row.error = e.what();
                         }
                       });

  Output o(c.out, out);
  report::CsvWriter csv(*o, option_header(sub), {"T", "measure", "r_star", "phi_star", "value", "error"});
  int failed = 0;
  for (const auto& row : rows) {
    if (row.best) {
      csv.row({format_number(row.t), measures::measure_name(row.kind),
               format_number(row.best->point.r), format_number(row.best->point.phi),
               format_number(row.best->result.value), ""});
    } else {
      ++failed;
      csv.row({format_number(row.t), measures::measure_name(row.kind), "", "", "",
               clean_field(row.error)});
    }
  }
  if (failed == static_cast<int>(rows.size())) {
    err << "qbm-optimal: every point failed\n";
    return kNumeric;
  }
  return kSuccess;
}

struct TlaArgs {
  double omega = 1.0;
  double gamma = 1.0;
  std::string schemes = "all";
  long n_traj = 1000;
  double dt = 1e-3;
  double horizon = 10.0;
  std::uint64_t seed = 1;
  std::string aid_beta = "0.5";
};

void add_tla(CLI::App& sub, TlaArgs& a) {
  sub.add_option("--omega", a.omega, "Rabi frequency")->capture_default_str();
  sub.add_option("--gamma", a.gamma, "Decay rate; times are in units of 1/gamma")
      ->capture_default_str();
  sub.add_option("--schemes", a.schemes, "Comma list of direct,hom-x,hom-y,het,aid or all")
      ->capture_default_str();
  sub.add_option("--n-traj", a.n_traj, "Trajectories per scheme")->capture_default_str();
  sub.add_option("--dt", a.dt, "Time step in units of 1/gamma")->capture_default_str();
  sub.add_option("--horizon", a.horizon, "Curve horizon in units of 1/gamma")
      ->capture_default_str();
  sub.add_option("--seed", a.seed, "Master seed")->capture_default_str();
  sub.add_option("--aid-beta", a.aid_beta,
                 "AID local-oscillator amplitudes as multiples of sqrt(gamma), comma list")
      ->capture_default_str();
}

std::vector<double> parse_betas(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s)) {
    const double f = parse_double(item);
    if (!(f > 0.0)) throw InvalidArgument("AID amplitudes must be > 0");
    out.push_back(f);
  }
  if (out.empty()) throw InvalidArgument("empty AID amplitude list");
  return out;
}

int run_tla_curves(const CLI::App& sub, const TlaArgs& a, const Common& c, std::ostream& out) {
  const systems::TlaParams params{a.omega, a.gamma};
  systems::validate(params);
  const auto schemes = parse_tla_schemes(a.schemes);
  const auto betas = parse_betas(a.aid_beta);
  if (betas.size() != 1) throw InvalidArgument("tla-curves takes a single --aid-beta");
  const auto model = systems::build_tla(params);
  const auto rho_ss = hilbert::steady_state(model);
  const auto theta = measures::theta_for(model);
  const auto catalog = systems::tla_unravellings(params);

  trajectories::TrajectoryConfig cfg;
  cfg.dt = a.dt / a.gamma;
  cfg.horizon = a.horizon / a.gamma;
  cfg.seed = a.seed;
  cfg.sample_stride = std::max(1, static_cast<int>(std::lround(0.01 / a.dt)));
  cfg.record_innovations = false;
  trajectories::validate(cfg);
  trajectories::EnsembleOptions eo;
  eo.threads = c.threads;

  std::vector<std::pair<std::string, trajectories::EnsembleCurve>> curves;
  for (auto k : schemes) {
    auto spec = *std::find_if(catalog.begin(), catalog.end(),
                              [&](const auto& s) { return s.kind == k; });
    if (k == trajectories::Scheme::AID) spec.lo_amplitude = betas[0] * std::sqrt(a.gamma);
    curves.emplace_back(trajectories::scheme_name(k),
                        trajectories::run_ensemble(model, spec, rho_ss, cfg, a.n_traj,
                                                   trajectories::Statistic::Purity, eo)
                            .curve);
  }

  auto header = option_header(sub);
  header.emplace_back("theta", format_number(theta.theta));
  header.emplace_back("steady_purity", format_number(theta.steady_purity));
  Output o(c.out, out);
  report::CsvWriter csv(*o, header, {"t", "scheme", "mean_purity", "stderr"});
  for (const auto& [name, curve] : curves)
    for (std::size_t i = 0; i < curve.times.size(); ++i)
      csv.row({format_number(curve.times[i] * a.gamma), name, format_number(curve.mean[i]),
               format_number(curve.stderr_[i])});
  return kSuccess;
}

int run_tla_rank(const CLI::App& sub, const TlaArgs& a, const std::string& measure,
                 const Common& c, std::ostream& out) {
  const systems::TlaParams params{a.omega, a.gamma};
  measures::RankOptions ro;
  ro.mc.n_traj = a.n_traj;
  ro.mc.dt = a.dt;
  ro.mc.seed = a.seed;
  ro.mc.threads = c.threads;
  ro.mc.horizon = a.horizon;
  ro.aid_beta_factors = parse_betas(a.aid_beta);
  const auto ranking = measures::rank_unravellings(params, measures::parse_measure(measure),
                                                   parse_tla_schemes(a.schemes), ro);
  Output o(c.out, out);
  report::Json doc{{"command", sub.get_name()},
                   {"config", option_json(sub)},
                   {"ranking", report::to_json(ranking)}};
  *o << doc.dump(2) << '\n';
  return ranking.resolved() ? kSuccess : kUnresolved;
}

struct ValidateArgs {
  std::string suite;
  long n_traj = 5000;
  double omega = 2.0;
  double horizon = 5.0;
  std::uint64_t seed = 1;
  long oracle_traj = 100;
};

int run_validate(const CLI::App& sub, const ValidateArgs& a, const Common& c, std::ostream& out) {
  std::vector<SuiteReport> reports;
  const bool all = a.suite == "all";
  if (all || a.suite == "invariance") {
    InvarianceOptions io;
    io.omega = a.omega;
    io.n_traj = a.n_traj;
    io.horizon = a.horizon;
    io.seed = a.seed;
    io.threads = c.threads;
    reports.push_back(invariance_suite(io));
  }
  if (all || a.suite == "gaussian-oracle") {
    OracleOptions oo;
    oo.n_traj = a.oracle_traj;
    oo.seed = a.seed;
    oo.threads = c.threads;
    reports.push_back(gaussian_oracle_suite(oo));
  }
  if (all || a.suite == "properties") reports.push_back(property_suite(c.threads));

  bool passed = true;
  report::Json suites = report::Json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed();
    suites.push_back(r.to_json());
  }
  Output o(c.out, out);
  report::Json doc{{"command", sub.get_name()},
                   {"config", option_json(sub)},
                   {"passed", passed},
                   {"suites", std::move(suites)}};
  *o << doc.dump(2) << '\n';
  return passed ? kSuccess : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness measures of quantum unravellings", "unravel"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  QbmOptimal qbm;
  auto* qbm_cmd = app.add_subcommand("qbm-optimal", "Optimal general-dyne point per temperature");
  qbm_cmd->add_option("--temps", qbm.temps, "Temperatures: comma list or lo:hi:n log sweep")
      ->capture_default_str();
  qbm_cmd->add_option("--measure", qbm.measure, "Measure name, comma list or all")
      ->capture_default_str();
  add_common(*qbm_cmd, common);

  TlaArgs curves;
  auto* curves_cmd = app.add_subcommand("tla-curves", "Conditional purity curves of the atom");
  add_tla(*curves_cmd, curves);
  add_common(*curves_cmd, common);

  TlaArgs rank;
  rank.n_traj = 10000;
  std::string rank_measure;
  auto* rank_cmd = app.add_subcommand("tla-rank", "Rank the atom's unravellings by a measure");
  rank_cmd->add_option("--measure", rank_measure, "tau_pur, eta_thr, tau_mix or tau_sur")
      ->required();
  add_tla(*rank_cmd, rank);
  add_common(*rank_cmd, common);

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Run validation suites");
  val_cmd->add_option("--suite", val.suite, "invariance, gaussian-oracle, properties or all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  val_cmd->add_option("--n-traj", val.n_traj, "Trajectories per invariance check")
      ->capture_default_str();
  val_cmd->add_option("--omega", val.omega, "Rabi frequency of the invariance check")
      ->capture_default_str();
  val_cmd->add_option("--horizon", val.horizon, "Invariance horizon")->capture_default_str();
  val_cmd->add_option("--seed", val.seed, "Master seed")->capture_default_str();
  val_cmd->add_option("--oracle-traj", val.oracle_traj,
                      "Trajectories of the Fock conditional check (0 skips)")
      ->capture_default_str();
  add_common(*val_cmd, common);

  // Config values are inserted ahead of the command-line flags so the
  // flags take precedence.
  std::vector<std::string> argv = args;
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size())
        path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        path = args[i].substr(9);
      if (path.empty()) continue;
      const auto extra = config_arguments(path);
      std::size_t at = 0;
      while (at < argv.size() && !app.get_subcommand_no_throw(argv[at])) ++at;
      if (at == argv.size()) break;
      argv.insert(argv.begin() + static_cast<long>(at) + 1, extra.begin(), extra.end());
      break;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*qbm_cmd) return run_qbm_optimal(*qbm_cmd, qbm, common, out, err);
    if (*curves_cmd) return run_tla_curves(*curves_cmd, curves, common, out);
    if (*rank_cmd) return run_tla_rank(*rank_cmd, rank, rank_measure, common, out);
    if (*val_cmd) return run_validate(*val_cmd, val, common, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

}  // namespace unravel::cli
