#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>

namespace hbac::cli {

namespace {

Regime parse_mode(const std::string& s) {
  if (s == "exact") return Regime::exact;
  if (s == "linear") return Regime::linear;
  throw ConfigError("unknown mode: " + s);
}

ResetModel parse_reset_model(const std::string& s) {
  if (s == "paper" || s == "paper_simplified") return ResetModel::paper_simplified;
  if (s == "general") return ResetModel::general;
  throw ConfigError("unknown reset model: " + s);
}

DonorPolicy parse_donors(const std::string& s) {
  if (s == "propagate") return DonorPolicy::propagate;
  if (s == "discard") return DonorPolicy::discard;
  throw ConfigError("unknown donor policy: " + s);
}

InitialState parse_initial(const std::string& s) {
  if (s == "equilibrium") return InitialState::equilibrium;
  if (s == "mixed") return InitialState::mixed;
  throw ConfigError("unknown initial state: " + s);
}

TrajectoryLogging parse_trajectory(const std::string& s) {
  if (s == "off") return TrajectoryLogging::off;
  if (s == "resets") return TrajectoryLogging::resets;
  if (s == "full") return TrajectoryLogging::full;
  throw ConfigError("unknown trajectory mode: " + s);
}

BiasMetric parse_metric(const std::string& s) {
  if (s == "final") return BiasMetric::final_bias;
  if (s == "peak") return BiasMetric::peak;
  throw ConfigError("unknown metric: " + s);
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError(std::string("bad ") + what + ": '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool is_bonacci(const std::string& algo) {
  return algo == "fib" || algo == "trib" || algo == "delta-fib" || algo == "new-fib" || algo == "new-trib";
}

MTable table_for(const ProgramOptions& o) {
  if (!o.m_table.empty()) return parse_m_table(o.m_table);
  return uniform_m_table(o.n, o.m.value_or(2));
}

json timing_json(const TimingParams& t, std::uint64_t n_resets) {
  json j;
  j["R"] = to_json(t.R);
  j["d"] = to_json(t.d);
  j["Q"] = to_json(t.Q());
  j["D"] = to_json(t.D(n_resets));
  return j;
}

json config_json(const ProgramOptions& o, const Job& job) {
  json j;
  j["n"] = job.system.n;
  j["n_reset"] = job.system.n_reset;
  j["eps0"] = job.system.eps0;
  j["mode"] = to_string(job.engine.mode);
  j["reset_model"] = to_string(job.engine.reset_model);
  j["donors"] = to_string(job.engine.donors);
  j["initial"] = o.initial;
  return j;
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(out);
    return;
  }
  write_file_atomically(path, body);
}

void add_program_options(CLI::App* app, ProgramOptions& o) {
  app->add_option("--algo", o.algo, "mpac|mpac-all|fib|delta-fib|trib|new-fib|new-trib|ppa")
      ->check(CLI::IsMember({"mpac", "mpac-all", "fib", "delta-fib", "trib", "new-fib", "new-trib", "ppa"}));
  app->add_option("--n", o.n, "spin count");
  app->add_option_function<int>("--m", [&o](int v) { o.m = v; }, "iterations per level (uniform)");
  app->add_option_function<double>("--delta", [&o](double v) { o.delta = v; }, "goal slack for delta variants");
  app->add_option("--m-table", o.m_table, "per-level iterations, e.g. 3=2,4=3");
  app->add_option_function<int>("--n-reset", [&o](int v) { o.n_reset = v; }, "reset spins (bonacci: 1 or 2)");
  app->add_option("--iterations", o.iterations, "ppa rounds");
  app->add_option("--R", o.R, "T1(comp)/T1(reset), number or inf");
  app->add_option("--d", o.d, "T_WAIT/T1(reset), number or inf");
  app->add_option("--eps0", o.eps0, "equilibrium bias");
  app->add_option("--mode", o.mode, "exact|linear")->check(CLI::IsMember({"exact", "linear"}));
  app->add_option("--reset-model", o.reset_model, "paper|general")
      ->check(CLI::IsMember({"paper", "paper_simplified", "general"}));
  app->add_option("--donors", o.donors, "propagate|discard")->check(CLI::IsMember({"propagate", "discard"}));
  app->add_option("--initial", o.initial, "equilibrium|mixed")->check(CLI::IsMember({"equilibrium", "mixed"}));
}

}  // namespace

MTable parse_m_table(const std::string& text) {
  MTable t;
  for (const auto& entry : split(text, ',')) {
    auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("m-table entry needs k=m: '" + entry + "'");
    const int k = parse_int(entry.substr(0, eq), "m-table level");
    const int m = parse_int(entry.substr(eq + 1), "m-table count");
    if (m < 0) throw ConfigError("m-table counts must be non-negative");
    t[k] = m;
  }
  return t;
}

int default_reset_spins(const std::string& algo) { return is_bonacci(algo) ? 2 : 1; }

Program make_program(const ProgramOptions& o, int n_reset) {
  const std::string& a = o.algo;
  if (a == "mpac" || a == "mpac-all") {
    if (n_reset != 1) throw ConfigError(a + " uses exactly one reset spin");
    return a == "mpac" ? build_mpac(o.n, o.m.value_or(2)) : build_mpac_all(o.n, o.m.value_or(2));
  }
  if (a == "ppa") {
    if (n_reset != 1) throw ConfigError("ppa uses exactly one reset spin");
    if (o.iterations < 0) throw ConfigError("ppa iterations must be non-negative");
    return build_ppa(o.n, o.iterations);
  }
  if (a == "fib") return build_fibonacci(o.n, table_for(o), n_reset);
  if (a == "trib") return build_tribonacci(o.n, table_for(o), n_reset);
  if (a == "delta-fib") return build_delta_fibonacci(o.n, o.delta.value_or(0.5), n_reset);
  if (a == "new-fib" || a == "new-trib") {
    const int order = a == "new-fib" ? 2 : 3;
    if (o.delta && o.m_table.empty() && !o.m)
      return build_delta_bonacci({.n = o.n, .order = order, .greedy = true, .n_reset = n_reset}, *o.delta);
    return build_new_bonacci(o.n, order, table_for(o), n_reset);
  }
  throw ConfigError("unknown algorithm: " + a);
}

Job make_job(const ProgramOptions& o) {
  const int n_reset = o.n_reset.value_or(default_reset_spins(o.algo));
  SpinSystem sys{o.n, n_reset, o.eps0};
  sys.validate();
  TimingParams t{Extended::parse(o.R), Extended::parse(o.d)};
  t.validate();
  EngineConfig cfg;
  cfg.mode = parse_mode(o.mode);
  cfg.reset_model = parse_reset_model(o.reset_model);
  cfg.donors = parse_donors(o.donors);
  cfg.initial = parse_initial(o.initial);
  return {make_program(o, n_reset), sys, t, cfg};
}

int worker_count() {
  if (const char* env = std::getenv("HBAC_WORKERS"); env && *env) {
    const int w = parse_int(env, "HBAC_WORKERS");
    if (w < 1) throw ConfigError("HBAC_WORKERS must be positive");
    return w;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  try {
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw ConfigError("cannot write " + tmp.string());
      body(os);
      os.flush();
      if (!os) throw ConfigError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers) {
  if (spec.ns.empty() || spec.Rs.empty()) throw ConfigError("sweep grid is empty");
  if (spec.budget && *spec.budget == 0) throw ConfigError("reset budget must be positive");
  struct Cell {
    int n;
    std::string R;
  };
  std::vector<Cell> cells;
  for (int n : spec.ns)
    for (const auto& R : spec.Rs) cells.push_back({n, R});
  // validate the whole grid before spending any time on it
  for (const auto& c : cells) {
    ProgramOptions o = spec.base;
    o.n = c.n;
    o.R = c.R;
    (void)make_job(o);
  }

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t i; !failed && (i = next++) < cells.size();) {
      try {
        ProgramOptions o = spec.base;
        o.n = cells[i].n;
        o.R = cells[i].R;
        const Job job = make_job(o);
        const auto best = max_achievable_bias(job.program, job.system, job.timing, job.engine,
                                              spec.budget.value_or(UINT64_MAX), spec.metric);
        rows[i] = {o.n, job.timing.R, best.factor, best.resets, best.t_run};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  const int w = std::clamp(workers, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < w; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

BackendAgreement compare_backends(const Job& job, bool extended_markov) {
  EngineConfig cfg = job.engine;
  cfg.mode = Regime::exact;
  const RunReport a = execute(job.program, job.system, job.timing, cfg);
  OracleConfig oc;
  oc.extended_markov = extended_markov;
  oc.reset_model = cfg.reset_model;
  oc.initial = cfg.initial;
  const OracleReport o = execute_oracle(job.program, job.system, job.timing, oc);
  BackendAgreement out;
  for (int i = 1; i <= job.system.n; ++i) {
    const double x = a.final_biases[i], y = o.run.final_biases[i];
    const double diff = std::abs(x - y);
    out.max_abs_diff_over_eps0 = std::max(out.max_abs_diff_over_eps0, diff / job.system.eps0);
    out.max_rel_diff = std::max(out.max_rel_diff, diff / (y != 0.0 ? std::abs(y) : job.system.eps0));
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

  std::vector<std::string> flags;
  for (const auto& [key, value] : doc.items()) {
    std::string name = key;
    name.erase(0, name.find_first_not_of('-'));
    std::replace(name.begin(), name.end(), '_', '-');
    name = "--" + name;
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back(name);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      flags.push_back(name);
      flags.push_back(joined);
    } else if (value.is_string()) {
      flags.push_back(name);
      flags.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      flags.push_back(name);
      flags.push_back(value.dump());
    } else {
      throw ConfigError("unsupported config value for " + key);
    }
  }
  // config flags go right after the subcommand, so later command-line flags win
  auto at = rest.begin();
  if (at != rest.end() && !at->empty() && (*at)[0] != '-') ++at;
  rest.insert(at, flags.begin(), flags.end());
  return rest;
}

namespace {

int cmd_run(const ProgramOptions& o, const std::string& backend, const std::string& out_path, bool absolute,
            const std::string& trajectory, const std::string& trajectory_out, const std::string& state_out,
            std::optional<std::uint64_t> budget, std::ostream& out) {
  Job job = make_job(o);
  job.engine.reset_budget = budget;
  job.engine.trajectory = trajectory_out.empty() ? TrajectoryLogging::off : parse_trajectory(trajectory);

  json doc;
  doc["program"] = to_json(job.program.info());
  doc["config"] = config_json(o, job);
  RunReport report;
  if (backend == "oracle") {
    if (job.engine.mode == Regime::linear) throw ConfigError("the oracle backend is exact only");
    if (budget) throw ConfigError("--budget applies to the bias backend only");
    if (!trajectory_out.empty()) throw ConfigError("trajectories come from the bias backend only");
    OracleConfig oc;
    oc.reset_model = job.engine.reset_model;
    oc.initial = job.engine.initial;
    OracleReport r = execute_oracle(job.program, job.system, job.timing, oc);
    if (!state_out.empty()) write_file_atomically(state_out, [&](std::ostream& os) { write_state_csv(os, r.state); });
    doc["entropy"] = to_json(r.ledger);
    report = std::move(r.run);
  } else {
    if (!state_out.empty()) throw ConfigError("--state-out needs the oracle backend");
    if (o.algo == "ppa") throw BackendError("ppa needs SORT, which only the oracle backend supports");
    report = execute(job.program, job.system, job.timing, job.engine);
    if (!trajectory_out.empty())
      write_file_atomically(trajectory_out, [&](std::ostream& os) { write_trajectory_csv(os, report, absolute); });
  }
  doc["timing"] = timing_json(job.timing, report.n_resets);
  doc["report"] = to_json(report, absolute);
  emit(out_path, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return kOk;
}

int cmd_sweep(SweepSpec spec, const std::string& n_list, const std::string& R_list, const std::string& out_path,
              std::ostream& out) {
  if (!n_list.empty()) {
    spec.ns.clear();
    for (const auto& s : split(n_list, ',')) spec.ns.push_back(parse_int(s, "n"));
  }
  if (!R_list.empty()) spec.Rs = split(R_list, ',');
  const auto rows = run_sweep(spec, worker_count());
  emit(out_path, out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return kOk;
}

int cmd_verify(std::ostream& out) {
  const auto checks = golden_suite();
  std::size_t failures = 0;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  expected " << format_number(c.expected) << "  actual "
        << format_number(c.actual);
    if (!c.note.empty()) out << "  (" << c.note << ")";
    out << '\n';
    if (!c.pass) ++failures;
  }
  out << checks.size() - failures << '/' << checks.size() << " checks passed\n";
  return failures ? kMismatch : kOk;
}

int cmd_compare(const ProgramOptions& o, bool multiscan_only, std::optional<std::uint64_t> resets, double multiplier,
                const std::string& out_path, std::ostream& out) {
  const Job job = make_job(o);
  json doc;
  doc["program"] = to_json(job.program.info());
  doc["config"] = config_json(o, job);
  doc["timing"] = timing_json(job.timing, count_resets(job.program));
  if (!multiscan_only) {
    if (job.system.n > kOracleMaxSpins)
      throw BackendError("backend comparison needs n <= " + std::to_string(kOracleMaxSpins));
    for (bool em : {true, false}) {
      const auto a = compare_backends(job, em);
      json j;
      j["max_rel_diff"] = a.max_rel_diff;
      j["max_abs_diff_over_eps0"] = a.max_abs_diff_over_eps0;
      doc[em ? "bias_vs_extended_markov" : "bias_vs_full_oracle"] = j;
    }
  }
  EngineConfig cfg = job.engine;
  RunReport r = execute(job.program, job.system, job.timing, cfg);
  if (resets) r.n_resets = *resets;
  doc["multiscan"] = to_json(compare_ac_multiscan(r, multiplier));
  emit(out_path, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  try {
    const std::vector<std::string> args = expand_config(raw);

    CLI::App app{"Heat-bath algorithmic cooling simulator", "hbac"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    ProgramOptions run_opts;
    std::string backend = "bias", run_out, trajectory = "resets", trajectory_out, state_out;
    bool absolute = false;
    std::optional<std::uint64_t> run_budget;
    auto* run = app.add_subcommand("run", "execute one algorithm and print its JSON report");
    add_program_options(run, run_opts);
    run->add_option("--backend", backend, "bias|oracle")->check(CLI::IsMember({"bias", "oracle"}));
    run->add_option("--out", run_out, "report path (default stdout)");
    run->add_flag("--absolute", absolute, "absolute biases instead of units of eps0");
    run->add_option("--trajectory", trajectory, "resets|full sampling for --trajectory-out")
        ->check(CLI::IsMember({"off", "resets", "full"}));
    run->add_option("--trajectory-out", trajectory_out, "trajectory CSV path");
    run->add_option("--state-out", state_out, "final probability CSV path (oracle)");
    run->add_option_function<std::uint64_t>("--budget", [&](std::uint64_t v) { run_budget = v; },
                                            "stop after this many resets");

    SweepSpec spec;
    spec.base.reset_model = "general";
    spec.base.d = "5";
    std::string n_list, R_list, sweep_out, metric = "final";
    auto* sweep = app.add_subcommand("sweep", "maximal bias over an (n, R) grid as CSV");
    add_program_options(sweep, spec.base);
    sweep->add_option("--n-list", n_list, "comma-separated spin counts");
    sweep->add_option("--R-list", R_list, "comma-separated R values, inf allowed");
    sweep->add_option("--metric", metric, "final|peak")->check(CLI::IsMember({"final", "peak"}));
    sweep->add_option_function<std::uint64_t>("--budget", [&](std::uint64_t v) { spec.budget = v; },
                                              "reset budget per cell");
    sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

    auto* verify = app.add_subcommand("verify", "check the worked examples");

    ProgramOptions cmp_opts;
    cmp_opts.n = 3;
    cmp_opts.R = "1000";
    cmp_opts.d = "5";
    bool multiscan_only = false;
    std::optional<std::uint64_t> resets;
    double multiplier = 1.0;
    std::string cmp_out;
    auto* compare = app.add_subcommand("compare", "bias engine vs state-vector oracle, and AC vs multiscan");
    add_program_options(compare, cmp_opts);
    compare->add_flag("--multiscan", multiscan_only, "skip the backend comparison");
    compare->add_option_function<std::uint64_t>("--resets", [&](std::uint64_t v) { resets = v; },
                                                "scan count for the multiscan side");
    compare->add_option("--multiplier", multiplier, "reset-spin polarization multiplier (4: proton vs carbon)");
    compare->add_option("--out", cmp_out, "JSON path (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kConfigError;
    }

    if (*run) return cmd_run(run_opts, backend, run_out, absolute, trajectory, trajectory_out, state_out, run_budget, out);
    if (*sweep) {
      spec.metric = parse_metric(metric);
      return cmd_sweep(spec, n_list, R_list, sweep_out, out);
    }
    if (*verify) return cmd_verify(out);
    if (*compare) {
      if (multiplier <= 0) throw ConfigError("multiplier must be positive");
      if (!multiscan_only && !compare->count("--algo")) cmp_opts.algo = "mpac-all";
      if (multiscan_only && !compare->count("--n")) cmp_opts.n = 7;
      if (multiscan_only && !compare->count("--R")) cmp_opts.R = "inf";
      if (multiscan_only && !compare->count("--d")) cmp_opts.d = "inf";
      return cmd_compare(cmp_opts, multiscan_only, resets, multiplier, cmp_out, out);
    }
    return kConfigError;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << '\n';
    return kBackendError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace hbac::cli
