#pragma once
// Command-line front end.  Everything except main() lives here so the tests
// can drive the commands in-process.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hbac/hbac.hpp"

namespace hbac::cli {

enum ExitCode : int {
  kOk = 0,
  kMismatch = 1,
  kConfigError = 2,
  kBackendError = 3,
};

/// Flags shared by run, sweep and compare.
struct ProgramOptions {
  std::string algo = "mpac-all";
  int n = 7;
  std::optional<int> m;
  std::optional<double> delta;
  std::string m_table;  ///< "3=2,4=3"
  std::optional<int> n_reset;
  int iterations = 200;  ///< ppa rounds
  std::string R = "inf";
  std::string d = "inf";
  double eps0 = 1e-5;
  std::string mode = "exact";
  std::string reset_model = "general";
  std::string donors = "propagate";
  std::string initial = "equilibrium";
};

/// A ready-to-run algorithm instance.
struct Job {
  Program program;
  SpinSystem system;
  TimingParams timing;
  EngineConfig engine;
};

MTable parse_m_table(const std::string& text);
Job make_job(const ProgramOptions& o);
Program make_program(const ProgramOptions& o, int n_reset);
int default_reset_spins(const std::string& algo);

struct SweepSpec {
  ProgramOptions base;
  std::vector<int> ns{3, 5, 7, 9, 11, 13, 15, 17, 19, 21};
  std::vector<std::string> Rs{"100", "1000", "10000", "100000", "1000000", "10000000", "inf"};
  BiasMetric metric = BiasMetric::final_bias;
  std::optional<std::uint64_t> budget;
};

/// Runs every (n, R) cell, n-major, on `workers` threads.  Row order is the
/// grid order whatever the completion order.  The first failing cell aborts
/// the sweep by rethrowing its exception.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers);

/// HBAC_WORKERS if set and positive, else the hardware concurrency.
int worker_count();

/// Writes via a sibling temporary file renamed into place, so a failure never
/// leaves a partial output.
void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

struct GoldenCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;  ///< absolute
  bool pass = false;
  std::string note;
};

/// The worked examples: trajectories, reset count, ideal and finite-R factors.
std::vector<GoldenCheck> golden_suite();

/// Bias engine vs the state-vector backend on one job.
struct BackendAgreement {
  double max_rel_diff = 0.0;
  double max_abs_diff_over_eps0 = 0.0;
};
BackendAgreement compare_backends(const Job& job, bool extended_markov);

/// Parses and dispatches; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Splices a `--config file.json` into plain flags placed right after the
/// subcommand, so that flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace hbac::cli
