#pragma once
// Executes programs on product-state marginals under the extended-Markovian
// finite-relaxation model.  Unitaries take no time; every WAIT lasts d (units
// of T1 of the reset spins).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hbac/errors.hpp"
#include "hbac/program.hpp"
#include "hbac/spin_core.hpp"

namespace hbac {

enum class ResetModel {
  /// Each WAIT puts every reset spin at (1 - e^{-d}) eps0, as if it had no
  /// polarization before the reset step.
  paper_simplified,
  /// Reset spins relax from their actual bias: (eps - eps0) e^{-d} + eps0.
  general,
};

enum class TrajectoryLogging {
  off,
  resets,  ///< one sample after every WAIT
  full,    ///< one sample after every instruction (n <= 9 only)
};

enum class InitialState {
  equilibrium,  ///< every spin at eps0
  mixed,        ///< every spin at zero bias
};

struct EngineConfig {
  Regime mode = Regime::exact;
  ResetModel reset_model = ResetModel::general;
  TrajectoryLogging trajectory = TrajectoryLogging::off;
  DonorPolicy donors = DonorPolicy::propagate;
  InitialState initial = InitialState::equilibrium;
  /// Overrides `initial` when set; absolute biases in exact mode, units of
  /// eps0 in linear mode.
  std::optional<BiasVector> initial_biases;
  /// Stop after this many WAIT steps.
  std::optional<std::uint64_t> reset_budget;
};

inline constexpr int kFullTrajectoryMaxSpins = 9;

struct TrajectoryPoint {
  std::uint64_t step = 0;  ///< 1-based instruction index
  Instruction instruction;
  BiasVector biases;  ///< same units as RunReport::final_biases
};

struct RunReport {
  std::string program;
  std::string backend = "bias";
  Regime mode = Regime::exact;
  double eps0 = 0.0;
  int n_reset = 1;
  BiasVector final_biases;  ///< absolute in exact mode, units of eps0 in linear mode
  std::uint64_t n_resets = 0;
  std::uint64_t n_instructions = 0;
  Extended t_run;
  double cooling_factor = 0.0;  ///< final MSB bias / eps0
  double peak_factor = 0.0;     ///< running maximum of the MSB bias / eps0
  std::uint64_t resets_at_peak = 0;
  bool truncated = false;          ///< stopped by the reset budget
  bool left_linear_regime = false;  ///< linear mode saw |eps| >= 0.01
  std::vector<TrajectoryPoint> trajectory;

  /// Final biases in units of eps0 regardless of mode.
  std::vector<double> factors_msb_first() const {
    std::vector<double> out = final_biases.msb_first();
    if (mode == Regime::exact)
      for (double& v : out) v /= eps0;
    return out;
  }
};

namespace detail {

inline void check_instruction(const Instruction& i, int n) {
  switch (i.op) {
    case Op::wait: return;
    case Op::sort: return;
    case Op::pt:
      if (i.src() < 1 || i.src() > n || i.dst() < 1 || i.dst() > n || i.src() == i.dst())
        throw ConfigError("invalid " + i.to_string() + " for " + std::to_string(n) + " spins");
      return;
    case Op::compress: check_compression(i.target(), i.width(), n); return;
  }
}

inline BiasVector initial_biases(const SpinSystem& sys, Regime mode, const EngineConfig& cfg) {
  if (cfg.initial_biases) {
    require(cfg.initial_biases->size() == sys.n, "initial bias vector length differs from spin count");
    return *cfg.initial_biases;
  }
  const double eq = mode == Regime::linear ? 1.0 : sys.eps0;
  return BiasVector(sys.n, cfg.initial == InitialState::equilibrium ? eq : 0.0);
}

}  // namespace detail

/// Runs `p` on the marginal biases of `sys`.
inline RunReport execute(const Program& p, const SpinSystem& sys, const TimingParams& t, const EngineConfig& cfg) {
  sys.validate();
  t.validate();
  if (p.info().n > sys.n)
    throw ConfigError("program needs " + std::to_string(p.info().n) + " spins, system has " + std::to_string(sys.n));
  if (cfg.trajectory == TrajectoryLogging::full && sys.n > kFullTrajectoryMaxSpins)
    throw ConfigError("full trajectory logging is limited to n <= " + std::to_string(kFullTrajectoryMaxSpins));

  const bool linear = cfg.mode == Regime::linear;
  const double eq = linear ? 1.0 : sys.eps0;
  const double unit = linear ? 1.0 : sys.eps0;
  const double fr = t.reset_decay();
  const double fc = t.comp_decay();
  const double simplified_reset = (1.0 - fr) * eq;
  const double linear_limit = linear ? 0.01 / sys.eps0 : std::numeric_limits<double>::infinity();
  const int n = sys.n;
  const int n_reset = sys.n_reset;

  RunReport r;
  r.program = p.info().name;
  r.mode = cfg.mode;
  r.eps0 = sys.eps0;
  r.n_reset = sys.n_reset;
  BiasVector state = detail::initial_biases(sys, cfg.mode, cfg);
  std::span<double> b = state.mutable_lsb_first();
  double peak = state.msb();
  std::uint64_t peak_resets = 0;

  auto record = [&](const Instruction& i) {
    r.trajectory.push_back({r.n_instructions, i, state});
  };

  const bool complete = p.for_each([&](const Instruction& i) {
    if (cfg.reset_budget && i.op == Op::wait && r.n_resets >= *cfg.reset_budget) return false;
    detail::check_instruction(i, n);
    switch (i.op) {
      case Op::wait:
        for (int s = 0; s < n; ++s) {
          double& x = b[static_cast<std::size_t>(s)];
          if (s < n_reset)
            x = cfg.reset_model == ResetModel::paper_simplified ? simplified_reset : (x - eq) * fr + eq;
          else
            x = (x - eq) * fc + eq;
        }
        ++r.n_resets;
        break;
      case Op::pt:
        std::swap(b[static_cast<std::size_t>(i.src() - 1)], b[static_cast<std::size_t>(i.dst() - 1)]);
        break;
      case Op::compress: detail::compress_in_place(b, i.target(), i.width(), cfg.mode, cfg.donors); break;
      case Op::sort: throw BackendError("SORT needs the state-vector backend");
    }
    ++r.n_instructions;
    if (b[static_cast<std::size_t>(n - 1)] > peak) {
      peak = b[static_cast<std::size_t>(n - 1)];
      peak_resets = r.n_resets;
    }
    if (linear && !r.left_linear_regime)
      for (double x : b)
        if (std::abs(x) >= linear_limit) r.left_linear_regime = true;
    if (cfg.trajectory == TrajectoryLogging::full || (cfg.trajectory == TrajectoryLogging::resets && i.op == Op::wait))
      record(i);
    return true;
  });

  r.truncated = !complete;
  r.final_biases = state;
  r.t_run = t.t_run(r.n_resets);
  r.cooling_factor = state.msb() / unit;
  r.peak_factor = peak / unit;
  r.resets_at_peak = peak_resets;
  return r;
}

/// Ideal-bookkeeping run in units of eps0 (equilibrium = 1).
inline RunReport execute_linear(const Program& p, const SpinSystem& sys, const TimingParams& t,
                                EngineConfig cfg = {}) {
  cfg.mode = Regime::linear;
  return execute(p, sys, t, cfg);
}

enum class BiasMetric {
  final_bias,  ///< MSB bias when the program (or budget) ends
  peak,        ///< running maximum over the whole run
};

struct AchievableBias {
  double factor = 0.0;           ///< units of eps0
  std::uint64_t resets = 0;      ///< resets spent when the value was attained
  Extended t_run;                ///< elapsed time at that point
};

/// Best MSB cooling factor of `p` under the given model, within a reset
/// budget.  `final_bias` reports the state the algorithm delivers; `peak`
/// reports the running maximum, which can precede the end of the program
/// when the computation spins relax during a long run.
inline AchievableBias max_achievable_bias(const Program& p, const SpinSystem& sys, const TimingParams& t,
                                          EngineConfig cfg, std::uint64_t reset_budget,
                                          BiasMetric metric = BiasMetric::final_bias) {
  detail::require(reset_budget > 0, "reset budget must be positive");
  cfg.reset_budget = reset_budget;
  cfg.trajectory = TrajectoryLogging::off;
  const RunReport r = execute(p, sys, t, cfg);
  if (metric == BiasMetric::peak) return {r.peak_factor, r.resets_at_peak, t.t_run(r.resets_at_peak)};
  return {r.cooling_factor, r.n_resets, r.t_run};
}

}  // namespace hbac
