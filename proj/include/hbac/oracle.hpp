#pragma once
// Exact simulation over the full 2^n diagonal distribution.  Used to derive
// and check the marginal closed forms, to run the partner-pairing algorithm
// (sort + reset) and to keep an entropy ledger.
//
// Basis index b has spin i in state bit (i-1) of b, so spin n is the most
// significant bit.  Probabilities are stored as excesses over the uniform
// distribution, q_b = 2^n p_b - 1, which keeps marginals and entropy deficits
// accurate when every bias is of order 1e-5.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hbac/engine.hpp"
#include "hbac/errors.hpp"
#include "hbac/program.hpp"
#include "hbac/spin_core.hpp"

namespace hbac {

inline constexpr int kOracleMaxSpins = 14;

class DiagState {
 public:
  /// Completely mixed state.
  explicit DiagState(int n) : n_(n), excess_(std::size_t{1} << n, 0.0) {
    detail::require(n >= 1 && n <= 30, "state-vector size out of range");
  }

  /// Product state with the given absolute biases.
  static DiagState product(const BiasVector& biases) {
    DiagState s(biases.size());
    const std::size_t dim = s.excess_.size();
    for (std::size_t b = 0; b < dim; ++b) {
      double log_sum = 0.0;
      for (int i = 1; i <= s.n_; ++i) log_sum += std::log1p(bit(b, i) ? -biases[i] : biases[i]);
      s.excess_[b] = std::expm1(log_sum);
    }
    return s;
  }

  static DiagState equilibrium(int n, double eps0) { return product(BiasVector(n, eps0)); }

  /// From plain probabilities (must sum to 1).
  static DiagState from_probabilities(std::span<const double> probs) {
    int n = 0;
    while ((std::size_t{1} << n) < probs.size()) ++n;
    detail::require((std::size_t{1} << n) == probs.size(), "probability vector length must be a power of two");
    DiagState s(n);
    const double dim = static_cast<double>(probs.size());
    for (std::size_t b = 0; b < probs.size(); ++b) s.excess_[b] = dim * probs[b] - 1.0;
    return s;
  }

  int n() const { return n_; }
  std::size_t dimension() const { return excess_.size(); }

  double probability(std::size_t b) const { return std::ldexp(1.0 + excess_[b], -n_); }
  std::vector<double> probabilities() const {
    std::vector<double> p(excess_.size());
    for (std::size_t b = 0; b < p.size(); ++b) p[b] = probability(b);
    return p;
  }
  std::span<const double> excess() const { return excess_; }
  std::span<double> mutable_excess() { return excess_; }

  double total_probability() const {
    double s = 0.0;
    for (double q : excess_) s += q;
    return 1.0 + std::ldexp(s, -n_);
  }

  /// Bit of spin i (1-based) in basis index b.
  static bool bit(std::size_t b, int spin) { return (b >> (spin - 1)) & 1U; }

 private:
  int n_;
  std::vector<double> excess_;
};

/// Marginal biases P(bit_i = 0) - P(bit_i = 1), absolute.
inline BiasVector marginals(const DiagState& s) {
  BiasVector out(s.n(), 0.0);
  const auto q = s.excess();
  for (int i = 1; i <= s.n(); ++i) {
    double sum = 0.0;
    for (std::size_t b = 0; b < q.size(); ++b) sum += DiagState::bit(b, i) ? -q[b] : q[b];
    out[i] = std::ldexp(sum, -s.n());
  }
  return out;
}

/// Shannon entropy deficit n - H in bits, computed without cancellation
/// against n.
inline double entropy_deficit_bits(const DiagState& s) {
  // sum_b p_b log2(2^n p_b) = 2^-n sum_b (1+q) log1p(q) / ln 2
  double acc = 0.0, linear = 0.0;
  for (double q : s.excess()) {
    acc += q <= -1.0 ? -q : (1.0 + q) * std::log1p(q) - q;
    linear += q;
  }
  return std::ldexp(acc + linear, -s.n()) / std::log(2.0);
}

/// Shannon entropy -sum p log2 p in bits.
inline double entropy(const DiagState& s) { return s.n() - entropy_deficit_bits(s); }

namespace detail {

inline void swap_pattern(DiagState& s, std::size_t mask, std::size_t from) {
  auto q = s.mutable_excess();
  for (std::size_t b = 0; b < q.size(); ++b)
    if ((b & mask) == from) std::swap(q[b], q[b ^ mask]);
}

}  // namespace detail

/// Applies PT / compression as a permutation of basis states, extended
/// identically over the spectator spins.
inline DiagState apply_permutation(DiagState s, const Instruction& instr) {
  switch (instr.op) {
    case Op::pt: {
      detail::check_instruction(instr, s.n());
      const std::size_t src = std::size_t{1} << (instr.src() - 1);
      const std::size_t dst = std::size_t{1} << (instr.dst() - 1);
      detail::swap_pattern(s, src | dst, src);
      return s;
    }
    case Op::compress: {
      detail::check_instruction(instr, s.n());
      const int k = instr.target(), w = instr.width();
      const std::size_t mask = ((std::size_t{1} << w) - 1) << (k - w);
      const std::size_t hi = std::size_t{1} << (k - 1);
      detail::swap_pattern(s, mask, hi);
      return s;
    }
    case Op::wait:
    case Op::sort: break;
  }
  throw ConfigError(instr.to_string() + " is not a permutation gate");
}

/// Sorts probabilities into non-increasing order along increasing basis
/// index (largest onto |0...0>).  Ties keep basis order.
inline DiagState sort_probabilities(DiagState s) {
  auto q = s.mutable_excess();
  std::stable_sort(q.begin(), q.end(), std::greater<>());
  return s;
}

namespace detail {

// Replaces the conditional distribution of `spin` given all other spins:
// conditional bias c -> factor * c + (1 - factor) * target.
inline void relax_spin(DiagState& s, int spin, double factor, double target) {
  auto q = s.mutable_excess();
  const std::size_t m = std::size_t{1} << (spin - 1);
  for (std::size_t b = 0; b < q.size(); ++b) {
    if (b & m) continue;
    const double u = 0.5 * (q[b] + q[b | m]);
    const double v = 0.5 * (q[b] - q[b | m]);
    const double v2 = factor * v + (1.0 - factor) * target * (1.0 + u);
    q[b] = u + v2;
    q[b | m] = u - v2;
  }
}

// (marginal of the computation spins) x (product of reset-spin marginals).
inline void decouple_reset_spins(DiagState& s, int n_reset) {
  const BiasVector eps = marginals(s);
  auto q = s.mutable_excess();
  const std::size_t rdim = std::size_t{1} << n_reset;
  for (std::size_t c = 0; c < q.size(); c += rdim) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rdim; ++r) mean += q[c + r];
    mean /= static_cast<double>(rdim);
    for (std::size_t r = 0; r < rdim; ++r) {
      double log_sum = 0.0;
      for (int i = 1; i <= n_reset; ++i) log_sum += std::log1p(((r >> (i - 1)) & 1U) ? -eps[i] : eps[i]);
      const double qr = std::expm1(log_sum);
      q[c + r] = mean + qr + mean * qr;
    }
  }
}

}  // namespace detail

/// Independent single-spin relaxation of every spin for `duration`: flip
/// rates P(1->0) = p_eq (1 - e^{-t/tau}), P(0->1) = (1 - p_eq)(1 - e^{-t/tau})
/// with p_eq = (1+eps0)/2, tau = 1 for reset spins and R otherwise.  With
/// `extended_markov` the reset spins are then decoupled from the rest.
inline DiagState relax_channel(DiagState s, Extended duration, const TimingParams& t, const SpinSystem& sys,
                               bool extended_markov) {
  detail::require(duration.is_infinite() || duration.value() >= 0, "relaxation duration must be non-negative");
  detail::require(s.n() == sys.n, "state and spin system sizes differ");
  const double fr = decay_factor(duration, Extended(1.0));
  const double fc = decay_factor(duration, t.R);
  for (int i = 1; i <= s.n(); ++i) {
    const double f = sys.is_reset(i) ? fr : fc;
    if (f != 1.0) detail::relax_spin(s, i, f, sys.eps0);
  }
  if (extended_markov) detail::decouple_reset_spins(s, sys.n_reset);
  return s;
}

/// Per-reset entropy accounting (bits).
struct EntropyLedger {
  double h_init = 0.0;
  double h_fin = 0.0;
  std::vector<double> reset_deltas;  ///< entropy removed by each reset, H_before - H_after
  double cumulative() const { return std::accumulate(reset_deltas.begin(), reset_deltas.end(), 0.0); }
};

struct OracleConfig {
  bool extended_markov = true;
  ResetModel reset_model = ResetModel::general;
  InitialState initial = InitialState::equilibrium;
  std::optional<BiasVector> initial_biases;  ///< absolute
  int max_spins = kOracleMaxSpins;
};

namespace detail {

inline void check_cap(int n, int cap) {
  if (n > cap)
    throw BackendError("state-vector backend is capped at n <= " + std::to_string(cap) + ", got " +
                       std::to_string(n));
}

inline DiagState oracle_initial(const SpinSystem& sys, const OracleConfig& cfg) {
  if (cfg.initial_biases) {
    require(cfg.initial_biases->size() == sys.n, "initial bias vector length differs from spin count");
    return DiagState::product(*cfg.initial_biases);
  }
  return cfg.initial == InitialState::equilibrium ? DiagState::equilibrium(sys.n, sys.eps0) : DiagState(sys.n);
}

// One WAIT of length d.
inline void oracle_wait(DiagState& s, const SpinSystem& sys, const TimingParams& t, const OracleConfig& cfg) {
  if (cfg.reset_model == ResetModel::general) {
    s = relax_channel(std::move(s), t.d, t, sys, cfg.extended_markov);
    return;
  }
  const double fc = t.comp_decay();
  const double reset_bias = (1.0 - t.reset_decay()) * sys.eps0;
  for (int i = 1; i <= sys.n; ++i) {
    if (sys.is_reset(i))
      relax_spin(s, i, 0.0, reset_bias);
    else if (fc != 1.0)
      relax_spin(s, i, fc, sys.eps0);
  }
}

}  // namespace detail

struct OracleReport {
  RunReport run;  ///< final biases absolute, backend "oracle"
  DiagState state;
  EntropyLedger ledger;
};

/// Runs a program on the full diagonal distribution.  SORT is allowed.
inline OracleReport execute_oracle(const Program& p, const SpinSystem& sys, const TimingParams& t,
                                   const OracleConfig& cfg = {}) {
  sys.validate();
  t.validate();
  detail::check_cap(sys.n, cfg.max_spins);
  detail::require(p.info().n <= sys.n, "program needs more spins than the system has");
  DiagState s = detail::oracle_initial(sys, cfg);
  EntropyLedger ledger;
  ledger.h_init = entropy(s);
  RunReport r;
  r.program = p.info().name;
  r.backend = "oracle";
  r.mode = Regime::exact;
  r.eps0 = sys.eps0;
  r.n_reset = sys.n_reset;
  double peak = marginals(s).msb();
  p.for_each([&](const Instruction& i) {
    switch (i.op) {
      case Op::wait: {
        const double before = entropy_deficit_bits(s);
        detail::oracle_wait(s, sys, t, cfg);
        ledger.reset_deltas.push_back(entropy_deficit_bits(s) - before);
        ++r.n_resets;
        break;
      }
      case Op::sort: s = sort_probabilities(std::move(s)); break;
      default: s = apply_permutation(std::move(s), i); break;
    }
    ++r.n_instructions;
    const double msb = marginals(s).msb();
    if (msb > peak) {
      peak = msb;
      r.resets_at_peak = r.n_resets;
    }
  });
  ledger.h_fin = entropy(s);
  r.final_biases = marginals(s);
  r.t_run = t.t_run(r.n_resets);
  r.cooling_factor = r.final_biases.msb() / sys.eps0;
  r.peak_factor = peak / sys.eps0;
  return {std::move(r), std::move(s), std::move(ledger)};
}

struct PpaResult {
  DiagState state;
  EntropyLedger ledger;
  std::vector<double> msb_factors;  ///< MSB bias / eps0 after every iteration
  int iterations = 0;
};

/// Partner-pairing algorithm: `iterations` rounds of {SORT, ideal reset of
/// spin 1}.  Computation spins are frozen during resets.
inline PpaResult run_ppa(const SpinSystem& sys, int iterations, InitialState initial = InitialState::equilibrium,
                         int max_spins = kOracleMaxSpins) {
  sys.validate();
  detail::check_cap(sys.n, max_spins);
  detail::require(sys.n_reset == 1, "the partner-pairing algorithm uses a single reset spin");
  detail::require(iterations >= 0, "iteration count must be non-negative");
  const TimingParams ideal = TimingParams::ideal();
  DiagState s = initial == InitialState::equilibrium ? DiagState::equilibrium(sys.n, sys.eps0) : DiagState(sys.n);
  PpaResult out{s, {}, {}, 0};
  out.ledger.h_init = entropy(s);
  for (int it = 0; it < iterations; ++it) {
    s = sort_probabilities(std::move(s));
    const double before = entropy_deficit_bits(s);
    s = relax_channel(std::move(s), ideal.d, ideal, sys, false);
    out.ledger.reset_deltas.push_back(entropy_deficit_bits(s) - before);
    out.msb_factors.push_back(marginals(s).msb() / sys.eps0);
    ++out.iterations;
  }
  out.ledger.h_fin = entropy(s);
  out.state = std::move(s);
  return out;
}

/// The PPA as an instruction stream, for the generic executors.
inline Program build_ppa(int n, int iterations) {
  return Program(ProgramInfo::make("ppa", n, 1), [iterations](Program::Sink sink) {
    for (int i = 0; i < iterations; ++i)
      if (!sink(Instruction::sort()) || !sink(Instruction::wait())) return false;
    return true;
  });
}

}  // namespace hbac
