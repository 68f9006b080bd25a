#pragma once
// Builders for the cooling algorithms: mPAC (cooling the MSB or all spins)
// and the bonacci family (Fibonacci, Tribonacci, k-term, their delta and
// greedy "new-" variants).
//
// Recursions are written in execution order.  An algorithm written
// right-to-left as  X(k) = [A B]^m C  runs C first, then B, then A, m times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "hbac/errors.hpp"
#include "hbac/program.hpp"
#include "hbac/sequences.hpp"
#include "hbac/spin_core.hpp"

namespace hbac {

using MTable = std::map<int, int>;

// ---------------------------------------------------------------------------
// mPAC
// ---------------------------------------------------------------------------

namespace detail {

// M_j(k) = [B(k) M_{j-1}(k-2) PT(k-2 -> k-1) M_{j-1}(k-2)]^m PT(k-2 -> k) M_{j-1}(k-2)
// with M_0(1) = WAIT and B(k) the 3-bit compression.
inline bool emit_mpac(int j, int k, int m, Program::Sink sink) {
  if (j == 0) return sink(Instruction::wait());
  if (!emit_mpac(j - 1, k - 2, m, sink)) return false;
  if (!sink(Instruction::pt(k - 2, k))) return false;
  for (int i = 0; i < m; ++i) {
    if (!emit_mpac(j - 1, k - 2, m, sink)) return false;
    if (!sink(Instruction::pt(k - 2, k - 1))) return false;
    if (!emit_mpac(j - 1, k - 2, m, sink)) return false;
    if (!sink(Instruction::c3(k))) return false;
  }
  return true;
}

// M_all(k) = M_all(k-2) PT(k-2 -> k-1) M_{j-1}(k-2) M_j(k), M_all(1) = WAIT.
inline bool emit_mpac_all(int k, int m, Program::Sink sink) {
  if (k == 1) return sink(Instruction::wait());
  const int j = (k - 1) / 2;
  if (!emit_mpac(j, k, m, sink)) return false;
  if (!emit_mpac(j - 1, k - 2, m, sink)) return false;
  if (!sink(Instruction::pt(k - 2, k - 1))) return false;
  return emit_mpac_all(k - 2, m, sink);
}

inline void check_mpac_args(int n, int m) {
  require(n >= 1 && n % 2 == 1, "mPAC needs an odd spin count, got " + std::to_string(n));
  require(m >= 1, "mPAC needs m >= 1");
}

}  // namespace detail

/// M_j(n) with n = 2j+1: cools the most significant spin.  Spin 1 resets.
inline Program build_mpac(int n, int m) {
  detail::check_mpac_args(n, m);
  ProgramInfo info = ProgramInfo::make("mpac", n, 1);
  info.m = m;
  const int j = (n - 1) / 2;
  return Program(std::move(info), [j, n, m](Program::Sink sink) { return detail::emit_mpac(j, n, m, sink); });
}

/// M_all(n): cools every spin, most significant first.
inline Program build_mpac_all(int n, int m) {
  detail::check_mpac_args(n, m);
  ProgramInfo info = ProgramInfo::make("mpac-all", n, 1);
  info.m = m;
  return Program(std::move(info), [n, m](Program::Sink sink) { return detail::emit_mpac_all(n, m, sink); });
}

/// Closed-form reset counts: N(M_j) = (2m+1)^j and
/// N(M_all(2j+1)) = N(M_all(2j-1)) + N(M_{j-1}) + N(M_j).
inline std::uint64_t mpac_reset_count(int j, int m) {
  std::uint64_t r = 1;
  for (int i = 0; i < j; ++i) r *= static_cast<std::uint64_t>(2 * m + 1);
  return r;
}

inline std::uint64_t mpac_all_reset_count(int j, int m) {
  std::uint64_t total = 1;
  for (int i = 1; i <= j; ++i) total += mpac_reset_count(i - 1, m) + mpac_reset_count(i, m);
  return total;
}

// ---------------------------------------------------------------------------
// Bonacci family
// ---------------------------------------------------------------------------

/// Shape of a bonacci algorithm.
///
/// Level k >= 3 runs  F(k) = [F(k-1) G(k)]^{m_k} F(k-1).  The plain variants
/// use the widest gate available to the order (3BC for Fibonacci, 4BC for
/// Tribonacci, never wider than k).  Greedy ("new-") variants pick, at every
/// iteration, the gate of width 2..order+1 that leaves spin k with the highest
/// linear-regime bias; ties go to the narrower gate.  The base level is WAIT
/// with two reset spins, or WAIT C2(2) WAIT with one.
struct BonacciShape {
  int n = 3;
  int order = 2;
  bool greedy = false;
  int n_reset = 2;
  /// Bookkeeping of the internal linear simulation that drives greedy choices
  /// and delta searches.
  DonorPolicy donors = DonorPolicy::discard;
};

namespace detail {

/// Linear-regime, ideal-reset simulation used while generating adaptive
/// streams.  Biases in units of eps0, reset spins return to exactly 1.
class LinearShadow {
 public:
  LinearShadow(int n, int n_reset, DonorPolicy donors) : state_(n, 0.0), n_reset_(n_reset), donors_(donors) {}

  void apply(const Instruction& i) {
    switch (i.op) {
      case Op::wait:
        for (int s = 1; s <= n_reset_; ++s) state_[s] = 1.0;
        break;
      case Op::pt: std::swap(state_[i.src()], state_[i.dst()]); break;
      case Op::compress:
        compress_in_place(state_.mutable_lsb_first(), i.target(), i.width(), Regime::linear, donors_);
        break;
      case Op::sort: throw BackendError("SORT has no product-state bookkeeping");
    }
  }

  /// Bias spin k would have after gate `i`, without applying it.
  double preview(const Instruction& i, int k) const {
    BiasVector copy = state_;
    compress_in_place(copy.mutable_lsb_first(), i.target(), i.width(), Regime::linear, donors_);
    return copy[k];
  }

  const BiasVector& state() const { return state_; }

 private:
  BiasVector state_;
  int n_reset_;
  DonorPolicy donors_;
};

class BonacciGenerator {
 public:
  BonacciGenerator(BonacciShape shape, MTable m) : shape_(shape), m_(std::move(m)) {}

  bool operator()(Program::Sink sink) const {
    LinearShadow shadow(shape_.n, shape_.n_reset, shape_.donors);
    return level(shape_.n, shadow, sink);
  }

  /// Runs levels up to k on `shadow`, discarding the instructions.
  void simulate_level(int k, LinearShadow& shadow) const {
    auto drop = [](const Instruction&) { return true; };
    level(k, shadow, Program::Sink(drop));
  }

 private:
  bool emit(const Instruction& i, LinearShadow& shadow, Program::Sink sink) const {
    shadow.apply(i);
    return sink(i);
  }

  bool base(LinearShadow& shadow, Program::Sink sink) const {
    if (shape_.n_reset == 2) return emit(Instruction::wait(), shadow, sink);
    return emit(Instruction::wait(), shadow, sink) && emit(Instruction::c2(2), shadow, sink) &&
           emit(Instruction::wait(), shadow, sink);
  }

  Instruction gate(int k, const LinearShadow& shadow) const {
    const int widest = std::min(shape_.order + 1, k);
    if (!shape_.greedy) return Instruction::compress(k, widest);
    Instruction best = Instruction::compress(k, 2);
    double best_bias = shadow.preview(best, k);
    for (int w = 3; w <= widest; ++w) {
      const Instruction candidate = Instruction::compress(k, w);
      const double b = shadow.preview(candidate, k);
      if (b > best_bias + 1e-12 * std::max(1.0, std::abs(best_bias))) {
        best = candidate;
        best_bias = b;
      }
    }
    return best;
  }

  bool level(int k, LinearShadow& shadow, Program::Sink sink) const {
    if (k <= 2) return base(shadow, sink);
    if (!level(k - 1, shadow, sink)) return false;
    const int m = m_.at(k);
    for (int i = 0; i < m; ++i) {
      if (!emit(gate(k, shadow), shadow, sink)) return false;
      if (!level(k - 1, shadow, sink)) return false;
    }
    return true;
  }

  BonacciShape shape_;
  MTable m_;
};

inline void check_shape(const BonacciShape& s) {
  require(s.n >= 3, "bonacci algorithms need at least 3 spins");
  require(s.order >= 2 && s.order + 1 <= kMaxCompressionWidth, "bonacci order out of range");
  require(s.n_reset == 1 || s.n_reset == 2, "bonacci algorithms use one or two reset spins");
}

inline void check_table(const BonacciShape& s, const MTable& m) {
  for (int k = 3; k <= s.n; ++k) {
    auto it = m.find(k);
    if (it == m.end()) throw ConfigError("m-table has no entry for level k=" + std::to_string(k));
    require(it->second >= 0, "m-table entries must be non-negative");
  }
}

inline std::string bonacci_name(const BonacciShape& s) {
  std::string base = s.order == 2 ? "fibonacci" : s.order == 3 ? "tribonacci" : std::to_string(s.order) + "-bonacci";
  return s.greedy ? "new-" + base : base;
}

}  // namespace detail

/// Any bonacci algorithm with an explicit iteration table.
inline Program build_bonacci(const BonacciShape& shape, const MTable& m_table) {
  detail::check_shape(shape);
  detail::check_table(shape, m_table);
  MTable m;
  for (int k = 3; k <= shape.n; ++k) m[k] = m_table.at(k);
  ProgramInfo info = ProgramInfo::make(detail::bonacci_name(shape), shape.n, shape.n_reset);
  info.order = shape.order;
  info.m_table = m;
  auto gen = std::make_shared<const detail::BonacciGenerator>(shape, std::move(m));
  return Program(std::move(info), [gen](Program::Sink sink) { return (*gen)(sink); });
}

/// Same m for every level (m-Fibonacci and friends).
inline MTable uniform_m_table(int n, int m) {
  MTable t;
  for (int k = 3; k <= n; ++k) t[k] = m;
  return t;
}

inline Program build_fibonacci(int n, const MTable& m_table, int n_reset = 2) {
  return build_bonacci({.n = n, .order = 2, .greedy = false, .n_reset = n_reset}, m_table);
}

inline Program build_tribonacci(int n, const MTable& m_table, int n_reset = 2) {
  return build_bonacci({.n = n, .order = 3, .greedy = false, .n_reset = n_reset}, m_table);
}

/// new-Fibonacci (order 2), new-Tribonacci (order 3), new-k-bonacci.
inline Program build_new_bonacci(int n, int order, const MTable& m_table, int n_reset = 2) {
  return build_bonacci({.n = n, .order = order, .greedy = true, .n_reset = n_reset}, m_table);
}

/// Iteration cap of the delta search at level k: n-k+2 for Fibonacci with
/// delta = 1/2, stretched by log2(1/delta) for smaller delta and by order-1
/// for higher orders (whose single compressions move less bias).
inline int delta_iteration_cap(int n, int k, double delta, int order = 2) {
  detail::require(order >= 2, "bonacci order must be at least 2");
  const double stretch = std::max(1.0, std::log2(1.0 / delta)) * (order - 1);
  return static_cast<int>(std::ceil((n - k + 2) * stretch - 1e-9));
}

/// Picks m_{n,k} level by level as the smallest iteration count that brings
/// spin k to its goal a_k (1 - delta^(n-k+1)) in the ideal linear regime,
/// starting from the fully mixed state.
inline MTable delta_m_table(const BonacciShape& shape, double delta) {
  detail::check_shape(shape);
  detail::require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  MTable table;
  for (int k = 3; k <= shape.n; ++k) {
    const double goal = bonacci_goal(shape.order, shape.n, k, delta);
    const int cap = delta_iteration_cap(shape.n, k, delta, shape.order);
    bool reached = false;
    for (int m = 0; m <= cap && !reached; ++m) {
      table[k] = m;
      MTable partial = table;
      for (int above = k + 1; above <= shape.n; ++above) partial[above] = 0;
      detail::BonacciGenerator gen(shape, partial);
      detail::LinearShadow shadow(shape.n, shape.n_reset, shape.donors);
      gen.simulate_level(k, shadow);
      reached = shadow.state()[k] >= goal - 1e-12 * goal;
    }
    if (!reached)
      throw ConfigError("delta goal unreachable within " + std::to_string(cap) + " iterations at (n,k)=(" +
                        std::to_string(shape.n) + "," + std::to_string(k) + ")");
  }
  return table;
}

inline Program build_delta_bonacci(const BonacciShape& shape, double delta) {
  Program p = build_bonacci(shape, delta_m_table(shape, delta));
  ProgramInfo info = p.info();
  info.name = (shape.greedy ? "new-delta-" : "delta-") + info.name.substr(shape.greedy ? 4 : 0);
  info.delta = delta;
  return Program(std::move(info), p.generator());
}

inline Program build_delta_fibonacci(int n, double delta, int n_reset = 2) {
  return build_delta_bonacci({.n = n, .order = 2, .greedy = false, .n_reset = n_reset}, delta);
}

}  // namespace hbac
