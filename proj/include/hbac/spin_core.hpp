#pragma once
// Spin-system configuration, bias arithmetic and the action of every
// permutation gate on product-state marginals.
//
// Conventions:
//   * spin indices are 1-based; spin 1 is the least significant bit and the
//     reset spins occupy the lowest indices;
//   * a bias is P(|0>) - P(|1>) of one spin, so cooling drives it to +1;
//   * the linear regime carries biases in units of the equilibrium bias and
//     drops every term of second or higher order in the biases.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hbac/errors.hpp"

namespace hbac {

/// Non-negative dimensionless quantity that may be infinite.  Infinity is a
/// distinct state rather than a large float so that decay factors such as
/// exp(-d/R) evaluate to exactly 1 in the ideal limit.
class Extended {
 public:
  constexpr Extended() = default;
  constexpr Extended(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  static Extended parse(std::string_view text) {
    if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") return infinity();
    try {
      std::size_t used = 0;
      double v = std::stod(std::string(text), &used);
      if (used != text.size()) throw ConfigError("trailing characters in number: " + std::string(text));
      if (std::isinf(v)) return infinity();
      return Extended(v);
    } catch (const std::logic_error&) {
      throw ConfigError("not a number or 'inf': " + std::string(text));
    }
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }
  /// The finite value; +inf for the infinite variant.
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  std::string to_string() const;

  friend constexpr bool operator==(const Extended& a, const Extended& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline std::string Extended::to_string() const {
  if (infinite_) return "inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value_);
  (void)ec;
  return std::string(buf, end);
}

/// exp(-elapsed/tau) with the ideal limits resolved exactly: an infinite time
/// constant never decays, an infinite elapsed time (with finite tau) fully
/// equilibrates.
inline double decay_factor(Extended elapsed, Extended tau) {
  if (tau.is_infinite()) return 1.0;
  if (elapsed.is_infinite()) return 0.0;
  return std::exp(-elapsed.value() / tau.value());
}

/// Dimensionless clock, all times in units of T1 of the reset spins.
struct TimingParams {
  Extended R = Extended::infinity();  ///< T1(comp) / T1(reset)
  Extended d = Extended::infinity();  ///< T_WAIT / T1(reset)

  void validate() const {
    detail::require(R.is_infinite() || R.value() > 0, "R must be positive");
    detail::require(d.is_infinite() || d.value() > 0, "d must be positive");
  }

  static TimingParams ideal() { return {}; }

  /// Q = T1(comp)/T_WAIT.  Infinite whenever R is (the ideal limit).
  Extended Q() const {
    if (R.is_infinite()) return Extended::infinity();
    if (d.is_infinite()) return Extended(0.0);
    return Extended(R.value() / d.value());
  }
  /// D = T1(comp)/T_run = Q/N_r.
  Extended D(std::uint64_t n_resets) const {
    Extended q = Q();
    if (n_resets == 0 || q.is_infinite()) return Extended::infinity();
    return Extended(q.value() / static_cast<double>(n_resets));
  }
  /// T_run = d * N_r.
  Extended t_run(std::uint64_t n_resets) const {
    if (n_resets == 0) return Extended(0.0);
    if (d.is_infinite()) return Extended::infinity();
    return Extended(d.value() * static_cast<double>(n_resets));
  }
  /// Per-WAIT decay factors of the reset and computation spins.
  double reset_decay() const { return decay_factor(d, Extended(1.0)); }
  double comp_decay() const { return decay_factor(d, R); }
};

struct SpinSystem {
  int n = 1;
  int n_reset = 1;  ///< reset spins are spins 1..n_reset
  double eps0 = 1e-5;

  void validate() const {
    detail::require(n >= 1, "spin count must be positive");
    detail::require(n_reset >= 1 && n_reset <= 2, "one or two reset spins are supported");
    detail::require(n_reset <= n, "more reset spins than spins");
    detail::require(eps0 > 0 && eps0 < 1, "eps0 must lie in (0, 1)");
  }
  bool is_reset(int spin) const { return spin >= 1 && spin <= n_reset; }
};

enum class Regime { exact, linear };

/// What a compression leaves on the lower spins of its group.  `propagate`
/// keeps the true post-gate marginals; `discard` treats them as fully mixed,
/// the bookkeeping used by the classical hand-worked bonacci trajectories.
/// Width-2 compression is a plain SWAP under either policy.
enum class DonorPolicy { propagate, discard };

/// Per-spin biases, index i <-> spin i (1-based accessors).
class BiasVector {
 public:
  BiasVector() = default;
  explicit BiasVector(int n, double fill = 0.0) : values_(static_cast<std::size_t>(n), fill) {}
  explicit BiasVector(std::vector<double> lsb_first) : values_(std::move(lsb_first)) {}

  /// Builds from a list written MSB first, as states are printed.
  static BiasVector from_msb_first(std::initializer_list<double> msb_first) {
    return BiasVector(std::vector<double>(std::rbegin(msb_first), std::rend(msb_first)));
  }

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int spin) const { return values_[static_cast<std::size_t>(spin - 1)]; }
  double& operator[](int spin) { return values_[static_cast<std::size_t>(spin - 1)]; }
  double at(int spin) const {
    check(spin);
    return (*this)[spin];
  }
  double msb() const { return values_.back(); }

  std::span<const double> lsb_first() const { return values_; }
  std::span<double> mutable_lsb_first() { return values_; }
  std::vector<double> msb_first() const { return {values_.rbegin(), values_.rend()}; }

  void check(int spin) const {
    if (spin < 1 || spin > size())
      throw ConfigError("spin index " + std::to_string(spin) + " out of range 1.." + std::to_string(size()));
  }

  friend bool operator==(const BiasVector&, const BiasVector&) = default;

 private:
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Gates.  All are permutations of basis states; on a product state each one
// maps marginals in closed form.
// ---------------------------------------------------------------------------

/// Polarization transfer, realized as a full SWAP of the two spins.
inline BiasVector pt(BiasVector state, int src, int dst) {
  state.check(src);
  state.check(dst);
  detail::require(src != dst, "PT source and destination coincide");
  std::swap(state[src], state[dst]);
  return state;
}

/// Largest supported compression width.
inline constexpr int kMaxCompressionWidth = 16;

/// Bias moved onto spin k by the width-w compression |10..0> <-> |01..1> on
/// spins k, k-1, ..., k-w+1, for a product input.
///
/// With c the bias of spin k and e_j the elementary symmetric polynomials of
/// the w-1 lower biases,
///   delta = 2^{2-w} * ( sum_{j odd} e_j  -  c * sum_{j even} e_j ),
/// so that no term cancels against a leading 1 when the biases are small.
/// The lower spins each lose the same delta.
inline double compression_shift(std::span<const double> lower, double c, Regime regime) {
  const int w = static_cast<int>(lower.size()) + 1;
  const double scale = std::ldexp(1.0, 2 - w);
  if (regime == Regime::linear) {
    double sum = 0.0;
    for (double x : lower) sum += x;
    return scale * (sum - c);
  }
  double e[kMaxCompressionWidth] = {1.0};
  for (std::size_t i = 0; i < lower.size(); ++i)
    for (std::size_t j = i + 1; j > 0; --j) e[j] += e[j - 1] * lower[i];
  double odd = 0.0, even = 0.0;
  for (std::size_t j = 0; j <= lower.size(); ++j) (j % 2 ? odd : even) += e[j];
  return scale * (odd - c * even);
}

namespace detail {

// biases[0] is spin 1.  Indices are trusted.
inline void compress_in_place(std::span<double> biases, int k, int width, Regime regime, DonorPolicy donors) {
  if (width == 2) {
    std::swap(biases[static_cast<std::size_t>(k - 1)], biases[static_cast<std::size_t>(k - 2)]);
    return;
  }
  double lower[kMaxCompressionWidth];
  const std::size_t nl = static_cast<std::size_t>(width - 1);
  for (std::size_t i = 0; i < nl; ++i) lower[i] = biases[static_cast<std::size_t>(k - 2) - i];
  const double delta = compression_shift({lower, nl}, biases[static_cast<std::size_t>(k - 1)], regime);
  biases[static_cast<std::size_t>(k - 1)] += delta;
  for (std::size_t i = 0; i < nl; ++i) {
    double& b = biases[static_cast<std::size_t>(k - 2) - i];
    b = (donors == DonorPolicy::discard && width >= 3) ? 0.0 : b - delta;
  }
}

inline void check_compression(int k, int width, int n) {
  if (width < 2 || width > kMaxCompressionWidth)
    throw ConfigError("compression width must lie in 2.." + std::to_string(kMaxCompressionWidth));
  if (k < width)
    throw ConfigError(std::to_string(width) + "-bit compression needs target spin >= " + std::to_string(width) +
                      ", got " + std::to_string(k));
  if (k > n) throw ConfigError("spin index " + std::to_string(k) + " out of range 1.." + std::to_string(n));
}

}  // namespace detail

/// Width-w compression with target (MSB of the group) spin k.  Width 2 is a
/// SWAP of k and k-1.
inline BiasVector compress(BiasVector state, int k, int width, Regime regime = Regime::exact,
                           DonorPolicy donors = DonorPolicy::propagate) {
  detail::check_compression(k, width, state.size());
  detail::compress_in_place(state.mutable_lsb_first(), k, width, regime, donors);
  return state;
}

inline BiasVector compress2(BiasVector s, int k, Regime r = Regime::exact, DonorPolicy p = DonorPolicy::propagate) {
  return compress(std::move(s), k, 2, r, p);
}
inline BiasVector compress3(BiasVector s, int k, Regime r = Regime::exact, DonorPolicy p = DonorPolicy::propagate) {
  return compress(std::move(s), k, 3, r, p);
}
inline BiasVector compress4(BiasVector s, int k, Regime r = Regime::exact, DonorPolicy p = DonorPolicy::propagate) {
  return compress(std::move(s), k, 4, r, p);
}

/// Longitudinal relaxation for `duration` (units of T1 of the reset spins):
/// reset spins decay with time constant 1, computation spins with R.
inline BiasVector relax(BiasVector state, Extended duration, const TimingParams& timing,
                        const SpinSystem& system, Regime regime = Regime::exact) {
  detail::require(duration.is_infinite() || duration.value() >= 0, "relaxation duration must be non-negative");
  const double eq = regime == Regime::linear ? 1.0 : system.eps0;
  const double fr = decay_factor(duration, Extended(1.0));
  const double fc = decay_factor(duration, timing.R);
  for (int s = 1; s <= state.size(); ++s) {
    const double f = system.is_reset(s) ? fr : fc;
    if (f != 1.0) state[s] = (state[s] - eq) * f + eq;
  }
  return state;
}

}  // namespace hbac
