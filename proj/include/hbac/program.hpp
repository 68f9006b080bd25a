#pragma once
// Cooling-algorithm instruction set and lazily generated instruction streams.
//
// A Program never stores its instructions.  It holds a restartable generator
// that pushes the stream into a sink; the sink may stop the traversal early by
// returning false.  Memory is bounded by the recursion depth of the builder,
// which matters because mPAC streams grow as 5^j.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "hbac/errors.hpp"

namespace hbac {

enum class Op : std::uint8_t {
  wait,      ///< reset step: every spin relaxes for T_WAIT
  pt,        ///< polarization transfer, executed as SWAP
  compress,  ///< |10..0> <-> |01..1> on `width` spins with target `k`
  sort,      ///< sort all basis probabilities (state-vector backend only)
};

struct Instruction {
  Op op = Op::wait;
  std::int16_t a = 0;  ///< PT source, or compression target spin k
  std::int16_t b = 0;  ///< PT destination, or compression width

  static constexpr Instruction wait() { return {}; }
  static constexpr Instruction sort() { return {Op::sort, 0, 0}; }
  static constexpr Instruction pt(int src, int dst) {
    return {Op::pt, static_cast<std::int16_t>(src), static_cast<std::int16_t>(dst)};
  }
  static constexpr Instruction compress(int k, int width) {
    return {Op::compress, static_cast<std::int16_t>(k), static_cast<std::int16_t>(width)};
  }
  static constexpr Instruction c2(int k) { return compress(k, 2); }
  static constexpr Instruction c3(int k) { return compress(k, 3); }
  static constexpr Instruction c4(int k) { return compress(k, 4); }

  int src() const { return a; }
  int dst() const { return b; }
  int target() const { return a; }
  int width() const { return b; }

  /// Highest and lowest spin index the instruction acts on (0 for WAIT/SORT).
  int highest_spin() const {
    switch (op) {
      case Op::pt: return std::max<int>(a, b);
      case Op::compress: return a;
      default: return 0;
    }
  }
  int lowest_spin() const {
    switch (op) {
      case Op::pt: return std::min<int>(a, b);
      case Op::compress: return a - b + 1;
      default: return 0;
    }
  }

  /// WAIT, SORT, PT(1->3), C3(5)
  std::string to_string() const {
    switch (op) {
      case Op::wait: return "WAIT";
      case Op::sort: return "SORT";
      case Op::pt: return "PT(" + std::to_string(a) + "->" + std::to_string(b) + ")";
      case Op::compress: return "C" + std::to_string(b) + "(" + std::to_string(a) + ")";
    }
    return "?";
  }

  friend constexpr bool operator==(const Instruction&, const Instruction&) = default;
};

/// Non-owning reference to a callable; cheap to copy and to pass down a
/// recursive generator.
template <class Signature>
class FunctionRef;

template <class R, class... Args>
class FunctionRef<R(Args...)> {
 public:
  template <class F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, FunctionRef> && std::is_invocable_r_v<R, F&, Args...>)
  FunctionRef(F&& f) noexcept  // NOLINT: implicit by intent
      : object_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
        call_([](void* o, Args... args) -> R {
          return std::invoke(*static_cast<std::remove_reference_t<F>*>(o), std::forward<Args>(args)...);
        }) {}

  R operator()(Args... args) const { return call_(object_, std::forward<Args>(args)...); }

 private:
  void* object_;
  R (*call_)(void*, Args...);
};

/// Builder metadata carried along with the stream.
struct ProgramInfo {
  std::string name;
  int n = 0;
  int n_reset = 1;
  std::optional<int> m;
  std::optional<double> delta;
  std::optional<int> order;
  std::map<int, int> m_table;  ///< recursion level k -> iteration count m_{n,k}
  bool redundant_resets_removed = false;

  static ProgramInfo make(std::string name, int n, int n_reset) {
    ProgramInfo info;
    info.name = std::move(name);
    info.n = n;
    info.n_reset = n_reset;
    return info;
  }
};

class Program {
 public:
  using Sink = FunctionRef<bool(const Instruction&)>;
  /// Pushes the whole stream into the sink; returns false if the sink
  /// stopped the traversal.
  using Generator = std::function<bool(Sink)>;

  Program(ProgramInfo info, Generator generator) : info_(std::move(info)), generator_(std::move(generator)) {}

  static Program empty(int n, int n_reset = 1) {
    return Program(ProgramInfo::make("empty", n, n_reset), [](Sink) { return true; });
  }

  /// A fixed instruction list, mostly for tests and hand-written sequences.
  static Program from_list(ProgramInfo info, std::vector<Instruction> instructions) {
    auto list = std::make_shared<const std::vector<Instruction>>(std::move(instructions));
    return Program(std::move(info), [list](Sink sink) {
      for (const auto& i : *list)
        if (!sink(i)) return false;
      return true;
    });
  }

  const ProgramInfo& info() const { return info_; }

  /// Visits every instruction in execution order.  `f` may return void, or
  /// bool where false stops the traversal.  Returns false if stopped.
  template <class F>
  bool for_each(F&& f) const {
    if constexpr (std::is_void_v<std::invoke_result_t<F&, const Instruction&>>) {
      auto always = [&f](const Instruction& i) {
        f(i);
        return true;
      };
      return generator_(Sink(always));
    } else {
      return generator_(Sink(f));
    }
  }

  /// Materializes at most `limit` instructions.
  std::vector<Instruction> take(std::size_t limit = std::numeric_limits<std::size_t>::max()) const {
    std::vector<Instruction> out;
    if (limit == 0) return out;
    for_each([&](const Instruction& i) {
      out.push_back(i);
      return out.size() < limit;
    });
    return out;
  }

  const Generator& generator() const { return generator_; }

 private:
  ProgramInfo info_;
  Generator generator_;
};

/// Number of reset (WAIT) steps in the stream.
inline std::uint64_t count_resets(const Program& p) {
  std::uint64_t n = 0;
  p.for_each([&n](const Instruction& i) {
    if (i.op == Op::wait) ++n;
  });
  return n;
}

inline std::uint64_t count_instructions(const Program& p) {
  std::uint64_t n = 0;
  p.for_each([&n](const Instruction&) { ++n; });
  return n;
}

/// Peephole pass: drops a WAIT when no instruction touched a reset spin since
/// the previous WAIT.  Only meaningful for ideal resets.
inline Program without_redundant_resets(const Program& p) {
  ProgramInfo info = p.info();
  info.redundant_resets_removed = true;
  const int n_reset = info.n_reset;
  Program::Generator inner = p.generator();
  return Program(std::move(info), [inner, n_reset](Program::Sink sink) {
    bool seen_wait = false;
    bool dirty = true;
    auto filter = [&](const Instruction& i) {
      if (i.op == Op::wait) {
        if (seen_wait && !dirty) return true;
        seen_wait = true;
        dirty = false;
        return sink(i);
      }
      if (i.op == Op::sort || i.lowest_spin() <= n_reset) dirty = true;
      return sink(i);
    };
    return inner(Program::Sink(filter));
  });
}

}  // namespace hbac
