#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hbac/analysis.hpp"
#include "hbac/builders.hpp"
#include "hbac/engine.hpp"

using namespace hbac;

namespace {

const SpinSystem kSeven{7, 1, 1e-5};

TimingParams with_R(double R, double d = 5.0) { return {Extended(R), Extended(d)}; }

EngineConfig paper_model() {
  EngineConfig c;
  c.reset_model = ResetModel::paper_simplified;
  return c;
}

EngineConfig worked_linear() {
  EngineConfig c;
  c.mode = Regime::linear;
  c.donors = DonorPolicy::discard;
  c.initial = InitialState::mixed;
  return c;
}

}  // namespace

TEST(Engine, IdealTwoPac) {
  auto r = execute(build_mpac_all(7, 2), kSeven, TimingParams::ideal(), {});
  EXPECT_NEAR(r.cooling_factor / 5.359375, 1.0, 1e-6);
  EXPECT_EQ(r.n_resets, 187u);
  EXPECT_TRUE(r.t_run.is_infinite());
  auto lin = execute_linear(build_mpac_all(7, 2), kSeven, TimingParams::ideal());
  EXPECT_EQ(lin.cooling_factor, 5.359375);
}

TEST(Engine, FiniteRelaxationSimplifiedResets) {
  const auto p = build_mpac_all(7, 2);
  EXPECT_NEAR(execute(p, kSeven, with_R(1e4), paper_model()).cooling_factor, 5.11, 0.05);
  EXPECT_NEAR(execute(p, kSeven, with_R(1e3), paper_model()).cooling_factor, 3.63, 0.05);
  EXPECT_NEAR(execute(p, kSeven, with_R(1e2), paper_model()).cooling_factor, 1.07, 0.05);
}

TEST(Engine, EmptyProgramKeepsState) {
  EngineConfig cfg;
  cfg.initial_biases = BiasVector::from_msb_first({3e-5, 2e-5, 1e-5});
  auto r = execute(Program::empty(3), SpinSystem{3, 1, 1e-5}, with_R(10), cfg);
  EXPECT_EQ(r.final_biases, *cfg.initial_biases);
  EXPECT_EQ(r.n_resets, 0u);
  EXPECT_EQ(r.t_run.value(), 0.0);
}

TEST(Engine, WaitsOnlyGiveEquilibrium) {
  auto waits = Program::from_list(ProgramInfo::make("waits", 4, 2), std::vector<Instruction>(5, Instruction::wait()));
  auto r = execute_linear(waits, SpinSystem{4, 2, 1e-5}, TimingParams::ideal());
  for (double x : r.final_biases.lsb_first()) EXPECT_EQ(x, 1.0);
}

TEST(Engine, TimingAccounting) {
  const auto p = build_mpac_all(5, 2);
  auto r = execute(p, SpinSystem{5, 1, 1e-5}, with_R(1e3, 2.5), {});
  EXPECT_EQ(r.n_resets, count_resets(p));
  EXPECT_DOUBLE_EQ(r.t_run.value(), 2.5 * static_cast<double>(r.n_resets));
}

TEST(Engine, MonotoneInR) {
  for (const Program& p : {build_mpac_all(5, 2), build_mpac_all(7, 2), build_mpac(7, 1), build_fibonacci(5, uniform_m_table(5, 2))}) {
    for (ResetModel model : {ResetModel::paper_simplified, ResetModel::general}) {
      EngineConfig cfg;
      cfg.reset_model = model;
      const SpinSystem sys{p.info().n, p.info().n_reset, 1e-5};
      double prev = -1.0;
      for (double R : {1e2, 1e3, 1e4, 1e5}) {
        const double f = execute(p, sys, with_R(R), cfg).cooling_factor;
        EXPECT_GE(f, prev - 1e-12) << p.info().name << " R=" << R;
        prev = f;
      }
      TimingParams no_decay{Extended::infinity(), Extended(5.0)};
      EXPECT_GE(execute(p, sys, no_decay, cfg).cooling_factor, prev - 1e-12);
    }
  }
}

TEST(Engine, RelaxationLowerBound) {
  // final >= exp(-N_r/Q) * final without computation-spin decay
  for (int n : {3, 5, 7}) {
    const auto p = build_mpac_all(n, 2);
    const SpinSystem sys{n, 1, 1e-5};
    for (ResetModel model : {ResetModel::paper_simplified, ResetModel::general}) {
      EngineConfig cfg;
      cfg.reset_model = model;
      const double no_decay = execute(p, sys, TimingParams{Extended::infinity(), Extended(5.0)}, cfg).cooling_factor;
      for (double R : {1e2, 1e3, 1e4}) {
        const TimingParams t = with_R(R);
        const auto r = execute(p, sys, t, cfg);
        const double bound = std::exp(-static_cast<double>(r.n_resets) / t.Q().value()) * no_decay;
        EXPECT_GE(r.cooling_factor, bound) << "n=" << n << " R=" << R;
      }
    }
  }
}

TEST(Engine, ExactAgreesWithLinearOnWorkedExamples) {
  const std::vector<Program> programs{
      build_fibonacci(3, {{3, 3}}),           build_fibonacci(4, {{3, 2}, {4, 2}}),
      build_fibonacci(4, {{3, 3}, {4, 2}}),   build_tribonacci(4, {{3, 2}, {4, 3}}),
      build_tribonacci(4, {{3, 3}, {4, 3}}),  build_new_bonacci(4, 2, {{3, 2}, {4, 2}}),
      build_new_bonacci(4, 2, {{3, 3}, {4, 2}}), build_new_bonacci(4, 3, {{3, 2}, {4, 3}}),
      build_new_bonacci(4, 3, {{3, 3}, {4, 3}})};
  const SpinSystem sys{4, 2, 1e-5};
  for (const auto& p : programs)
    for (DonorPolicy d : {DonorPolicy::discard, DonorPolicy::propagate}) {
      EngineConfig lin = worked_linear(), ex = worked_linear();
      lin.donors = ex.donors = d;
      ex.mode = Regime::exact;
      lin.trajectory = ex.trajectory = TrajectoryLogging::full;
      auto a = execute(p, sys, TimingParams::ideal(), lin);
      auto b = execute(p, sys, TimingParams::ideal(), ex);
      ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
      for (std::size_t s = 0; s < a.trajectory.size(); ++s)
        for (int i = 1; i <= 4; ++i) {
          const double x = a.trajectory[s].biases[i], y = b.trajectory[s].biases[i] / sys.eps0;
          EXPECT_LE(std::abs(x - y), 1e-6 * std::max(1.0, std::abs(x)));
        }
    }
}

TEST(Engine, IdealRunsRespectResetBound) {
  std::vector<Program> programs;
  for (int n = 3; n <= 11; n += 2)
    for (int m = 1; m <= 3; ++m) {
      programs.push_back(build_mpac(n, m));
      programs.push_back(build_mpac_all(n, m));
    }
  for (int n = 3; n <= 7; ++n) {
    programs.push_back(build_fibonacci(n, uniform_m_table(n, 2)));
    programs.push_back(build_new_bonacci(n, 3, uniform_m_table(n, 2)));
    programs.push_back(build_delta_fibonacci(n, 0.5, 1));
  }
  for (const auto& p : programs) {
    const SpinSystem sys{p.info().n, p.info().n_reset, 1e-5};
    for (InitialState init : {InitialState::equilibrium, InitialState::mixed}) {
      EngineConfig cfg;
      cfg.initial = init;
      auto r = execute(p, sys, TimingParams::ideal(), cfg);
      EXPECT_TRUE(check_reset_bound(r).satisfied) << p.info().name << " n=" << sys.n << " k=" << r.cooling_factor;
    }
  }
}

TEST(Engine, SortIsRejected) {
  auto p = Program::from_list(ProgramInfo::make("s", 2, 1), {Instruction::wait(), Instruction::sort()});
  EXPECT_THROW(execute(p, SpinSystem{2, 1, 1e-5}, TimingParams::ideal(), {}), BackendError);
}

TEST(Engine, RejectsOutOfRangeGates) {
  auto p = Program::from_list(ProgramInfo::make("bad", 3, 1), {Instruction::c3(4)});
  EXPECT_THROW(execute(p, SpinSystem{3, 1, 1e-5}, TimingParams::ideal(), {}), ConfigError);
  EXPECT_THROW(execute(build_mpac_all(5, 2), SpinSystem{3, 1, 1e-5}, TimingParams::ideal(), {}), ConfigError);
}

TEST(Engine, ResetBudgetTruncates) {
  EngineConfig cfg;
  cfg.reset_budget = 10;
  auto r = execute(build_mpac_all(7, 2), kSeven, with_R(1e3), cfg);
  EXPECT_EQ(r.n_resets, 10u);
  EXPECT_TRUE(r.truncated);
  cfg.reset_budget = 1000;
  EXPECT_FALSE(execute(build_mpac_all(7, 2), kSeven, with_R(1e3), cfg).truncated);
}

TEST(Engine, TrajectorySampling) {
  EngineConfig cfg;
  cfg.trajectory = TrajectoryLogging::resets;
  const auto p = build_mpac_all(5, 2);
  auto r = execute(p, SpinSystem{5, 1, 1e-5}, with_R(1e3), cfg);
  EXPECT_EQ(r.trajectory.size(), r.n_resets);
  cfg.trajectory = TrajectoryLogging::full;
  r = execute(p, SpinSystem{5, 1, 1e-5}, with_R(1e3), cfg);
  EXPECT_EQ(r.trajectory.size(), r.n_instructions);
  EXPECT_EQ(r.trajectory.front().step, 1u);
  EXPECT_THROW(execute(build_mpac_all(11, 2), SpinSystem{11, 1, 1e-5}, with_R(1e3), cfg), ConfigError);
}

TEST(Engine, FlagsLeavingLinearRegime) {
  auto lin = execute_linear(build_mpac_all(7, 2), SpinSystem{7, 1, 1e-5}, TimingParams::ideal());
  EXPECT_FALSE(lin.left_linear_regime);
  auto big = execute_linear(build_mpac_all(7, 2), SpinSystem{7, 1, 0.005}, TimingParams::ideal());
  EXPECT_TRUE(big.left_linear_regime);
}

TEST(Engine, MaxAchievableBias) {
  const auto p = build_mpac_all(7, 2);
  const auto budget = 1000u;
  auto low = max_achievable_bias(p, kSeven, with_R(1e2), paper_model(), budget);
  EXPECT_NEAR(low.factor, 1.07, 0.05);
  EXPECT_EQ(low.resets, 187u);
  auto mid = max_achievable_bias(p, kSeven, with_R(1e3), paper_model(), budget);
  EXPECT_NEAR(mid.factor, 3.63, 0.05);
  auto peak = max_achievable_bias(p, kSeven, with_R(1e2), paper_model(), budget, BiasMetric::peak);
  EXPECT_GE(peak.factor, low.factor);
  EXPECT_LE(peak.resets, 187u);
  auto ideal = max_achievable_bias(p, kSeven, TimingParams::ideal(), {}, 5);
  EXPECT_EQ(ideal.resets, 5u);
  auto ideal_peak = max_achievable_bias(p, kSeven, TimingParams::ideal(), {}, budget, BiasMetric::peak);
  EXPECT_DOUBLE_EQ(ideal_peak.factor, execute(p, kSeven, TimingParams::ideal(), {}).cooling_factor);
  EXPECT_THROW(max_achievable_bias(p, kSeven, TimingParams::ideal(), {}, 0), ConfigError);
}
