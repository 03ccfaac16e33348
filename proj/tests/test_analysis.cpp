#include <gtest/gtest.h>

#include <numeric>
#include <stdexcept>

#include "qhe/analysis.hpp"
#include "test_support.hpp"

using namespace qhe;
using namespace qhe::testing;

TEST(ParallelMap, ResultsInIndexOrder) {
    for (int jobs : {1, 2, 4}) {
        const auto out = parallel_map(37, jobs, [](std::size_t i) { return i * i; });
        ASSERT_EQ(out.size(), 37u);
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(out[i], i * i);
        }
    }
    EXPECT_TRUE(parallel_map(0, 3, [](std::size_t i) { return i; }).empty());
}

TEST(ParallelMap, RethrowsLowestIndexError) {
    auto f = [](std::size_t i) -> int {
        if (i == 5) throw std::runtime_error("five");
        if (i == 9) throw std::runtime_error("nine");
        return 0;
    };
    for (int jobs : {1, 3}) {
        try {
            parallel_map(12, jobs, f);
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "five");
        }
    }
}

TEST(Strang, CommutingGeneratorsHaveNoDefect) {
    const auto g = build_generators(EngineModel::defaults());
    const auto d = strang_defect(g[Channel::hot], g[Channel::cold], 1e3);
    EXPECT_LT(d.defect, 1e-14);
}

TEST(Strang, DefectWithinCubedAction) {
    Rng rng(51);
    for (int trial = 0; trial < 30; ++trial) {
        const Superop a = random_lindblad(rng, 3, 2);
        const Superop b = random_lindblad(rng, 3, 2);
        const double norms = spectral_norm(a) + spectral_norm(b);
        for (double s : {0.05, 0.1, 0.25, 0.5}) {
            const auto d = strang_defect(a, b, s / norms);
            EXPECT_NEAR(d.s, s, 1e-12);
            EXPECT_NEAR(d.bound, s * s * s, 1e-15);
            EXPECT_LE(d.defect, d.bound);
        }
    }
}

TEST(Strang, DefectScalesAsCube) {
    Rng rng(52);
    const Superop a = random_lindblad(rng, 2, 1);
    const Superop b = random_lindblad(rng, 2, 1);
    std::vector<double> dts{1e-3, 2e-3, 4e-3, 8e-3};
    std::vector<double> defects;
    for (double dt : dts) defects.push_back(strang_defect(a, b, dt).defect);
    EXPECT_NEAR(fit_loglog_slope(dts, defects).slope, 3.0, 0.05);
}

TEST(LogLogFit, RecoversPowerLaw) {
    std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v * v);
    const auto f = fit_loglog_slope(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
    EXPECT_THROW(fit_loglog_slope({1, 2}, {1, 0}), std::invalid_argument);
    EXPECT_THROW(fit_loglog_slope({1}, {1}), std::invalid_argument);
}

TEST(InteriorArgmax, OnlyStrictInteriorPeaks) {
    EXPECT_EQ(interior_argmax({1, 3, 2}), std::optional<std::size_t>(1));
    EXPECT_FALSE(interior_argmax({1, 2, 3}).has_value());
    EXPECT_FALSE(interior_argmax({3, 2, 1}).has_value());
    EXPECT_FALSE(interior_argmax({1, 1}).has_value());
    EXPECT_FALSE(interior_argmax({}).has_value());
}

TEST(Bound, ClosedFormForDefaultModel) {
    const auto m = EngineModel::defaults();
    const double tau = 1000;
    // tr H0 = 0, tr H0^2 = 8.5, drive eigenvalues +-eps, duty 1/3
    const double base = std::sqrt(8.5) * std::pow(2 * m.epsilon, 2) / 9.0 * tau / 8.0;
    EXPECT_NEAR(stochastic_power_bound(m, EngineType::two_stroke, tau), base, 1e-15 * base);
    EXPECT_NEAR(stochastic_power_bound(m, EngineType::two_field, tau), base, 1e-15 * base);
    EXPECT_NEAR(stochastic_power_bound(m, EngineType::four_stroke, tau), base / 2, 1e-15 * base);
    EXPECT_NEAR(drive_eigenvalue_spread(m), 2 * m.epsilon, 1e-18);
    EXPECT_THROW(stochastic_power_bound(m, EngineType::continuous, tau), std::invalid_argument);
    EXPECT_THROW(bound_z_factor(EngineType::continuous), std::invalid_argument);
}

TEST(Bound, LinearInTauAndZeroWithoutDrive) {
    auto m = EngineModel::defaults();
    const double b1 = stochastic_power_bound(m, EngineType::two_stroke, 100);
    const double b2 = stochastic_power_bound(m, EngineType::two_stroke, 300);
    EXPECT_NEAR(b2 / b1, 3.0, 1e-13);
    m.epsilon = 0;
    EXPECT_EQ(stochastic_power_bound(m, EngineType::four_stroke, 100), 0);
}

TEST(Bound, EvaluatedLiterallyForShiftedLevels) {
    auto m = EngineModel::defaults();
    for (auto& e : m.levels) e += 0.5;
    // tr H0 = 2, tr H0^2 = 9.5
    const double base = std::sqrt(9.5 - 4.0) * std::pow(2 * m.epsilon, 2) / 9.0 * 500 / 8.0;
    EXPECT_NEAR(stochastic_power_bound(m, EngineType::two_stroke, 500), base, 1e-15 * base);
    for (auto& e : m.levels) e += 7;
    EXPECT_THROW(stochastic_power_bound(m, EngineType::two_stroke, 500), std::invalid_argument);
}

TEST(Signature, DephasedEngineStaysWithinCoherentExceedsAtShortCycles) {
    const auto m = EngineModel::defaults();
    const double tau = cycle_time(m, 0.1);
    const double rate = 1.0 / (100 * m.drive_period());
    const auto coherent = signature_test(m, EngineType::two_stroke, tau, {});
    const auto deph =
        signature_test(m, EngineType::two_stroke, tau, {Dephasing::Mode::complete, 0});
    const auto rated =
        signature_test(m, EngineType::two_stroke, tau, {Dephasing::Mode::rate, rate});
    EXPECT_EQ(coherent.verdict(), "exceeds");
    EXPECT_EQ(deph.verdict(), "within");
    EXPECT_LE(deph.measured_power, *deph.bound_value);
    EXPECT_LT(rated.measured_power, coherent.measured_power);
    EXPECT_NEAR(coherent.duty, 1.0 / 3, 1e-15);
    EXPECT_EQ(coherent.z_factor, 1.0);
}

TEST(Signature, ContinuousHasNoBound) {
    const auto m = EngineModel::defaults();
    const auto r = signature_test(m, EngineType::continuous, 100, {Dephasing::Mode::complete, 0});
    EXPECT_FALSE(r.bound_value.has_value());
    EXPECT_EQ(r.verdict(), "n/a");
    EXPECT_NEAR(r.measured_power, 0, 1e-12);
}

TEST(Passivity, GibbsStateIsPassive) {
    const auto m = EngineModel::defaults();
    const Op h0 = build_h0(m);
    const Vec rho = gibbs_state(m.levels, 2.0, {0, 1, 2, 3});
    const auto r = passivity_check(rho, h0);
    EXPECT_TRUE(r.passive);
    EXPECT_FALSE(r.inversion.has_value());
    EXPECT_FALSE(r.coherence.has_value());
}

TEST(Passivity, InversionAndCoherenceAreReported) {
    const Op h0 = build_h0(EngineModel::defaults());
    Op rho = Op::Zero(4, 4);
    rho(0, 0) = 0.1;
    rho(1, 1) = 0.4;
    rho(2, 2) = 0.3;
    rho(3, 3) = 0.2;
    auto r = passivity_check(vec<double>(rho), h0);
    EXPECT_FALSE(r.passive);
    ASSERT_TRUE(r.inversion.has_value());
    EXPECT_EQ(r.inversion->first, 0);
    EXPECT_EQ(r.inversion->second, 1);

    Op c = Op::Identity(4, 4) * 0.25;
    c(2, 3) = cd(0, 0.1);
    c(3, 2) = cd(0, -0.1);
    r = passivity_check(vec<double>(c), h0);
    EXPECT_FALSE(r.passive);
    ASSERT_TRUE(r.coherence.has_value());
    EXPECT_EQ(*r.coherence, std::make_pair(2, 3));
}

TEST(Passivity, EngineSteadyStateIsNotPassive) {
    const auto m = EngineModel::defaults();
    const auto g = build_generators(m);
    const auto run = run_steady(continuous_schedule(cycle_time(m, 4)), g);
    EXPECT_FALSE(passivity_check(run.state.rho, g.h0).passive);
}

TEST(Srt, IdentityLikeSchedulesGiveNoDeviation) {
    // The continuous engine has a single bin, so every rearrangement is the identity.
    const auto g = build_generators(EngineModel::defaults());
    const auto r = srt_verify(continuous_schedule(500), g, 5, maximally_mixed<double>(4), 7);
    EXPECT_LE(r.max_deviation(), 1e-12);
    EXPECT_EQ(r.permutations, 5u);
}

TEST(Srt, DeviationWithinCubedAction) {
    const auto m = EngineModel::defaults();
    const auto g = build_generators(m);
    const double rate = action(continuous_schedule(1), g);
    for (auto type : {EngineType::two_stroke, EngineType::four_stroke}) {
        const Schedule s = refine(make_schedule(type, 0.05 / rate), 3);
        const auto r = srt_verify(s, g, 10, basis_state<double>(3, 4), 11);
        EXPECT_NEAR(r.s, 0.05, 1e-12);
        EXPECT_LE(r.max_deviation(), regression::kSrtC * r.s * r.s * r.s);
        EXPECT_GT(r.max_deviation(), 0);
    }
}

TEST(Srt, SameSeedSameResult) {
    const auto g = build_generators(EngineModel::defaults());
    const Schedule s = refine(four_stroke_schedule(200), 3);
    const auto a = srt_verify(s, g, 4, maximally_mixed<double>(4), 99);
    const auto b = srt_verify(s, g, 4, maximally_mixed<double>(4), 99);
    EXPECT_EQ(a.max_dw, b.max_dw);
    EXPECT_EQ(a.max_dqh, b.max_dqh);
}

TEST(Sweep, EquivalenceAtSmallActionAndEfficiency) {
    const auto m = EngineModel::defaults();
    const auto res = equivalence_sweep(m, all_engine_types(), {1e-3, 1e-2, 0.1}, 2);
    ASSERT_EQ(res.rows.size(), 3u);
    EXPECT_EQ(res.axis, "action");
    for (const auto& row : res.rows) {
        ASSERT_EQ(row.engines.size(), all_engine_types().size());
        const double s = row.value;
        EXPECT_NEAR(row.engines[0].action, s, 1e-12 * s);
        EXPECT_LE(max_relative_deviation(row), regression::kEquivalenceK * s * s);
        for (const auto& e : row.engines) {
            ASSERT_TRUE(e.ok) << e.error;
            ASSERT_TRUE(e.efficiency.has_value());
            EXPECT_NEAR(*e.efficiency, 0.75, 1e-6);
        }
    }
}

TEST(Sweep, TausForActionsAreProportional) {
    const auto m = EngineModel::defaults();
    const auto taus = taus_for_actions(m, {0.1, 0.2});
    EXPECT_NEAR(taus[1] / taus[0], 2.0, 1e-14);
    EXPECT_THROW(taus_for_actions(m, {-1.0}), std::invalid_argument);
}

TEST(Sweep, FailedEngineMakesDeviationInfinite) {
    SweepRow row;
    row.value = 1;
    EnginePoint ref;
    ref.type = EngineType::continuous;
    ref.work = -1;
    ref.heat_cold = -3;
    ref.heat_hot = 4;
    EnginePoint other = ref;
    other.type = EngineType::two_stroke;
    other.work = -1.1;
    row.engines = {ref, other};
    EXPECT_NEAR(max_relative_deviation(row), 0.1, 1e-12);
    row.engines[1].ok = false;
    EXPECT_TRUE(std::isinf(max_relative_deviation(row)));
}

TEST(Sweep, OverthermalizationRowsFollowGammaGrid) {
    const auto m = EngineModel::defaults();
    const std::vector<double> gammas{1e-5, 1e-3};
    const auto res = overthermalization_sweep(m, {EngineType::continuous}, gammas, 2000, 1);
    EXPECT_EQ(res.axis, "gamma");
    ASSERT_EQ(res.rows.size(), 2u);
    EXPECT_EQ(res.rows[1].value, 1e-3);
    EXPECT_TRUE(res.rows[1].engines[0].ok);
}

TEST(Transients, ComparisonOfIdenticalRunsIsZero) {
    const auto m = EngineModel::defaults();
    const auto g = build_generators(m);
    const Schedule s = four_stroke_schedule(cycle_time(m, 4));
    const auto run = evolve_transient(s, g, basis_state<double>(3, 4), 3);
    const auto c = compare_transients({run, run});
    ASSERT_EQ(c.gaps.size(), 3u);
    EXPECT_EQ(c.max_gap_per_cycle, 0);
}

TEST(Transients, GapIsLargestPairwiseDifferencePerCycle) {
    const auto m = EngineModel::defaults();
    const auto g = build_generators(m);
    const double tau = cycle_time(m, 4);
    const Vec rho0 = basis_state<double>(3, 4);
    std::vector<std::vector<TransientPoint>> runs;
    for (auto type : all_engine_types()) {
        runs.push_back(evolve_transient(make_schedule(type, tau), g, rho0, 2));
    }
    const auto c = compare_transients(runs);
    ASSERT_EQ(c.gaps.size(), 2u);
    std::vector<double> last;
    for (const auto& r : runs) last.push_back(r.back().cumulative.work);
    const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
    EXPECT_NEAR(c.gaps[1], *hi - *lo, 1e-18);
    EXPECT_GE(c.max_gap_per_cycle, c.gaps[1] / 2);
}

TEST(Structural, DefaultAndRandomModelsPass) {
    Rng rng(53);
    auto check = [](const StructuralReport& r) {
        EXPECT_LE(r.annihilation, 1e-12);
        EXPECT_LE(r.population_block, 1e-12);
        EXPECT_LE(r.trace_preservation, 1e-12);
        EXPECT_LE(r.cptp, 1e-10);
    };
    check(structural_identities(EngineModel::defaults(), 3000));
    for (int trial = 0; trial < 5; ++trial) {
        check(structural_identities(random_model(rng), log_uniform(rng, 1, 1e3)));
    }
}

TEST(Structural, InjectedFaultIsDetected) {
    const auto m = EngineModel::defaults();
    auto g = build_generators(m);
    Superop hot = g[Channel::hot];
    hot(0, 0) += cd(0, -1e-3);
    g.set(Channel::hot, hot);
    const auto r = structural_identities(m, g, 3000);
    EXPECT_GT(r.trace_preservation, 1e-4);
}

TEST(Sweep, OverthermalizationPeakStableUnderGridRefinement) {
    auto m = EngineModel::defaults();
    m.epsilon = 2e-4;
    const double tau = cycle_time(m, 600);
    auto grid = [](int n) {
        std::vector<double> g;
        for (int i = 0; i < n; ++i) g.push_back(std::pow(10.0, -6 + 5.0 * i / (n - 1)));
        return g;
    };
    auto peak = [&](const std::vector<double>& gammas) {
        const auto res = overthermalization_sweep(m, {EngineType::continuous}, gammas, tau, 2);
        std::vector<double> power;
        for (const auto& row : res.rows) power.push_back(-row.engines[0].power);
        const auto i = interior_argmax(power);
        EXPECT_TRUE(i.has_value());
        return std::log10(gammas[i.value_or(0)]);
    };
    const double coarse_step = 5.0 / 10;
    EXPECT_LE(std::abs(peak(grid(11)) - peak(grid(21))), coarse_step + 1e-12);
}
