// analysis.hpp: Equivalence sweeps, the stochastic power bound and the
// signature test, over-thermalization, passivity, and the Strang and
// symmetric-rearrangement harnesses.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qhe/thermodynamics.hpp"

namespace qhe {

/// Runs f(0..n-1) on up to `jobs` threads. Results come back in index order
/// whatever the execution order; the first exception (lowest index) is rethrown.
template <class F>
auto parallel_map(std::size_t n, int jobs, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || n < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(threads, n); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

struct StrangDefect {
    double defect{};
    double bound{};  // s^3
    double s{};      // (||A|| + ||B||) dt
};

/// || e^{-iA dt/2} e^{-iB dt} e^{-iA dt/2} - e^{-i(A+B) dt} || in spectral norm.
StrangDefect strang_defect(const Superop& a, const Superop& b, double dt);

/// One engine's steady-state figures at one parameter point.
struct EnginePoint {
    EngineType type{};
    double tau{};
    double action{};
    double work{};
    double heat_cold{};
    double heat_hot{};
    double power{};
    double current_cold{};
    double current_hot{};
    double first_law_residual{};
    std::optional<double> efficiency;
    bool ok{true};
    std::string error;
};

/// Never throws for numerical trouble; failures come back with ok = false.
EnginePoint steady_point(const EngineModel& model, EngineType type, double tau,
                         const Dephasing& d = {});

struct SweepRow {
    double value{};  // axis coordinate
    std::vector<EnginePoint> engines;
};

struct SweepResult {
    std::string axis;  // "action" or "gamma"
    std::vector<EngineType> types;
    std::vector<SweepRow> rows;
};

/// Cycle times giving the continuous engine the requested actions.
std::vector<double> taus_for_actions(const EngineModel& model, const std::vector<double>& actions);

/// Steady state of every type at each action; tau from taus_for_actions.
SweepResult equivalence_sweep(const EngineModel& model, const std::vector<EngineType>& types,
                              const std::vector<double>& actions, int jobs = 1);

/// Steady state of every type with gamma_c = gamma_h = gamma at fixed tau.
SweepResult overthermalization_sweep(const EngineModel& model,
                                     const std::vector<EngineType>& types,
                                     const std::vector<double>& gammas, double tau, int jobs = 1);

/// Largest |X - X_ref| / |X_ref| over X in {W, Q_c, Q_h} and all non-reference
/// engines of the row. Infinite if any engine failed.
double max_relative_deviation(const SweepRow& row,
                              EngineType reference = EngineType::continuous);

struct LogLogFit {
    double slope{};
    double intercept{};
};

/// Least squares of log y on log x; all entries must be positive.
LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Grid index of the maximum if it lies strictly inside the grid and beats
/// both endpoints.
std::optional<std::size_t> interior_argmax(const std::vector<double>& values);

/// Cumulative work of several runs compared at their shared cycle boundaries.
struct TransientComparison {
    std::vector<double> gaps;  // largest pairwise |W_a - W_b| after cycle n + 1
    double max_gap_per_cycle{};  // max over n of gaps[n] / (n + 1)
};

TransientComparison compare_transients(const std::vector<std::vector<TransientPoint>>& runs);

/// (z/8) sqrt(tr H0^2 - (tr H0)^2) Dw^2 d^2 tau, z = 1 two-stroke, 1/2
/// four-stroke. Dw is the spread of the drive's eigenvalues. Throws for the
/// continuous engine.
double stochastic_power_bound(const EngineModel& model, EngineType type, double tau);
double bound_z_factor(EngineType type);
double drive_eigenvalue_spread(const EngineModel& model);

struct SignatureReport {
    EngineType type{};
    Dephasing dephasing;
    double tau{};
    double measured_power{};  // output power, -W / tau
    std::optional<double> bound_value;
    double z_factor{};
    double delta_w{};
    double duty{};
    bool exceeds{};  // measured_power > bound_value

    std::string verdict() const;  // "exceeds", "within" or "n/a" without a bound
};

SignatureReport signature_test(const EngineModel& model, EngineType type, double tau,
                               const Dephasing& d);

struct PassivityResult {
    bool passive{};
    std::optional<std::pair<int, int>> inversion;  // (lower, upper) with p_upper > p_lower
    std::optional<std::pair<int, int>> coherence;  // largest off-diagonal element
};

PassivityResult passivity_check(const Vec& rho, const Op& h0);

struct SrtReport {
    double max_dw{};
    double max_dqc{};
    double max_dqh{};
    double s{};
    std::size_t permutations{};

    double max_deviation() const { return std::max({max_dw, max_dqc, max_dqh}); }
};

/// One cycle from rho0 under the schedule and under random symmetric
/// rearrangements of it; the largest change of each cycle quantity.
SrtReport srt_verify(const Schedule& s, const GeneratorSet& g, std::size_t n_permutations,
                     const Vec& rho0, std::uint64_t seed);

/// Structural identities of one model, each a residual that should vanish.
struct StructuralReport {
    double annihilation{};         // ||H^H |H>|| + ||<H| H^H|| for H0 and H_w
    double population_block{};     // max |H_{ii,kk}| of the drive superoperator
    double trace_preservation{};   // max over channels of ||<I| G_c||
    double cptp{};                 // worst CPTP defect over engine cycle propagators
};

StructuralReport structural_identities(const EngineModel& model, double tau);
/// Same checks on a prepared generator set, e.g. one with a fault injected.
StructuralReport structural_identities(const EngineModel& model, const GeneratorSet& g,
                                       double tau);

// Regression anchors fitted by running this implementation and frozen.
namespace regression {
// Steady-state relative deviation from the continuous engine over s^2.
inline constexpr double kEquivalenceK = 6.5e-3;
// Cumulative-work gap per cycle at cycle boundaries over s^3.
inline constexpr double kTransientC = 1.5e-3;
// Symmetric-rearrangement energy change over s^3.
inline constexpr double kSrtC = 4e-3;
}  // namespace regression

}  // namespace qhe
