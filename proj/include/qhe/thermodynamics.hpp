// thermodynamics.hpp: Steady states, transients, the work/heat ledger, the
// coherent/stochastic split of drive work, and pure dephasing.
//
// Sign convention: W, Q_c and Q_h are energy flowing INTO the working medium,
// so the first law reads W + Q_c + Q_h = 0 over a steady cycle and an engine
// has W < 0, Q_h > 0. Efficiency is -W / Q_h.

#pragma once

#include <optional>
#include <vector>

#include "qhe/protocols.hpp"

namespace qhe {

struct SteadyStateResult {
    Vec rho;
    double residual{};      // ||G rho|| (continuous) or ||K rho - rho|| (stroke)
    double spectral_gap{};  // 1 - |lambda_2| of the cycle propagator
    bool unique{true};
};

struct AgentEnergy {
    std::size_t segment{};
    Channel agent{};
    double energy{};
};

struct CycleLedger {
    double work{};
    double heat_cold{};
    double heat_hot{};
    std::vector<AgentEnergy> per_segment;
    double action{};
    double tau{};
    std::optional<double> efficiency;  // -W / Q_h, only when Q_h > 0

    double power() const { return tau > 0 ? work / tau : 0.0; }
    double current_cold() const { return tau > 0 ? heat_cold / tau : 0.0; }
    double current_hot() const { return tau > 0 ? heat_hot / tau : 0.0; }
    /// |W + Q_c + Q_h| / (|W| + |Q_c| + |Q_h|), zero when all vanish.
    double first_law_residual() const;
};

struct SegmentEnergies {
    Vec rho_out;
    Weights energy{};  // per channel
};

/// Energy change of one segment, attributed per agent. Single-agent segments
/// book the whole change to that agent; simultaneous agents are attributed by
/// integrating their currents exactly over the segment.
SegmentEnergies segment_energy_ledger(const Segment& seg, const Vec& rho_in,
                                      const GeneratorSet& g);

/// Runs one cycle from rho_in and books every agent's energy.
CycleLedger cycle_ledger(const Schedule& s, const GeneratorSet& g, const Vec& rho_in,
                         Vec* rho_out = nullptr);

/// Continuous (single constant segment): null vector of the generator. Stroke:
/// fixed point of the cycle propagator at the cycle start (-tau/2). A
/// degenerate fixed-point space is flagged and resolved by projecting the
/// maximally mixed state onto it.
SteadyStateResult steady_state(const Schedule& s, const GeneratorSet& g);

struct SteadyRun {
    SteadyStateResult state;
    CycleLedger ledger;
};

SteadyRun run_steady(const Schedule& s, const GeneratorSet& g);

struct TransientPoint {
    std::size_t cycle{};    // 1-based cycle the boundary closes
    std::size_t segment{};  // segment just completed
    bool cycle_boundary{};
    double time{};          // elapsed since the start of the run
    Vec rho;
    CycleLedger cumulative;  // running totals, per-segment detail omitted
};

/// Records every segment boundary of n_cycles cycles.
std::vector<TransientPoint> evolve_transient(const Schedule& s, const GeneratorSet& g,
                                             const Vec& rho0, std::size_t n_cycles);

struct WorkDecomposition {
    double coherent{};
    double stochastic{};
};

/// Splits the work of an isolated drive stroke exp(-i (1/2)H_w tau_w) into the
/// odd-order part acting on coherences and the even-order part acting on
/// populations.
WorkDecomposition decompose_work(const Vec& rho, const GeneratorSet& g, double tau_w);

/// Exact work of the isolated drive stroke, <H0|K - 1|rho>.
double drive_stroke_work(const Vec& rho, const GeneratorSet& g, double tau_w);

/// Pure dephasing at a uniform rate on every energy-basis coherence.
Superop build_dephasing(double rate, int n);

/// Exact projection onto populations.
Superop complete_dephase(int n);

struct Dephasing {
    enum class Mode { none, rate, complete };
    Mode mode{Mode::none};
    double rate{};
};

std::string to_string(Dephasing::Mode m);
Dephasing::Mode dephasing_mode_from_string(const std::string& s);

/// Installs the dephasing channel on the generators.
GeneratorSet with_dephasing(GeneratorSet g, const Dephasing& d);

/// Schedule + generators for one engine type, dephasing channel included.
struct EngineSetup {
    Schedule schedule;
    GeneratorSet generators;
};

EngineSetup make_engine(const EngineModel& model, EngineType type, double tau_cyc,
                        const Dephasing& d = {});

}  // namespace qhe
