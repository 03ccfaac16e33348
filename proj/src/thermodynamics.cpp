// thermodynamics.cpp: Steady states, energy bookkeeping and dephasing.

#include "qhe/thermodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace qhe {

namespace {

constexpr double kUniqueTol = 1e-8;    // second eigenvalue this close to 1 => degenerate
constexpr double kExistTol = 1e-6;     // no eigenvalue this close to 1 => invalid generator
constexpr double kAttributionTol = 1e-10;

double energy_of(const Vec& h0v, const Vec& rho) {
    return hs_inner(h0v, rho).real();
}

void book(CycleLedger& ledger, Channel c, double e) {
    switch (c) {
        case Channel::drive:
        case Channel::drive1:
        case Channel::drive2: ledger.work += e; break;
        case Channel::cold: ledger.heat_cold += e; break;
        case Channel::hot: ledger.heat_hot += e; break;
        case Channel::dephasing: break;  // pure dephasing exchanges no energy
    }
}

void finish(CycleLedger& ledger) {
    ledger.efficiency.reset();
    if (ledger.heat_hot > 0) {
        ledger.efficiency = -ledger.work / ledger.heat_hot;
    }
}

Vec hermitize(const Vec& rho) {
    Op m = unvec(rho);
    m = (m + m.adjoint()).eval() * 0.5;
    const cd tr = m.trace();
    if (std::abs(tr) == 0) {
        throw NumericalError("steady_state: fixed point has zero trace");
    }
    m /= tr.real();
    return vec<double>(m);
}

bool projects(const Segment& seg, const GeneratorSet& g) {
    return g.complete_dephasing && seg.weight(Channel::dephasing) > 0;
}

// K - 1 for one segment without forming K first: -iG times the integral of
// exp(-iGu) over the segment, read off a block exponential.
Superop segment_delta(const Segment& seg, const GeneratorSet& g) {
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    const Superop id = Superop::Identity(n2, n2);
    const bool project = projects(seg, g);
    Segment coherent = seg;
    coherent.weight(Channel::dephasing) = project ? 0.0 : seg.weight(Channel::dephasing);
    Superop gen = segment_generator(coherent, g);
    Superop p;
    if (project) {
        p = population_projector<double>(n);
        gen = (p * gen * p).eval();
    }
    Superop block = Superop::Zero(2 * n2, 2 * n2);
    block.topLeftCorner(n2, n2) = cd(0, -seg.duration) * gen;
    block.topRightCorner(n2, n2) = id;
    const Superop e = block.exp();
    Superop d = cd(0, -seg.duration) * gen * e.topRightCorner(n2, n2);
    if (project) {
        d = (p * d * p + p - id).eval();
    }
    return d;
}

// K - 1 for the whole cycle, composed as M <- D + M + D M.
Superop cycle_delta(const Schedule& s, const GeneratorSet& g) {
    const Eigen::Index n2 = g.h0.rows() * g.h0.rows();
    Superop m = Superop::Zero(n2, n2);
    for (const auto& seg : s.segments) {
        const Superop d = segment_delta(seg, g);
        m = (d + m + d * m).eval();
    }
    return m;
}

}  // namespace

double CycleLedger::first_law_residual() const {
    const double scale = std::abs(work) + std::abs(heat_cold) + std::abs(heat_hot);
    if (scale == 0) {
        return 0;
    }
    return std::abs(work + heat_cold + heat_hot) / scale;
}

SegmentEnergies segment_energy_ledger(const Segment& seg, const Vec& rho_in,
                                      const GeneratorSet& g) {
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    if (rho_in.size() != n2) {
        throw DimensionError("segment_energy_ledger: state has wrong dimension");
    }
    const Vec h0v = vec<double>(g.h0);
    const bool project = projects(seg, g);
    const Superop p = project ? population_projector<double>(n) : Superop();
    const Vec rin = project ? Vec(p * rho_in) : rho_in;

    std::vector<Channel> agents;
    std::vector<Superop> agent_gens;
    Superop total = Superop::Zero(n2, n2);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const auto ch = static_cast<Channel>(c);
        const double w = seg.weights[c];
        if (w == 0 || (project && ch == Channel::dephasing)) {
            continue;
        }
        Superop gc = w * g.gens[c];
        if (project) {
            gc = (p * gc * p).eval();
        }
        total += gc;
        agents.push_back(ch);
        agent_gens.push_back(std::move(gc));
    }

    SegmentEnergies out;
    const double e_in = energy_of(h0v, rho_in);

    if (agents.empty() || seg.duration == 0) {
        out.rho_out = project ? Vec(p * rin) : rin;
        return out;
    }

    // Currents are integrated exactly rather than differencing energies, which
    // keeps small per-cycle heats free of cancellation error.
    // exp([[-iG t, I], [0, 0]]) = [[K(t), (1/t) int_0^t K(u) du], [0, I]]
    const double t = seg.duration;
    Superop block = Superop::Zero(2 * n2, 2 * n2);
    block.topLeftCorner(n2, n2) = cd(0, -t) * total;
    block.topRightCorner(n2, n2) = Superop::Identity(n2, n2);
    const Superop e = block.exp();
    if (!e.allFinite()) {
        throw NumericalError("segment_energy_ledger: exponential overflowed");
    }
    out.rho_out = e.topLeftCorner(n2, n2) * rin;
    if (project) {
        out.rho_out = p * out.rho_out;
    }
    const Vec integrated = t * (e.topRightCorner(n2, n2) * rin);

    double sum = 0;
    double magnitude = 0;
    for (std::size_t k = 0; k < agents.size(); ++k) {
        const Vec flow = cd(0, -1) * (agent_gens[k] * integrated);
        const double ek = energy_of(h0v, flow);
        out.energy[static_cast<std::size_t>(agents[k])] = ek;
        sum += ek;
        magnitude += std::abs(ek);
    }
    const double delta = energy_of(h0v, out.rho_out) - e_in;
    // roundoff of the exponential grows with the number of squarings
    const double floor = 1e-14 * std::max(1.0, g.h0.norm()) * (1.0 + t * total.norm());
    if (std::abs(sum - delta) > kAttributionTol * (magnitude + std::abs(delta)) + floor) {
        throw NumericalError(fmt::format("segment_energy_ledger: agent attributions sum to {:.6e} "
                                         "but the segment energy changed by {:.6e}",
                                         sum, delta));
    }
    return out;
}

CycleLedger cycle_ledger(const Schedule& s, const GeneratorSet& g, const Vec& rho_in,
                         Vec* rho_out) {
    CycleLedger ledger;
    ledger.tau = s.tau_cyc;
    ledger.action = action(s, g);
    Vec rho = rho_in;
    for (std::size_t i = 0; i < s.segments.size(); ++i) {
        auto seg = segment_energy_ledger(s.segments[i], rho, g);
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (s.segments[i].weights[c] != 0) {
                const auto ch = static_cast<Channel>(c);
                ledger.per_segment.push_back({i, ch, seg.energy[c]});
                book(ledger, ch, seg.energy[c]);
            }
        }
        rho = std::move(seg.rho_out);
    }
    finish(ledger);
    if (rho_out) {
        *rho_out = std::move(rho);
    }
    return ledger;
}

SteadyStateResult steady_state(const Schedule& s, const GeneratorSet& g) {
    validate_schedule(s);
    if (s.tau_cyc <= 0) {
        throw ScheduleError("steady_state: cycle time must be positive");
    }
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    const bool generator_route = s.segments.size() == 1 && !projects(s.segments.front(), g);

    Superop m;
    Eigen::VectorXcd lambdas;
    if (generator_route) {
        m = segment_generator(s.segments.front(), g);
        Eigen::ComplexEigenSolver<Superop> es(m, false);
        lambdas = (es.eigenvalues() * cd(0, -s.tau_cyc)).array().exp().matrix();
    } else {
        m = cycle_delta(s, g);
        Eigen::ComplexEigenSolver<Superop> es(m, false);
        lambdas = es.eigenvalues().array() + cd(1);
    }
    if (!lambdas.allFinite()) {
        throw NumericalError("steady_state: eigenvalue computation failed");
    }

    std::vector<double> dist(static_cast<std::size_t>(lambdas.size()));
    std::vector<double> moduli(dist.size());
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
        dist[static_cast<std::size_t>(k)] = std::abs(lambdas(k) - cd(1));
        moduli[static_cast<std::size_t>(k)] = std::abs(lambdas(k));
    }
    const double nearest = *std::min_element(dist.begin(), dist.end());
    if (nearest > kExistTol) {
        throw NumericalError("steady_state: no eigenvalue within 1e-6 of 1");
    }
    const auto count = static_cast<Eigen::Index>(
        std::count_if(dist.begin(), dist.end(), [](double d) { return d <= kUniqueTol; }));

    SteadyStateResult r;
    r.unique = count <= 1;
    const Vec id = trace_functional<double>(n);
    Vec x;
    if (r.unique) {
        // The trace row is scaled to the size of M so the LU backward error, and
        // with it ||M rho||, stays at roundoff relative to M rather than to 1.
        const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        Superop a = m;
        a.row(0) = scale * id.adjoint();
        Vec b = Vec::Zero(n2);
        b(0) = scale;
        const auto lu = a.fullPivLu();
        x = lu.solve(b);
        // one step of iterative refinement
        x -= lu.solve(Vec(a * x - b));
    } else {
        Eigen::JacobiSVD<Superop> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Superop right = svd.matrixV().rightCols(count);
        const Superop left = svd.matrixU().rightCols(count);
        const Superop overlap = left.adjoint() * right;
        const Vec ref = maximally_mixed<double>(n);
        x = right * overlap.fullPivLu().solve(left.adjoint() * ref);
    }
    if (!x.allFinite()) {
        throw NumericalError("steady_state: fixed-point solve failed");
    }
    r.rho = hermitize(x);
    r.residual = (m * r.rho).norm();

    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    r.spectral_gap = r.unique && moduli.size() > 1 ? 1.0 - moduli[1] : 0.0;
    return r;
}

namespace {

// Ledger of a constant generator held at its unique fixed point. Each agent's
// energy is tau times its current; the currents are small differences of large
// bath fluxes, so the fixed point and the currents are evaluated in extended
// precision.
CycleLedger stationary_ledger(const Schedule& s, const GeneratorSet& g) {
    using cl = std::complex<long double>;
    using MatL = Eigen::Matrix<cl, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<cl, Eigen::Dynamic, 1>;
    const Segment& seg = s.segments.front();
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    MatL total = MatL::Zero(n2, n2);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (seg.weights[c] != 0) {
            total += static_cast<long double>(seg.weights[c]) * g.gens[c].cast<cl>();
        }
    }
    MatL a = total;
    VecL b = VecL::Zero(n2);
    a.row(0).setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
        a(0, liouville_index(i, i, n)) = 1;
    }
    b(0) = 1;
    const VecL x = a.fullPivLu().solve(b);
    const VecL h0v = vec<double>(g.h0).cast<cl>();

    CycleLedger ledger;
    ledger.tau = s.tau_cyc;
    ledger.action = action(s, g);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (seg.weights[c] == 0) {
            continue;
        }
        const VecL flow = cl(0, -1) * (static_cast<long double>(seg.weights[c]) *
                                       (g.gens[c].cast<cl>() * x));
        const long double current = (h0v.adjoint() * flow)(0).real();
        const double e = static_cast<double>(current * static_cast<long double>(s.tau_cyc));
        const auto ch = static_cast<Channel>(c);
        ledger.per_segment.push_back({0, ch, e});
        book(ledger, ch, e);
    }
    finish(ledger);
    return ledger;
}

// Ledger of a multi-segment cycle held at its periodic fixed point. Each
// segment's time integral J is taken from a double-precision block exponential;
// the segment deltas and the agent energy functionals are then assembled from
// the same J in extended precision, so the agents of every segment sum to its
// delta up to extended roundoff. The fixed point and its propagation around the
// cycle are also extended, which matters when the cycle is nearly reducible and
// the per-cycle exchange is many orders below the state populations.
CycleLedger periodic_ledger(const Schedule& s, const GeneratorSet& g, Vec* rho_fixed) {
    using cl = std::complex<long double>;
    using MatL = Eigen::Matrix<cl, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<cl, Eigen::Dynamic, 1>;
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    const MatL idl = MatL::Identity(n2, n2);
    const MatL pl = population_projector<long double>(n);
    const VecL h0v = vec<double>(g.h0).cast<cl>();

    struct Step {
        MatL delta;
        std::vector<std::pair<Channel, VecL>> agents;  // energy functionals as rows
    };
    std::vector<Step> steps;
    steps.reserve(s.segments.size());
    MatL m = MatL::Zero(n2, n2);
    for (const auto& seg : s.segments) {
        const bool project = projects(seg, g);
        Step st;
        st.delta = project ? MatL(pl - idl) : MatL::Zero(n2, n2);
        std::vector<std::pair<Channel, MatL>> gens;
        Superop total = Superop::Zero(n2, n2);
        const Superop p = population_projector<double>(n);
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            const auto ch = static_cast<Channel>(c);
            const double w = seg.weights[c];
            if (w == 0 || (project && ch == Channel::dephasing)) {
                continue;
            }
            Superop gc = w * g.gens[c];
            if (project) {
                gc = (p * gc * p).eval();
            }
            total += gc;
            gens.emplace_back(ch, gc.cast<cl>());
        }
        if (!gens.empty() && seg.duration > 0) {
            Superop block = Superop::Zero(2 * n2, 2 * n2);
            block.topLeftCorner(n2, n2) = cd(0, -seg.duration) * total;
            block.topRightCorner(n2, n2) = Superop::Identity(n2, n2);
            const Superop e = block.exp();
            if (!e.allFinite()) {
                throw NumericalError("periodic_ledger: exponential overflowed");
            }
            MatL j = (seg.duration * e.topRightCorner(n2, n2)).cast<cl>();
            if (project) {
                j = (j * pl).eval();
            }
            for (auto& [ch, gc] : gens) {
                const MatL flow = cl(0, -1) * (gc * j);
                if (project) {
                    st.delta += pl * flow;
                } else {
                    st.delta += flow;
                }
                st.agents.emplace_back(ch, VecL(flow.adjoint() * h0v));
            }
        }
        m = (st.delta + m + st.delta * m).eval();
        steps.push_back(std::move(st));
    }

    // Fixed point with the trace row scaled to the size of M.
    long double scale = 0;
    for (Eigen::Index c = 0; c < n2; ++c) {
        for (Eigen::Index r = 0; r < n2; ++r) {
            scale = std::max(scale, std::abs(m(r, c)));
        }
    }
    scale = std::max(scale, std::numeric_limits<long double>::min());
    MatL a = m;
    a.row(0).setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
        a(0, liouville_index(i, i, n)) = scale;
    }
    VecL b = VecL::Zero(n2);
    b(0) = scale;
    const auto lu = a.fullPivLu();
    VecL x = lu.solve(b);
    x -= lu.solve(VecL(a * x - b));
    if (!x.allFinite()) {
        throw NumericalError("periodic_ledger: fixed-point solve failed");
    }
    if (rho_fixed) {
        *rho_fixed = x.cast<cd>();
    }

    CycleLedger ledger;
    ledger.tau = s.tau_cyc;
    ledger.action = action(s, g);
    VecL rho = x;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (s.segments[i].weights[c] == 0) {
                continue;
            }
            const auto ch = static_cast<Channel>(c);
            double e = 0;
            for (const auto& [agent, f] : steps[i].agents) {
                if (agent == ch) {
                    e = static_cast<double>((f.adjoint() * rho)(0).real());
                }
            }
            ledger.per_segment.push_back({i, ch, e});
            book(ledger, ch, e);
        }
        rho += steps[i].delta * rho;
    }
    finish(ledger);
    return ledger;
}

}  // namespace

SteadyRun run_steady(const Schedule& s, const GeneratorSet& g) {
    SteadyRun run;
    run.state = steady_state(s, g);
    const bool stationary =
        s.segments.size() == 1 && !projects(s.segments.front(), g) && run.state.unique;
    if (stationary) {
        run.ledger = stationary_ledger(s, g);
    } else if (run.state.unique) {
        Vec x;
        run.ledger = periodic_ledger(s, g, &x);
        run.state.rho = hermitize(x);
    } else {
        run.ledger = cycle_ledger(s, g, run.state.rho);
    }
    return run;
}

std::vector<TransientPoint> evolve_transient(const Schedule& s, const GeneratorSet& g,
                                             const Vec& rho0, std::size_t n_cycles) {
    validate_schedule(s);
    if (!check_density(rho0).ok()) {
        throw NumericalError("evolve_transient: initial state is not a density vector");
    }
    std::vector<TransientPoint> out;
    out.reserve(n_cycles * s.segments.size());
    CycleLedger cum;
    cum.action = action(s, g);
    Vec rho = rho0;
    double time = 0;
    for (std::size_t cycle = 1; cycle <= n_cycles; ++cycle) {
        for (std::size_t i = 0; i < s.segments.size(); ++i) {
            const auto& seg = s.segments[i];
            auto step = segment_energy_ledger(seg, rho, g);
            for (std::size_t c = 0; c < kChannelCount; ++c) {
                if (seg.weights[c] != 0) {
                    book(cum, static_cast<Channel>(c), step.energy[c]);
                }
            }
            rho = std::move(step.rho_out);
            time += seg.duration;
            cum.tau = time;
            finish(cum);
            const bool boundary = i + 1 == s.segments.size();
            if (boundary && !check_density(rho).ok(1e-10, 1e-8)) {
                throw NumericalError("evolve_transient: state left the density-matrix set in cycle " +
                                     std::to_string(cycle));
            }
            out.push_back({cycle, i, boundary, time, rho, cum});
        }
    }
    return out;
}

WorkDecomposition decompose_work(const Vec& rho, const GeneratorSet& g, double tau_w) {
    if (!(tau_w >= 0)) {
        throw std::invalid_argument("decompose_work: negative stroke duration");
    }
    const Eigen::Index n = g.h0.rows();
    const Eigen::Index n2 = n * n;
    const Superop p = population_projector<double>(n);
    const Vec pop = p * rho;
    const Vec coh = rho - pop;
    const Superop x = cd(0, -tau_w) * g[Channel::drive];
    const Vec h0v = vec<double>(g.h0);

    Vec odd = Vec::Zero(n2);
    Vec even = Vec::Zero(n2);
    const double xnorm = tau_w * g.norm(Channel::drive);
    if (xnorm <= 4.0) {
        // Term-by-term series until terms drop below machine precision.
        Vec tc = coh;
        Vec tp = pop;
        for (int k = 1; k < 200; ++k) {
            tc = (x * tc) / static_cast<double>(k);
            tp = (x * tp) / static_cast<double>(k);
            if (k % 2 == 1) {
                odd += tc;
            } else {
                even += tp;
            }
            if (k > xnorm && tc.norm() + tp.norm() < 1e-18 * (1 + odd.norm() + even.norm())) {
                break;
            }
        }
    } else {
        // Same sums in closed form: sinh(X) and cosh(X) - 1.
        const Superop ep = x.exp();
        const Superop em = (-x).exp();
        odd = 0.5 * (ep - em) * coh;
        even = (0.5 * (ep + em) - Superop::Identity(n2, n2)) * pop;
    }
    return {energy_of(h0v, odd), energy_of(h0v, even)};
}

double drive_stroke_work(const Vec& rho, const GeneratorSet& g, double tau_w) {
    const Vec h0v = vec<double>(g.h0);
    const Vec out = propagate(g[Channel::drive], tau_w) * rho;
    return energy_of(h0v, out) - energy_of(h0v, rho);
}

Superop build_dephasing(double rate, int n) {
    if (!(rate >= 0) || !std::isfinite(rate)) {
        throw std::invalid_argument("build_dephasing: rate must be finite and non-negative");
    }
    std::vector<Op> jumps;
    for (int k = 0; k < n; ++k) {
        Op a = Op::Zero(n, n);
        a(k, k) = std::sqrt(rate);
        jumps.push_back(std::move(a));
    }
    return dissipator_superop<double>(jumps, n);
}

Superop complete_dephase(int n) {
    return population_projector<double>(n);
}

std::string to_string(Dephasing::Mode m) {
    switch (m) {
        case Dephasing::Mode::none: return "none";
        case Dephasing::Mode::rate: return "rate";
        case Dephasing::Mode::complete: return "complete";
    }
    return "unknown";
}

Dephasing::Mode dephasing_mode_from_string(const std::string& s) {
    if (s == "none") return Dephasing::Mode::none;
    if (s == "rate") return Dephasing::Mode::rate;
    if (s == "complete") return Dephasing::Mode::complete;
    throw std::invalid_argument("unknown dephasing mode '" + s + "'");
}

GeneratorSet with_dephasing(GeneratorSet g, const Dephasing& d) {
    const int n = g.dim();
    g.complete_dephasing = false;
    switch (d.mode) {
        case Dephasing::Mode::none:
            g.set(Channel::dephasing, Superop::Zero(n * n, n * n));
            break;
        case Dephasing::Mode::rate:
            g.set(Channel::dephasing, build_dephasing(d.rate, n));
            break;
        case Dephasing::Mode::complete:
            g.set(Channel::dephasing, Superop::Zero(n * n, n * n));
            g.norms[static_cast<std::size_t>(Channel::dephasing)] =
                std::numeric_limits<double>::infinity();
            g.complete_dephasing = true;
            break;
    }
    return g;
}

EngineSetup make_engine(const EngineModel& model, EngineType type, double tau_cyc,
                        const Dephasing& d) {
    EngineSetup e;
    e.generators = with_dephasing(build_generators(model), d);
    e.schedule = make_schedule(type, tau_cyc);
    if (d.mode != Dephasing::Mode::none) {
        e.schedule = with_dephasing(e.schedule);
    }
    validate_schedule(e.schedule);
    return e;
}

}  // namespace qhe
