// analysis.cpp: Sweeps, bounds and verification harnesses.

#include "qhe/analysis.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace qhe {

StrangDefect strang_defect(const Superop& a, const Superop& b, double dt) {
    if (!(dt >= 0)) {
        throw std::invalid_argument("strang_defect: dt must be non-negative");
    }
    const Superop half = propagate(a, dt / 2);
    const Superop split = half * propagate(b, dt) * half;
    const Superop exact = propagate(Superop(a + b), dt);
    StrangDefect r;
    r.defect = spectral_norm(split - exact);
    r.s = (spectral_norm(a) + spectral_norm(b)) * dt;
    r.bound = r.s * r.s * r.s;
    return r;
}

EnginePoint steady_point(const EngineModel& model, EngineType type, double tau,
                         const Dephasing& d) {
    EnginePoint p;
    p.type = type;
    p.tau = tau;
    try {
        const auto e = make_engine(model, type, tau, d);
        p.action = action(e.schedule, e.generators);
        const auto run = run_steady(e.schedule, e.generators);
        const auto& l = run.ledger;
        p.work = l.work;
        p.heat_cold = l.heat_cold;
        p.heat_hot = l.heat_hot;
        p.power = l.power();
        p.current_cold = l.current_cold();
        p.current_hot = l.current_hot();
        p.first_law_residual = l.first_law_residual();
        p.efficiency = l.efficiency;
    } catch (const NumericalError& ex) {
        p.ok = false;
        p.error = ex.what();
    }
    return p;
}

std::vector<double> taus_for_actions(const EngineModel& model,
                                     const std::vector<double>& actions) {
    const auto g = build_generators(model);
    const double rate = action(continuous_schedule(1.0), g);
    if (!(rate > 0)) {
        throw ModelError("taus_for_actions: model has zero action rate");
    }
    std::vector<double> taus;
    taus.reserve(actions.size());
    for (double s : actions) {
        if (!(s > 0)) {
            throw std::invalid_argument("taus_for_actions: actions must be positive");
        }
        taus.push_back(s / rate);
    }
    return taus;
}

namespace {

SweepResult run_grid(const std::string& axis, const std::vector<EngineType>& types,
                     const std::vector<double>& values, int jobs,
                     const std::function<EnginePoint(std::size_t, EngineType)>& point) {
    const std::size_t nt = types.size();
    auto flat = parallel_map(values.size() * nt, jobs, [&](std::size_t k) {
        return point(k / nt, types[k % nt]);
    });
    SweepResult r;
    r.axis = axis;
    r.types = types;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.value = values[i];
        for (std::size_t t = 0; t < nt; ++t) {
            row.engines.push_back(std::move(flat[i * nt + t]));
        }
        r.rows.push_back(std::move(row));
    }
    return r;
}

}  // namespace

SweepResult equivalence_sweep(const EngineModel& model, const std::vector<EngineType>& types,
                              const std::vector<double>& actions, int jobs) {
    model.validate();
    const auto taus = taus_for_actions(model, actions);
    return run_grid("action", types, actions, jobs,
                    [&](std::size_t i, EngineType t) { return steady_point(model, t, taus[i]); });
}

SweepResult overthermalization_sweep(const EngineModel& model,
                                     const std::vector<EngineType>& types,
                                     const std::vector<double>& gammas, double tau, int jobs) {
    model.validate();
    for (double g : gammas) {
        if (!(g > 0)) {
            throw std::invalid_argument("overthermalization_sweep: gamma must be positive");
        }
    }
    return run_grid("gamma", types, gammas, jobs, [&](std::size_t i, EngineType t) {
        EngineModel m = model;
        m.gamma_hot = gammas[i];
        m.gamma_cold = gammas[i];
        return steady_point(m, t, tau);
    });
}

double max_relative_deviation(const SweepRow& row, EngineType reference) {
    const EnginePoint* ref = nullptr;
    for (const auto& e : row.engines) {
        if (e.type == reference) {
            ref = &e;
        }
    }
    if (!ref || !ref->ok) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0;
    for (const auto& e : row.engines) {
        if (e.type == reference) {
            continue;
        }
        if (!e.ok) {
            return std::numeric_limits<double>::infinity();
        }
        const double pairs[3][2] = {{e.work, ref->work},
                                    {e.heat_cold, ref->heat_cold},
                                    {e.heat_hot, ref->heat_hot}};
        for (const auto& p : pairs) {
            worst = std::max(worst, std::abs(p[0] - p[1]) / std::abs(p[1]));
        }
    }
    return worst;
}

LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_loglog_slope: need two or more matching points");
    }
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (!(x[k] > 0) || !(y[k] > 0)) {
            throw std::invalid_argument("fit_loglog_slope: values must be positive");
        }
        a(i, 0) = std::log(x[k]);
        a(i, 1) = 1;
        b(i) = std::log(y[k]);
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1)};
}

std::optional<std::size_t> interior_argmax(const std::vector<double>& values) {
    if (values.size() < 3) {
        return std::nullopt;
    }
    const auto it = std::max_element(values.begin(), values.end());
    const auto k = static_cast<std::size_t>(it - values.begin());
    if (k == 0 || k + 1 == values.size() || !(*it > values.front()) || !(*it > values.back())) {
        return std::nullopt;
    }
    return k;
}

TransientComparison compare_transients(const std::vector<std::vector<TransientPoint>>& runs) {
    std::vector<std::vector<double>> work;
    for (const auto& run : runs) {
        std::vector<double> w;
        for (const auto& p : run) {
            if (p.cycle_boundary) {
                w.push_back(p.cumulative.work);
            }
        }
        work.push_back(std::move(w));
    }
    TransientComparison c;
    if (work.empty()) {
        return c;
    }
    std::size_t cycles = work.front().size();
    for (const auto& w : work) {
        cycles = std::min(cycles, w.size());
    }
    for (std::size_t n = 0; n < cycles; ++n) {
        double gap = 0;
        for (std::size_t a = 0; a < work.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                gap = std::max(gap, std::abs(work[a][n] - work[b][n]));
            }
        }
        c.gaps.push_back(gap);
        c.max_gap_per_cycle = std::max(c.max_gap_per_cycle, gap / static_cast<double>(n + 1));
    }
    return c;
}

double bound_z_factor(EngineType type) {
    switch (type) {
        case EngineType::two_stroke: return 1.0;
        case EngineType::four_stroke: return 0.5;
        // both drive halves act in one short stroke each, as in the two-stroke
        case EngineType::two_field: return 1.0;
        case EngineType::continuous: break;
    }
    throw std::invalid_argument(
        "stochastic_power_bound: the continuous engine has no stochastic bound");
}

double drive_eigenvalue_spread(const EngineModel& model) {
    const Op hw = build_drive_hamiltonian(model);
    Eigen::SelfAdjointEigenSolver<Op> es(hw, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

double stochastic_power_bound(const EngineModel& model, EngineType type, double tau) {
    const double z = bound_z_factor(type);
    if (!(tau > 0)) {
        throw ScheduleError("stochastic_power_bound: cycle time must be positive");
    }
    const Op h0 = build_h0(model);
    const double tr = h0.trace().real();
    const double tr2 = (h0 * h0).trace().real();
    const double spread = drive_eigenvalue_spread(model);
    const double d = duty_cycle(make_schedule(type, tau));
    if (tr2 - tr * tr < 0) {
        throw std::invalid_argument(
            "stochastic_power_bound: (tr H0)^2 exceeds tr H0^2; shift the levels towards a traceless H0");
    }
    return z / 8 * std::sqrt(tr2 - tr * tr) * spread * spread * d * d * tau;
}

std::string SignatureReport::verdict() const {
    if (!bound_value) {
        return "n/a";
    }
    return exceeds ? "exceeds" : "within";
}

SignatureReport signature_test(const EngineModel& model, EngineType type, double tau,
                               const Dephasing& d) {
    SignatureReport r;
    r.type = type;
    r.dephasing = d;
    r.tau = tau;
    r.delta_w = drive_eigenvalue_spread(model);
    r.duty = duty_cycle(make_schedule(type, tau));
    const auto e = make_engine(model, type, tau, d);
    r.measured_power = -run_steady(e.schedule, e.generators).ledger.power();
    if (type != EngineType::continuous) {
        r.z_factor = bound_z_factor(type);
        r.bound_value = stochastic_power_bound(model, type, tau);
        r.exceeds = r.measured_power > *r.bound_value;
    }
    return r;
}

PassivityResult passivity_check(const Vec& rho, const Op& h0) {
    const Op m = unvec(rho);
    const Eigen::Index n = m.rows();
    if (h0.rows() != n || h0.cols() != n) {
        throw DimensionError("passivity_check: state and Hamiltonian dimensions differ");
    }
    const Op offdiag_h = h0 - Op(h0.diagonal().asDiagonal());
    if (offdiag_h.norm() > 1e-12 * std::max(1.0, h0.norm())) {
        throw std::invalid_argument("passivity_check: Hamiltonian must be diagonal");
    }
    PassivityResult r;
    double worst_coh = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i != j && std::abs(m(i, j)) > worst_coh && i < j) {
                worst_coh = std::abs(m(i, j));
                r.coherence = std::pair{static_cast<int>(i), static_cast<int>(j)};
            }
        }
    }
    const Op offdiag = m - Op(m.diagonal().asDiagonal());
    if (offdiag.norm() <= 1e-10) {
        r.coherence.reset();
    }
    double worst_inv = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const double ea = h0(a, a).real();
            const double eb = h0(b, b).real();
            const double excess = m(b, b).real() - m(a, a).real();
            if (eb > ea && excess > 1e-10 && excess > worst_inv) {
                worst_inv = excess;
                r.inversion = std::pair{static_cast<int>(a), static_cast<int>(b)};
            }
        }
    }
    r.passive = !r.coherence && !r.inversion;
    return r;
}

SrtReport srt_verify(const Schedule& s, const GeneratorSet& g, std::size_t n_permutations,
                     const Vec& rho0, std::uint64_t seed) {
    validate_schedule(s);
    const auto base = cycle_ledger(s, g, rho0);
    const std::size_t bins = positive_half(s).size();
    std::vector<std::size_t> perm(bins);
    std::mt19937_64 rng(seed);
    SrtReport r;
    r.s = action(s, g);
    r.permutations = n_permutations;
    for (std::size_t k = 0; k < n_permutations; ++k) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto l = cycle_ledger(symmetric_rearrange(s, perm), g, rho0);
        r.max_dw = std::max(r.max_dw, std::abs(l.work - base.work));
        r.max_dqc = std::max(r.max_dqc, std::abs(l.heat_cold - base.heat_cold));
        r.max_dqh = std::max(r.max_dqh, std::abs(l.heat_hot - base.heat_hot));
    }
    return r;
}

StructuralReport structural_identities(const EngineModel& model, double tau) {
    return structural_identities(model, build_generators(model), tau);
}

StructuralReport structural_identities(const EngineModel& model, const GeneratorSet& g,
                                       double tau) {
    const Eigen::Index n = g.h0.rows();
    StructuralReport r;

    // H^H |H> = <H| H^H = 0, for the bare Hamiltonian and the drive
    for (const Op& h : {g.h0, build_drive_hamiltonian(model)}) {
        const Superop hs = hamiltonian_superop(h);
        const Vec hv = vec<double>(h);
        r.annihilation =
            std::max(r.annihilation, (hs * hv).norm() + (hv.adjoint() * hs).norm());
    }
    const Superop& drive = g[Channel::drive];
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            r.population_block = std::max(
                r.population_block,
                std::abs(drive(liouville_index(i, i, n), liouville_index(k, k, n))));
        }
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        r.trace_preservation = std::max(r.trace_preservation, trace_defect(g.gens[c]));
    }
    for (auto type : all_engine_types()) {
        const Superop k = cycle_propagator(make_schedule(type, tau), g);
        const auto c = check_cptp(k);
        r.cptp = std::max({r.cptp, c.trace_defect, c.choi_hermiticity,
                           std::max(0.0, -c.choi_min_eigenvalue)});
    }
    return r;
}

}  // namespace qhe
