// engine_model.cpp: Four-level engine construction and regime checks.

#include "qhe/engine_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace qhe {

EngineModel EngineModel::four_level(double de_hot, double de_cold, double t_hot, double t_cold,
                                    double gamma_hot, double gamma_cold, double epsilon) {
    EngineModel m;
    m.levels = {-de_hot / 2, -de_cold / 2, de_cold / 2, de_hot / 2};
    m.hot_manifold = {0, 3};
    m.cold_manifold = {1, 2};
    m.t_hot = t_hot;
    m.t_cold = t_cold;
    m.gamma_hot = gamma_hot;
    m.gamma_cold = gamma_cold;
    m.epsilon = epsilon;
    m.omega = (de_hot - de_cold) / 2;
    m.drive_pairs = {{0, 1, 1}, {2, 3, 2}};
    return m;
}

EngineModel EngineModel::defaults() {
    return four_level(4.0, 1.0, 5.0, 1.0, 5e-4, 5e-4, 5e-4);
}

double EngineModel::drive_period() const {
    return 2 * std::numbers::pi / omega;
}

void EngineModel::validate() const {
    const int n = dim();
    if (n < 2) {
        throw ModelError("model needs at least two levels");
    }
    for (double e : levels) {
        if (!std::isfinite(e)) {
            throw ModelError("level energies must be finite");
        }
    }
    if (!(t_hot > t_cold && t_cold > 0)) {
        throw ModelError("temperatures must satisfy T_h > T_c > 0");
    }
    if (!(gamma_hot >= 0 && gamma_cold >= 0 && std::isfinite(gamma_hot) &&
          std::isfinite(gamma_cold))) {
        throw ModelError("bath rates must be finite and non-negative");
    }
    if (!(epsilon >= 0 && std::isfinite(epsilon))) {
        throw ModelError("drive amplitude must be finite and non-negative");
    }
    if (!std::isfinite(omega) || omega < 0) {
        throw ModelError("drive frequency must be finite and non-negative");
    }
    auto check_manifold = [n](const std::vector<int>& mf, const char* name) {
        if (mf.empty()) {
            throw ModelError(std::string(name) + " manifold is empty");
        }
        std::set<int> seen;
        for (int k : mf) {
            if (k < 0 || k >= n) {
                throw ModelError(std::string(name) + " manifold index out of range");
            }
            if (!seen.insert(k).second) {
                throw ModelError(std::string(name) + " manifold has a repeated level");
            }
        }
    };
    check_manifold(hot_manifold, "hot");
    check_manifold(cold_manifold, "cold");
    int shared = 0;
    for (int k : hot_manifold) {
        shared += static_cast<int>(std::count(cold_manifold.begin(), cold_manifold.end(), k));
    }
    if (shared > 1) {
        throw ModelError("hot and cold manifolds may share at most one level");
    }
    for (const auto& p : drive_pairs) {
        if (p.lower < 0 || p.lower >= n || p.upper < 0 || p.upper >= n || p.lower == p.upper) {
            throw ModelError("drive pair indices invalid");
        }
        if (p.field != 1 && p.field != 2) {
            throw ModelError("drive pair field must be 1 or 2");
        }
    }
}

std::string to_string(Channel c) {
    switch (c) {
        case Channel::cold: return "cold";
        case Channel::hot: return "hot";
        case Channel::drive: return "drive";
        case Channel::drive1: return "drive1";
        case Channel::drive2: return "drive2";
        case Channel::dephasing: return "dephasing";
    }
    return "unknown";
}

void GeneratorSet::set(Channel c, Superop g) {
    const auto idx = static_cast<std::size_t>(c);
    norms[idx] = spectral_norm(g);
    gens[idx] = std::move(g);
}

Op build_h0(const EngineModel& model) {
    const int n = model.dim();
    Op h = Op::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        h(k, k) = model.levels[static_cast<std::size_t>(k)];
    }
    return h;
}

Op build_drive_hamiltonian(const EngineModel& model, DriveField field) {
    const int n = model.dim();
    Op h = Op::Zero(n, n);
    for (const auto& p : model.drive_pairs) {
        if (field == DriveField::first && p.field != 1) continue;
        if (field == DriveField::second && p.field != 2) continue;
        h(p.lower, p.upper) += model.epsilon;
        h(p.upper, p.lower) += model.epsilon;
    }
    return h;
}

Superop build_drive_rwa(const EngineModel& model, DriveField field) {
    const Op half = 0.5 * build_drive_hamiltonian(model, field);
    return hamiltonian_superop<double>(half);
}

std::vector<Op> bath_jump_operators(const EngineModel& model, Bath which) {
    const bool hot = which == Bath::hot;
    const auto& manifold = hot ? model.hot_manifold : model.cold_manifold;
    const double gamma = hot ? model.gamma_hot : model.gamma_cold;
    const double temp = hot ? model.t_hot : model.t_cold;
    const int n = model.dim();

    std::vector<Op> jumps;
    for (std::size_t x = 0; x < manifold.size(); ++x) {
        for (std::size_t y = x + 1; y < manifold.size(); ++y) {
            int a = manifold[x];
            int b = manifold[y];
            if (model.levels[static_cast<std::size_t>(a)] > model.levels[static_cast<std::size_t>(b)]) {
                std::swap(a, b);
            }
            const double gap = model.levels[static_cast<std::size_t>(b)] -
                               model.levels[static_cast<std::size_t>(a)];
            Op up = Op::Zero(n, n);
            up(b, a) = std::sqrt(gamma) * std::exp(-gap / (2 * temp));
            Op down = Op::Zero(n, n);
            down(a, b) = std::sqrt(gamma);
            jumps.push_back(std::move(up));
            jumps.push_back(std::move(down));
        }
    }
    return jumps;
}

Superop build_bath(const EngineModel& model, Bath which) {
    const auto jumps = bath_jump_operators(model, which);
    return dissipator_superop<double>(jumps, model.dim());
}

Vec gibbs_state(const std::vector<double>& levels, double temperature,
                const std::vector<int>& support) {
    if (!(temperature > 0)) {
        throw ModelError("gibbs_state: temperature must be positive");
    }
    if (support.empty()) {
        throw ModelError("gibbs_state: empty support");
    }
    const int n = static_cast<int>(levels.size());
    double e_min = std::numeric_limits<double>::infinity();
    for (int k : support) {
        if (k < 0 || k >= n) {
            throw ModelError("gibbs_state: support index out of range");
        }
        e_min = std::min(e_min, levels[static_cast<std::size_t>(k)]);
    }
    Op rho = Op::Zero(n, n);
    double z = 0;
    for (int k : support) {
        const double w = std::exp(-(levels[static_cast<std::size_t>(k)] - e_min) / temperature);
        rho(k, k) += w;
        z += w;
    }
    rho /= z;
    return vec<double>(rho);
}

GeneratorSet build_generators(const EngineModel& model) {
    model.validate();
    GeneratorSet g;
    g.h0 = build_h0(model);
    g.set(Channel::cold, build_bath(model, Bath::cold));
    g.set(Channel::hot, build_bath(model, Bath::hot));
    g.set(Channel::drive, build_drive_rwa(model, DriveField::both));
    g.set(Channel::drive1, build_drive_rwa(model, DriveField::first));
    g.set(Channel::drive2, build_drive_rwa(model, DriveField::second));
    const int n2 = model.dim() * model.dim();
    g.set(Channel::dephasing, Superop::Zero(n2, n2));
    return g;
}

std::vector<RegimeWarning> validate_regime(const EngineModel& model, const RegimeParams& params) {
    std::vector<RegimeWarning> out;
    const double inf = std::numeric_limits<double>::infinity();

    const double gamma_min = std::min(model.gamma_hot, model.gamma_cold);
    if (model.epsilon > 0) {
        const double r = gamma_min > 0 ? model.epsilon / gamma_min : inf;
        if (r > kRegimeRatioLimit) {
            out.push_back({"local_lindblad", r, "epsilon << gamma_c, gamma_h violated"});
        }
        const double r_rwa = model.omega > 0 ? model.epsilon / model.omega : inf;
        if (r_rwa > kRegimeRatioLimit) {
            out.push_back({"rwa", r_rwa, "epsilon << omega violated"});
        }
    } else if (model.omega <= 0) {
        out.push_back({"rwa", inf, "drive frequency is zero (degenerate gaps)"});
    }

    double min_gap = inf;
    auto manifold_gaps = [&](const std::vector<int>& mf) {
        for (std::size_t x = 0; x < mf.size(); ++x) {
            for (std::size_t y = x + 1; y < mf.size(); ++y) {
                const double gap = std::abs(model.levels[static_cast<std::size_t>(mf[x])] -
                                            model.levels[static_cast<std::size_t>(mf[y])]);
                min_gap = std::min(min_gap, gap);
            }
        }
    };
    manifold_gaps(model.hot_manifold);
    manifold_gaps(model.cold_manifold);

    if (params.drive_periods_per_sixth) {
        const double m = *params.drive_periods_per_sixth;
        const double needed = min_gap > 0 ? model.omega / min_gap : inf;
        const double r = m > 0 ? needed / m : inf;
        if (r > kRegimeRatioLimit) {
            out.push_back({"secular", r, "m >> omega / min(dE_h, dE_c) violated"});
        }
    }

    for (const auto& p : model.drive_pairs) {
        const double gap = std::abs(model.levels[static_cast<std::size_t>(p.upper)] -
                                    model.levels[static_cast<std::size_t>(p.lower)]);
        const double detune = std::abs(gap - model.omega);
        if (detune > 1e-12 * std::max(1.0, model.omega)) {
            out.push_back({"resonance", model.omega > 0 ? detune / model.omega : inf,
                           "drive pair gap differs from omega; the RWA drive assumes resonance"});
        }
    }
    // The stochastic power bound is evaluated as sqrt(tr H0^2 - (tr H0)^2), which
    // is only a shift-invariant energy scale for a traceless H0.
    double tr = 0;
    double tr2 = 0;
    for (double e : model.levels) {
        tr += e;
        tr2 += e * e;
    }
    if (std::abs(tr) > 1e-12 * std::sqrt(tr2)) {
        out.push_back({"traceless", std::abs(tr) / std::sqrt(tr2),
                       "H0 is not traceless; the stochastic power bound depends on the energy zero"});
    }
    return out;
}

}  // namespace qhe
