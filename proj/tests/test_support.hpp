// Random generators and independent reference computations shared by tests.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qhe/thermodynamics.hpp"

namespace qhe::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline Op random_matrix(Rng& rng, int n) {
    std::normal_distribution<double> g;
    Op m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = cd(g(rng), g(rng));
        }
    }
    return m;
}

inline Op random_hermitian(Rng& rng, int n) {
    const Op m = random_matrix(rng, n);
    return (m + m.adjoint()) * 0.5;
}

inline Vec random_density(Rng& rng, int n) {
    const Op m = random_matrix(rng, n);
    Op rho = m * m.adjoint();
    rho /= rho.trace().real();
    return vec<double>(rho);
}

// Lindblad generator with a random Hamiltonian part and `jumps` random jump operators.
inline Superop random_lindblad(Rng& rng, int n, int jumps) {
    std::vector<Op> ops;
    for (int k = 0; k < jumps; ++k) {
        ops.push_back(random_matrix(rng, n) * 0.5);
    }
    return hamiltonian_superop(random_hermitian(rng, n)) + dissipator_superop<double>(ops, n);
}

// Four-level engine with random (not necessarily symmetric) levels, resonant drive.
inline EngineModel random_model(Rng& rng) {
    EngineModel m = EngineModel::defaults();
    const double e0 = uniform(rng, -3, -1);
    const double gap_w = uniform(rng, 0.5, 2.5);
    const double e1 = e0 + gap_w;
    const double e2 = e1 + uniform(rng, 0.2, 2.0);
    const double e3 = e2 + gap_w;
    m.levels = {e0, e1, e2, e3};
    m.omega = gap_w;
    m.t_cold = uniform(rng, 0.3, 2.0);
    m.t_hot = m.t_cold * uniform(rng, 1.5, 6.0);
    m.gamma_hot = log_uniform(rng, 1e-5, 1e-1);
    m.gamma_cold = log_uniform(rng, 1e-5, 1e-1);
    m.epsilon = log_uniform(rng, 1e-5, 1e-1);
    return m;
}

// d rho / dt in Hilbert space: -i [H, rho] + sum_k A rho A^+ - {A^+A, rho} / 2.
inline Op lindblad_rhs(const Op& h, const std::vector<Op>& jumps, const Op& rho) {
    Op out = cd(0, -1) * (h * rho - rho * h);
    for (const auto& a : jumps) {
        const Op ad = a.adjoint();
        out += a * rho * ad - 0.5 * (ad * a * rho + rho * ad * a);
    }
    return out;
}

// Null vector of a generator from the SVD, trace-normalized.
inline Vec svd_null_vector(const Superop& g) {
    Eigen::JacobiSVD<Superop> svd(g, Eigen::ComputeFullV);
    Vec v = svd.matrixV().col(g.cols() - 1);
    const Op m = unvec(v);
    return v / m.trace();
}

// Scaling and squaring with a truncated Taylor series.
inline Superop taylor_exp(const Superop& a) {
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    while (std::ldexp(norm, -squarings) > 0.25) {
        ++squarings;
    }
    const Superop x = a * std::ldexp(1.0, -squarings);
    Superop term = Superop::Identity(a.rows(), a.cols());
    Superop sum = term;
    for (int k = 1; k <= 18; ++k) {
        term = term * x / double(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) {
        sum = sum * sum;
    }
    return sum;
}

inline double max_abs(const Vec& v) {
    return v.cwiseAbs().maxCoeff();
}

}  // namespace qhe::testing
