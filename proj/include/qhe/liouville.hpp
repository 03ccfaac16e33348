// liouville.hpp: Liouville-space machinery: vectorization, superoperators,
// norms, inner products and matrix-exponential propagation.
//
// Conventions used throughout the library:
//   * column stacking, |rho>_(i + N*j) = rho(i, j) (0-based);
//   * generators G act as  i d/dt |rho> = G |rho>,  so propagators are
//     K(t) = exp(-i G t) and dissipators carry an explicit factor i.

#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qhe {

template <typename Real>
using Complex = std::complex<Real>;

/// Dense N x N operator in the fixed energy basis.
template <typename Real>
using HilbertOperator = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

/// Vectorized operator of length N^2.
template <typename Real>
using LiouvilleVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

/// N^2 x N^2 linear map on Liouville space (generator or propagator).
template <typename Real>
using SuperOperator = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using cd = Complex<double>;
using Op = HilbertOperator<double>;
using Vec = LiouvilleVector<double>;
using Superop = SuperOperator<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Position of matrix element (i, j) of an N x N operator in its Liouville vector.
constexpr Eigen::Index liouville_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) noexcept {
    return i + n * j;
}

/// Integer square root of a Liouville dimension; throws if it is not a perfect square.
inline Eigen::Index hilbert_dim(Eigen::Index liouville_dim) {
    auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(liouville_dim))));
    if (n * n != liouville_dim || n < 1) {
        throw DimensionError("Liouville dimension " + std::to_string(liouville_dim) +
                             " is not a perfect square");
    }
    return n;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <typename Real>
LiouvilleVector<Real> vec(const HilbertOperator<Real>& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("vec: operator is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
    const Eigen::Index n = m.rows();
    LiouvilleVector<Real> v(n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            v(liouville_index(i, j, n)) = m(i, j);
        }
    }
    return v;
}

template <typename Real>
HilbertOperator<Real> unvec(const LiouvilleVector<Real>& v) {
    const Eigen::Index n = hilbert_dim(v.size());
    HilbertOperator<Real> m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, j) = v(liouville_index(i, j, n));
        }
    }
    return m;
}

/// Hilbert-Schmidt inner product <A|B> = tr(A^dagger B).
template <typename Real>
Complex<Real> hs_inner(const LiouvilleVector<Real>& a, const LiouvilleVector<Real>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("hs_inner: length mismatch");
    }
    return a.dot(b);  // Eigen's dot conjugates the left operand
}

/// |I>, the vectorized identity; <I|rho> is the trace.
template <typename Real>
LiouvilleVector<Real> trace_functional(Eigen::Index n) {
    return vec<Real>(HilbertOperator<Real>::Identity(n, n));
}

template <typename Real>
Real hermiticity_error(const HilbertOperator<Real>& m) {
    return (m - m.adjoint()).norm();
}

template <typename Real>
bool is_hermitian(const HilbertOperator<Real>& m, Real rel_tol = Real(1e-12)) {
    if (m.rows() != m.cols()) {
        return false;
    }
    return hermiticity_error(m) <= rel_tol * std::max(m.norm(), Real(1));
}

/// Largest singular value. Computed with a full SVD; the operands here are at
/// most a few tens of rows.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real spectral_norm(
    const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (!m.allFinite()) {
        throw NumericalError("spectral_norm: non-finite entries");
    }
    if (m.size() == 0) {
        return Real(0);
    }
    using Plain = typename Derived::PlainObject;
    Eigen::JacobiSVD<Plain> svd(m.eval());
    return svd.singularValues()(0);
}

/// Superoperator of the commutator with H:  G|rho> = |H rho - rho H>.
/// Elementwise G_(ij),(mn) = H_im delta_jn - H_nj delta_im, which under column
/// stacking is  I (x) H - H^T (x) I.
template <typename Real>
SuperOperator<Real> hamiltonian_superop(const HilbertOperator<Real>& h,
                                        Real rel_tol = Real(1e-12)) {
    if (h.rows() != h.cols()) {
        throw DimensionError("hamiltonian_superop: operator not square");
    }
    if (!h.allFinite()) {
        throw NumericalError("hamiltonian_superop: non-finite entries");
    }
    if (!is_hermitian(h, rel_tol)) {
        throw std::invalid_argument("hamiltonian_superop: operator is not Hermitian");
    }
    const Eigen::Index n = h.rows();
    const HilbertOperator<Real> id = HilbertOperator<Real>::Identity(n, n);
    SuperOperator<Real> g = Eigen::kroneckerProduct(id, h).eval();
    g -= Eigen::kroneckerProduct(h.transpose().eval(), id).eval();
    return g;
}

/// Lindblad dissipator in the i d/dt convention:
///   G|rho> = i |sum_k A rho A^dag - 1/2 {A^dag A, rho}>.
template <typename Real>
SuperOperator<Real> dissipator_superop(std::span<const HilbertOperator<Real>> jumps,
                                       Eigen::Index n) {
    const Eigen::Index n2 = n * n;
    SuperOperator<Real> d = SuperOperator<Real>::Zero(n2, n2);
    const HilbertOperator<Real> id = HilbertOperator<Real>::Identity(n, n);
    for (const auto& a : jumps) {
        if (a.rows() != n || a.cols() != n) {
            throw DimensionError("dissipator_superop: jump operator is " +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                 ", expected " + std::to_string(n) + "x" + std::to_string(n));
        }
        const HilbertOperator<Real> ada = a.adjoint() * a;
        d += Eigen::kroneckerProduct(a.conjugate().eval(), a).eval();
        d -= Real(0.5) * Eigen::kroneckerProduct(id, ada).eval();
        d -= Real(0.5) * Eigen::kroneckerProduct(ada.transpose().eval(), id).eval();
    }
    return Complex<Real>(0, 1) * d;
}

/// exp(-i G t). Scaling and squaring with a Pade approximant.
template <typename Real>
SuperOperator<Real> propagate(const SuperOperator<Real>& g, Real t) {
    if (g.rows() != g.cols()) {
        throw DimensionError("propagate: generator not square");
    }
    if (!(t >= Real(0))) {
        throw std::invalid_argument("propagate: negative or NaN duration");
    }
    if (!g.allFinite()) {
        throw NumericalError("propagate: non-finite generator");
    }
    if (t == Real(0)) {
        return SuperOperator<Real>::Identity(g.rows(), g.cols());
    }
    const SuperOperator<Real> arg = Complex<Real>(0, -t) * g;
    SuperOperator<Real> k = arg.exp();
    if (!k.allFinite()) {
        throw NumericalError("propagate: matrix exponential overflowed");
    }
    return k;
}

/// tr(A rho) for Hermitian A. Throws if the imaginary part exceeds tolerance,
/// which indicates a corrupted (non-Hermitian) state.
template <typename Real>
Real expectation(const HilbertOperator<Real>& a, const LiouvilleVector<Real>& rho,
                 Real tol = Real(1e-12)) {
    const Complex<Real> value = hs_inner(vec(a), rho);
    const Real scale = std::max(Real(1), a.norm());
    if (std::abs(value.imag()) > tol * scale) {
        throw NumericalError("expectation: imaginary part " + std::to_string(value.imag()) +
                             " exceeds tolerance");
    }
    return value.real();
}

/// Largest |<I|G>_k|: zero for trace-preserving generators.
template <typename Real>
Real trace_defect(const SuperOperator<Real>& g) {
    const Eigen::Index n = hilbert_dim(g.rows());
    const LiouvilleVector<Real> id = trace_functional<Real>(n);
    return (id.adjoint() * g).cwiseAbs().maxCoeff();
}

template <typename Real>
struct DensityCheck {
    Real trace_error{};
    Real hermiticity_error{};
    Real min_eigenvalue{};

    bool ok(Real structural_tol = Real(1e-12), Real positivity_tol = Real(1e-10)) const {
        return trace_error <= structural_tol && hermiticity_error <= structural_tol &&
               min_eigenvalue >= -positivity_tol;
    }
};

template <typename Real>
DensityCheck<Real> check_density(const LiouvilleVector<Real>& rho) {
    const HilbertOperator<Real> m = unvec(rho);
    DensityCheck<Real> c;
    c.trace_error = std::abs(m.trace() - Complex<Real>(1));
    c.hermiticity_error = hermiticity_error(m);
    const HilbertOperator<Real> herm = (m + m.adjoint()) * Real(0.5);
    Eigen::SelfAdjointEigenSolver<HilbertOperator<Real>> es(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

/// Choi matrix of the map |rho> -> K|rho>; block (i, j) holds K(|i><j|).
template <typename Real>
HilbertOperator<Real> choi_matrix(const SuperOperator<Real>& k) {
    const Eigen::Index n = hilbert_dim(k.rows());
    HilbertOperator<Real> c(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const LiouvilleVector<Real> col = k.col(liouville_index(i, j, n));
            c.block(i * n, j * n, n, n) = unvec(col);
        }
    }
    return c;
}

template <typename Real>
struct CptpCheck {
    Real trace_defect{};
    Real choi_hermiticity{};
    Real choi_min_eigenvalue{};

    bool ok(Real tol = Real(1e-12)) const {
        return trace_defect <= tol && choi_hermiticity <= tol && choi_min_eigenvalue >= -tol;
    }
};

template <typename Real>
CptpCheck<Real> check_cptp(const SuperOperator<Real>& k) {
    CptpCheck<Real> r;
    const Eigen::Index n = hilbert_dim(k.rows());
    const LiouvilleVector<Real> id = trace_functional<Real>(n);
    r.trace_defect = (id.adjoint() * k - id.adjoint()).cwiseAbs().maxCoeff();
    const HilbertOperator<Real> c = choi_matrix(k);
    r.choi_hermiticity = hermiticity_error(c);
    const HilbertOperator<Real> herm = (c + c.adjoint()) * Real(0.5);
    Eigen::SelfAdjointEigenSolver<HilbertOperator<Real>> es(herm, Eigen::EigenvaluesOnly);
    r.choi_min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

/// Pure state |k><k| as a density vector.
template <typename Real>
LiouvilleVector<Real> basis_state(Eigen::Index k, Eigen::Index n) {
    if (k < 0 || k >= n) {
        throw DimensionError("basis_state: level index out of range");
    }
    LiouvilleVector<Real> v = LiouvilleVector<Real>::Zero(n * n);
    v(liouville_index(k, k, n)) = Complex<Real>(1);
    return v;
}

template <typename Real>
LiouvilleVector<Real> maximally_mixed(Eigen::Index n) {
    return trace_functional<Real>(n) / Real(n);
}

/// Orthogonal projection onto the population (diagonal) subspace.
template <typename Real>
SuperOperator<Real> population_projector(Eigen::Index n) {
    SuperOperator<Real> p = SuperOperator<Real>::Zero(n * n, n * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto a = liouville_index(k, k, n);
        p(a, a) = Complex<Real>(1);
    }
    return p;
}

}  // namespace qhe
