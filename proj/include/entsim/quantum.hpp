#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <sstream>

#include "entsim/errors.hpp"

// Two-qubit state kernel. Basis ordering is {|00>,|01>,|10>,|11>} with qubit A
// the left factor, so basis index b = 2*n_A + n_B where n=1 means "excited".
// sigma_minus = |0><1| per qubit, sigma_z|0> = +|0>.

namespace entsim {

template <class Scalar>
using PairMatrix = Eigen::Matrix<std::complex<Scalar>, 4, 4>;
template <class Scalar>
using PairVector = Eigen::Matrix<std::complex<Scalar>, 4, 1>;

using Matrix4c = PairMatrix<double>;
using Vector4c = PairVector<double>;

inline constexpr int kQubitA = 0;
inline constexpr int kQubitB = 1;

inline constexpr int excitation(int basis, int qubit) {
    return qubit == kQubitA ? (basis >> 1) & 1 : basis & 1;
}

// |Psi-> = (|01> - |10>)/sqrt(2)
template <class Scalar = double>
PairVector<Scalar> bell_singlet_vector() {
    PairVector<Scalar> v = PairVector<Scalar>::Zero();
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    v(1) = std::complex<Scalar>(r, 0);
    v(2) = std::complex<Scalar>(-r, 0);
    return v;
}

// Lowering operator on one qubit of the pair, embedded in the 4-dim space.
template <class Scalar = double>
PairMatrix<Scalar> lowering_on(int qubit) {
    PairMatrix<Scalar> m = PairMatrix<Scalar>::Zero();
    const int mask = qubit == kQubitA ? 2 : 1;
    for (int b = 0; b < 4; ++b)
        if (b & mask) m(b ^ mask, b) = std::complex<Scalar>(1, 0);
    return m;
}

template <class Scalar = double>
PairMatrix<Scalar> pauli_z_on(int qubit) {
    PairMatrix<Scalar> m = PairMatrix<Scalar>::Zero();
    for (int b = 0; b < 4; ++b)
        m(b, b) = std::complex<Scalar>(excitation(b, qubit) ? -1 : 1, 0);
    return m;
}

struct StateTolerances {
    double hermiticity = 1e-12;  // max |rho - rho^dagger|
    double trace      = 1e-12;   // |tr(rho) - 1|
    double positivity = 1e-10;   // eigenvalues >= -positivity
};

// Density matrix of the memory pair. Construction helpers produce exact states;
// validate() is the gate every numerically-produced state must pass.
struct TwoQubitState {
    Matrix4c rho;

    static TwoQubitState singlet() {
        const Vector4c v = bell_singlet_vector<double>();
        return {v * v.adjoint()};
    }

    static TwoQubitState maximally_mixed() {
        return {Matrix4c::Identity() * 0.25};
    }

    static TwoQubitState from_pure(const Vector4c& psi) {
        return {psi * psi.adjoint()};
    }

    void validate(const StateTolerances& tol = {}) const {
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        if (herm > tol.hermiticity) {
            std::ostringstream os;
            os << "state failed hermiticity check: max deviation " << herm;
            throw numerical_error(os.str());
        }
        const double tr_err = std::abs(rho.trace() - std::complex<double>(1, 0));
        if (tr_err > tol.trace) {
            std::ostringstream os;
            os << "state failed trace check: |tr - 1| = " << tr_err;
            throw numerical_error(os.str());
        }
        // Hermiticity holds to tol, so symmetrize and use the self-adjoint solver.
        const Matrix4c sym = 0.5 * (rho + rho.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix4c> es(sym, Eigen::EigenvaluesOnly);
        const double min_ev = es.eigenvalues().minCoeff();
        if (min_ev < -tol.positivity) {
            std::ostringstream os;
            os << "state failed positivity check: min eigenvalue " << min_ev;
            throw numerical_error(os.str());
        }
    }
};

// <Psi-| rho |Psi-> ; the imaginary part vanishes for Hermitian rho and is
// checked against the hermiticity tolerance.
inline double fidelity(const TwoQubitState& state,
                       const StateTolerances& tol = {}) {
    const Vector4c v = bell_singlet_vector<double>();
    const std::complex<double> f = (v.adjoint() * state.rho * v)(0, 0);
    if (std::abs(f.imag()) > tol.hermiticity) {
        std::ostringstream os;
        os << "fidelity has non-negligible imaginary part " << f.imag();
        throw numerical_error(os.str());
    }
    return f.real();
}

// |<Psi-|psi>|^2 for trajectory (pure-state) samples
template <class Scalar>
Scalar pure_fidelity(const PairVector<Scalar>& psi) {
    const std::complex<Scalar> amp =
        (bell_singlet_vector<Scalar>().adjoint() * psi)(0, 0);
    return std::norm(amp);
}

} // namespace entsim
