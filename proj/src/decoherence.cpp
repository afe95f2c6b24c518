#include "entsim/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "entsim/errors.hpp"

namespace entsim {

void MemoryTechnology::validate() const {
    if (std::isnan(t1_s) || std::isnan(t2_s) || t1_s <= 0.0 || t2_s <= 0.0)
        throw std::invalid_argument("memory technology '" + id +
                                    "': T1 and T2 must be positive");
}

double relaxation_rate(const MemoryTechnology& tech) {
    tech.validate();
    return std::isinf(tech.t1_s) ? 0.0 : 1.0 / tech.t1_s;
}

double dephasing_rate(const MemoryTechnology& tech, DephasingConvention conv) {
    tech.validate();
    if (std::isinf(tech.t2_s)) return 0.0;
    const double base = 1.0 / tech.t2_s;
    return conv == DephasingConvention::t2_literal ? base : base / 4.0;
}

void ExposureIntervals::validate() const {
    if (!(tau_a_s >= 0.0) || !(tau_b_s >= 0.0) || std::isnan(tau_a_s) || std::isnan(tau_b_s))
        throw std::invalid_argument("exposure intervals must be >= 0");
}

double closed_form_fidelity(const ExposureIntervals& tau,
                            const MemoryTechnology& tech,
                            DephasingConvention conv) {
    tau.validate();
    const double g1 = relaxation_rate(tech);
    const double gphi = dephasing_rate(tech, conv);
    const double pop = 0.25 * (std::exp(-g1 * tau.tau_a_s) + std::exp(-g1 * tau.tau_b_s));
    const double coh = 0.5 * std::exp(-(0.5 * g1 + 2.0 * gphi) * (tau.tau_a_s + tau.tau_b_s));
    return pop + coh;
}

double default_dt_max(const MemoryTechnology& tech) {
    tech.validate();
    const double shortest = std::min(tech.t1_s, tech.t2_s);
    return std::isinf(shortest) ? std::numeric_limits<double>::infinity()
                                : shortest / 1000.0;
}

namespace {

using Matrix16c = Eigen::Matrix<std::complex<double>, 16, 16>;
using Vector16c = Eigen::Matrix<std::complex<double>, 16, 1>;

Matrix16c kron4(const Matrix4c& a, const Matrix4c& b) {
    Matrix16c out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return out;
}

// D(L)rho = L rho L^+ - 1/2 {L^+L, rho}, vectorized column-major:
// vec(A X B) = (B^T (x) A) vec(X)
Matrix16c dissipator(const Matrix4c& L) {
    const Matrix4c LdL = L.adjoint() * L;
    return kron4(L.conjugate(), L) -
           0.5 * (kron4(Matrix4c::Identity(), LdL) +
                  kron4(LdL.transpose(), Matrix4c::Identity()));
}

// Generator for the phase where the given qubits sit in memory. The pair
// Hamiltonian is trivial (identity), so only the dissipators act.
Matrix16c phase_generator(bool a_active, bool b_active, double g1, double gphi) {
    Matrix16c gen = Matrix16c::Zero();
    auto add_qubit = [&](int q) {
        if (g1 > 0.0) gen += dissipator(std::sqrt(g1) * lowering_on<double>(q));
        if (gphi > 0.0) gen += dissipator(std::sqrt(gphi) * pauli_z_on<double>(q));
    };
    if (a_active) add_qubit(kQubitA);
    if (b_active) add_qubit(kQubitB);
    return gen;
}

struct Phase {
    double duration;
    bool a_active;
    bool b_active;
};

// The later-stored qubit's partner idles alone first, then both decay.
std::vector<Phase> schedule(const ExposureIntervals& tau) {
    std::vector<Phase> phases;
    const double solo = std::abs(tau.tau_a_s - tau.tau_b_s);
    if (solo > 0.0)
        phases.push_back({solo, tau.tau_a_s > tau.tau_b_s, tau.tau_b_s > tau.tau_a_s});
    const double both = std::min(tau.tau_a_s, tau.tau_b_s);
    if (both > 0.0) phases.push_back({both, true, true});
    return phases;
}

void rk4_advance(Vector16c& v, const Matrix16c& gen, double duration, long steps) {
    const double dt = duration / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
        const Vector16c k1 = gen * v;
        const Vector16c k2 = gen * (v + 0.5 * dt * k1);
        const Vector16c k3 = gen * (v + 0.5 * dt * k2);
        const Vector16c k4 = gen * (v + dt * k3);
        v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

} // namespace

TwoQubitState lindblad_propagate(const TwoQubitState& initial,
                                 const ExposureIntervals& tau,
                                 const MemoryTechnology& tech,
                                 DephasingConvention conv,
                                 const IntegrationOptions& opts) {
    initial.validate(opts.state_tol);
    const double g1 = relaxation_rate(tech);
    const double gphi = dephasing_rate(tech, conv);
    double dt_max = opts.dt_max_s.value_or(default_dt_max(tech));
    if (!(dt_max > 0.0)) throw std::invalid_argument("lindblad_propagate: dt_max must be > 0");

    const auto phases = schedule(tau);

    auto integrate = [&](int refine) {
        Vector16c v = Eigen::Map<const Vector16c>(initial.rho.data());
        for (const auto& ph : phases) {
            const Matrix16c gen = phase_generator(ph.a_active, ph.b_active, g1, gphi);
            double dt = dt_max;
            if (std::isinf(dt)) dt = ph.duration;  // no finite rate: any step is exact
            long steps = static_cast<long>(std::ceil(ph.duration / dt)) * refine;
            steps = std::max<long>(steps, refine);
            rk4_advance(v, gen, ph.duration, steps);
        }
        TwoQubitState out;
        out.rho = Eigen::Map<const Matrix4c>(v.data());
        return out;
    };

    TwoQubitState coarse = integrate(1);
    TwoQubitState fine = integrate(2);
    const double diff = (coarse.rho - fine.rho).cwiseAbs().maxCoeff();
    if (diff > opts.rk4_tolerance) {
        std::ostringstream os;
        os << "lindblad_propagate: step-halving check failed (difference " << diff
           << " > " << opts.rk4_tolerance << "); reduce dt_max";
        throw numerical_error(os.str());
    }
    fine.validate(opts.state_tol);
    return fine;
}

double timeout_from_threshold(double f_th, const MemoryTechnology& tech) {
    tech.validate();
    if (std::isnan(f_th) || f_th > 1.0)
        throw std::invalid_argument("fidelity threshold must be <= 1");
    if (f_th <= 0.5)
        throw std::domain_error(
            "fidelity threshold <= 0.5 never expires: dephasing alone cannot cross it");
    if (std::isinf(tech.t2_s))
        throw std::domain_error("timeout undefined for infinite T2");
    return -tech.t2_s * std::log(2.0 * f_th - 1.0);
}

std::optional<double> max_tolerable_latency(double f_th,
                                            const MemoryTechnology& tech,
                                            double delta_tq_s,
                                            DephasingConvention conv) {
    tech.validate();
    if (std::isnan(f_th) || f_th > 1.0)
        throw std::invalid_argument("fidelity threshold must be <= 1");
    if (!(delta_tq_s >= 0.0)) delta_tq_s = -delta_tq_s;

    const double g1 = relaxation_rate(tech);
    const double gphi = dephasing_rate(tech, conv);
    auto fidelity_at = [&](double t_c) {
        return closed_form_fidelity({delta_tq_s + t_c, t_c}, tech, conv);
    };

    // t -> inf limit: with relaxation everything drains to |00> (F -> 0);
    // pure dephasing keeps the one-excitation populations (F -> 1/2); with no
    // decay at all F stays 1.
    const double asymptote = g1 > 0.0 ? 0.0 : (gphi > 0.0 ? 0.5 : 1.0);
    if (f_th <= asymptote) return std::nullopt;  // always satisfiable
    if (fidelity_at(0.0) < f_th) return 0.0;     // skew alone already violates it

    double lo = 0.0;
    double hi = std::max({delta_tq_s, std::isinf(tech.t2_s) ? 0.0 : tech.t2_s,
                          std::isinf(tech.t1_s) ? 0.0 : tech.t1_s, 1e-9});
    int guard = 0;
    while (fidelity_at(hi) >= f_th) {
        hi *= 2.0;
        if (++guard > 200)
            throw numerical_error("max_tolerable_latency: failed to bracket the threshold");
    }
    // bisect to relative precision 1e-9
    for (int i = 0; i < 200 && (hi - lo) > 1e-9 * std::max(hi, 1e-12); ++i) {
        const double mid = 0.5 * (lo + hi);
        (fidelity_at(mid) >= f_th ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

const std::vector<MemoryTechnology>& technology_catalog() {
    static const std::vector<MemoryTechnology> catalog = {
        {"ion-trap-yb171", "Trapped ion ¹⁷¹Yb⁺", 12000.0, 4200.0},
        {"rare-earth-er167", "Rare-earth doped solid ¹⁶⁷Er³⁺:Y₂SiO₅", 600.0, 1.3},
        {"ion-trap-ca40", "Trapped ion ⁴⁰Ca⁺", 1.14, 0.5},
        {"nv-centre", "NV centre in diamond", 200.0, 0.5},
        {"sc-cavity-long", "Superconducting cavity (long-lived)", 25.6e-3, 34.0e-3},
        {"sc-cavity-short", "Superconducting cavity (3D transmon)", 1.2e-3, 0.72e-3},
    };
    return catalog;
}

const MemoryTechnology& technology(const std::string& id) {
    for (const auto& t : technology_catalog())
        if (t.id == id) return t;
    std::ostringstream os;
    os << "unknown memory technology '" << id << "'; known:";
    for (const auto& t : technology_catalog()) os << ' ' << t.id;
    throw config_error(os.str());
}

} // namespace entsim
