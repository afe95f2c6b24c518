#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "entsim/decoherence.hpp"
#include "entsim/rng.hpp"

// Monte Carlo wave-function unraveling with exact jump times: between jumps
// the no-jump evolution only rescales basis amplitudes (every L^+L here is
// diagonal), so the survival probability S(t) = sum_b |c_b|^2 e^{-2 K_b t} is
// available in closed form and the next jump time solves S(t) = u by
// bisection. No time-step discretization enters anywhere.

namespace entsim {

namespace {

struct PhaseSpec {
    double duration;
    bool a_active;
    bool b_active;
};

std::vector<PhaseSpec> make_schedule(const ExposureIntervals& tau) {
    std::vector<PhaseSpec> phases;
    const double solo = std::abs(tau.tau_a_s - tau.tau_b_s);
    if (solo > 0.0)
        phases.push_back({solo, tau.tau_a_s > tau.tau_b_s, tau.tau_b_s > tau.tau_a_s});
    const double both = std::min(tau.tau_a_s, tau.tau_b_s);
    if (both > 0.0) phases.push_back({both, true, true});
    return phases;
}

void apply_lowering(Vector4c& psi, int qubit) {
    const int mask = qubit == kQubitA ? 2 : 1;
    Vector4c out = Vector4c::Zero();
    for (int b = 0; b < 4; ++b)
        if (b & mask) out(b ^ mask) = psi(b);
    psi = out;
}

void apply_pauli_z(Vector4c& psi, int qubit) {
    for (int b = 0; b < 4; ++b)
        if (excitation(b, qubit)) psi(b) = -psi(b);
}

} // namespace

TrajectoryEstimate trajectory_fidelity(const ExposureIntervals& tau,
                                       const MemoryTechnology& tech,
                                       DephasingConvention conv,
                                       std::uint64_t n_trajectories,
                                       std::uint64_t seed) {
    tau.validate();
    if (n_trajectories == 0)
        throw std::invalid_argument("trajectory_fidelity: need at least one trajectory");
    const double g1 = relaxation_rate(tech);
    const double gphi = dephasing_rate(tech, conv);
    const auto phases = make_schedule(tau);

    double mean = 0.0, m2 = 0.0;
    std::uint64_t zero_jump = 0;

    for (std::uint64_t traj = 0; traj < n_trajectories; ++traj) {
        Rng rng(mix_seed(seed, traj));
        Vector4c psi = bell_singlet_vector<double>();
        std::uint64_t jumps = 0;

        for (const auto& ph : phases) {
            // K_b: amplitude-decay rate of basis component b under the active
            // dissipators (diagonal of sum L^+L, halved).
            std::array<double, 4> K{};
            double k_max = 0.0;
            for (int b = 0; b < 4; ++b) {
                double k = 0.0;
                if (ph.a_active) k += g1 * excitation(b, kQubitA) + gphi;
                if (ph.b_active) k += g1 * excitation(b, kQubitB) + gphi;
                K[b] = 0.5 * k;
                k_max = std::max(k_max, K[b]);
            }
            if (k_max == 0.0) continue;  // no decay channel in this phase

            double remaining = ph.duration;
            while (remaining > 0.0) {
                auto survival = [&](double dt) {
                    double s = 0.0;
                    for (int b = 0; b < 4; ++b)
                        s += std::norm(psi(b)) * std::exp(-2.0 * K[b] * dt);
                    return s;
                };
                const double u = rng.uniform01();
                const double s_end = survival(remaining);
                if (u < s_end || s_end >= 1.0) {
                    // no jump before the phase ends
                    for (int b = 0; b < 4; ++b)
                        psi(b) *= std::exp(-K[b] * remaining);
                    psi.normalize();
                    break;
                }
                // jump time: S(t*) = u, S strictly decreasing on [0, remaining]
                double lo = 0.0, hi = remaining;
                for (int i = 0; i < 200 && (hi - lo) > 1e-15 * remaining; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (survival(mid) > u ? lo : hi) = mid;
                }
                const double t_jump = 0.5 * (lo + hi);
                for (int b = 0; b < 4; ++b)
                    psi(b) *= std::exp(-K[b] * t_jump);

                // channel weights at the jump instant: <psi|L^+L|psi>
                double w[4] = {0, 0, 0, 0};  // sigma-_A, sigma-_B, sigmaz_A, sigmaz_B
                const double nrm = psi.squaredNorm();
                for (int b = 0; b < 4; ++b) {
                    const double p = std::norm(psi(b));
                    if (ph.a_active) w[0] += g1 * excitation(b, kQubitA) * p;
                    if (ph.b_active) w[1] += g1 * excitation(b, kQubitB) * p;
                }
                if (ph.a_active) w[2] = gphi * nrm;
                if (ph.b_active) w[3] = gphi * nrm;
                const double total = w[0] + w[1] + w[2] + w[3];
                if (total <= 0.0) {
                    // decayed into a jump-free subspace; nothing left to do
                    psi.normalize();
                    break;
                }
                double pick = rng.uniform01() * total;
                int channel = 0;
                while (channel < 3 && pick >= w[channel]) {
                    pick -= w[channel];
                    ++channel;
                }
                switch (channel) {
                    case 0: apply_lowering(psi, kQubitA); break;
                    case 1: apply_lowering(psi, kQubitB); break;
                    case 2: apply_pauli_z(psi, kQubitA); break;
                    default: apply_pauli_z(psi, kQubitB); break;
                }
                psi.normalize();
                ++jumps;
                remaining -= t_jump;
            }
        }

        const double f = pure_fidelity(psi);
        if (jumps == 0) ++zero_jump;
        const double delta = f - mean;
        mean += delta / static_cast<double>(traj + 1);
        m2 += delta * (f - mean);
    }

    TrajectoryEstimate est;
    est.n_trajectories = n_trajectories;
    est.fidelity_mean = mean;
    const double n = static_cast<double>(n_trajectories);
    est.fidelity_stderr = n > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    est.zero_jump_fraction = static_cast<double>(zero_jump) / n;
    est.zero_jump_stderr =
        std::sqrt(std::max(0.0, est.zero_jump_fraction * (1.0 - est.zero_jump_fraction) / n));
    return est;
}

} // namespace entsim
