#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entsim/quantum.hpp"

namespace entsim {

// T1/T2 pair for a storage platform. Infinite times are allowed (rate 0).
struct MemoryTechnology {
    std::string id;            // machine name, e.g. "ion-trap-ca40"
    std::string display_name;  // catalog label
    double t1_s = 0.0;
    double t2_s = 0.0;

    void validate() const;
};

// Relaxation always uses gamma1 = 1/T1. For pure dephasing two conventions are
// supported:
//   t2_literal    : gamma_phi = 1/T2, the catalog T2 used directly as the
//                   sigma_z jump rate
//   t2_calibrated : gamma_phi = 1/(4 T2), which makes the equal-exposure
//                   fidelity decay as exp(-t/T2) in the T1 >> T2 regime, i.e.
//                   consistent with the timeout rule below. Default.
enum class DephasingConvention { t2_literal, t2_calibrated };

double relaxation_rate(const MemoryTechnology& tech);  // gamma1
double dephasing_rate(const MemoryTechnology& tech, DephasingConvention conv);

// Per-qubit active storage times. The qubit with the larger tau idles alone
// for the difference, then both decay together: exactly the midpoint-source
// timeline (earlier arrival waits for the later one).
struct ExposureIntervals {
    double tau_a_s = 0.0;
    double tau_b_s = 0.0;

    static ExposureIntervals equal(double t) { return {t, t}; }
    void validate() const;
};

// Analytic singlet fidelity under amplitude damping + dephasing:
//   F = 1/4 (e^{-g1 ta} + e^{-g1 tb}) + 1/2 e^{-(g1/2 + 2 g_phi)(ta + tb)}
// Only total active times matter because the per-phase generators commute.
double closed_form_fidelity(const ExposureIntervals& tau,
                            const MemoryTechnology& tech,
                            DephasingConvention conv);

// Fixed-step RK4 on the vectorized master equation, with a step-halving
// accuracy check; throws numerical_error if the halved-step answer differs by
// more than rk4_tolerance, or if the result fails state validation.
struct IntegrationOptions {
    std::optional<double> dt_max_s;  // default: min(T1,T2)/1000
    double rk4_tolerance = 1e-8;
    StateTolerances state_tol{1e-12, 1e-9, 1e-10};
};

double default_dt_max(const MemoryTechnology& tech);

TwoQubitState lindblad_propagate(const TwoQubitState& initial,
                                 const ExposureIntervals& tau,
                                 const MemoryTechnology& tech,
                                 DephasingConvention conv,
                                 const IntegrationOptions& opts = {});

// Verification window Delta_t = -T2 ln(2 f_th - 1).
// f_th <= 0.5  -> std::domain_error (window is infinite/undefined)
// f_th > 1    -> std::invalid_argument
double timeout_from_threshold(double f_th, const MemoryTechnology& tech);

// Largest one-way control latency T_C for which the verification-time fidelity
// still meets f_th, given a store-time skew delta_tq between the two arms.
// nullopt means "always satisfiable": f_th is at or below the t->inf fidelity
// asymptote (0.5 when gamma1 = 0, else 0).
std::optional<double> max_tolerable_latency(double f_th,
                                            const MemoryTechnology& tech,
                                            double delta_tq_s,
                                            DephasingConvention conv);

// Monte Carlo wave-function estimate of the same fidelity, used as an
// independent statistical oracle for the deterministic integrator. Jump times
// are sampled exactly (root-find on the survival norm), so there is no
// time-step bias. Also reports the fraction of trajectories with no jump.
struct TrajectoryEstimate {
    double fidelity_mean = 0.0;
    double fidelity_stderr = 0.0;
    double zero_jump_fraction = 0.0;
    double zero_jump_stderr = 0.0;
    std::uint64_t n_trajectories = 0;
};

TrajectoryEstimate trajectory_fidelity(const ExposureIntervals& tau,
                                       const MemoryTechnology& tech,
                                       DephasingConvention conv,
                                       std::uint64_t n_trajectories,
                                       std::uint64_t seed);

// Representative storage platforms; ids are stable machine names.
const std::vector<MemoryTechnology>& technology_catalog();
const MemoryTechnology& technology(const std::string& id);  // config_error if unknown

} // namespace entsim
