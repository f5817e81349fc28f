#pragma once

// Mass integration p psi = int_I psi_m dm on a single spatial mode, the
// brute-force time-domain space-time pairing
//
//     <p psi | p phi> = int dt (p u)^dagger sigma_3 (p u~),
//
// decay measurements, and the strong mass oscillation bound.

#include <span>
#include <vector>

#include "fermsig/core.hpp"

namespace fermsig::massosc {

enum class Spacetime { desitter, ultrastatic };

/// A family psi_m whose mode data is eta(m) times the solution with Cauchy
/// datum u0 at t = 0.
struct MassFamily {
    MassProfile profile;
    SpinorPair u0;
    double lambda = 0.0;

    /// T psi: the profile multiplied by m.
    MassFamily times_mass() const { return {profile.times_mass(), u0, lambda}; }
};

/// sum_k w_k eta(m_k) u(m_k, t), each u from desitter::evolve_mode (or the
/// closed-form ultrastatic evolution).
SpinorPair p_integrate(const MassFamily& family, double t, const QuadratureRule& quad, double rtol,
                       Spacetime spacetime = Spacetime::desitter);

/// Mass-integrated propagators P_a(t) = sum_k w_k eta_a(m_k) U_{m_k}(t, 0) for
/// several profiles at once. `times` must be sorted ascending. One evolution
/// per mass node serves all profiles and all times.
std::vector<std::vector<Mat2>> sample_mass_integrated(std::span<const MassProfile> profiles, double lambda,
                                                      const QuadratureRule& quad, std::span<const double> times,
                                                      double rtol, Spacetime spacetime);

struct PairingOptions {
    Spacetime spacetime = Spacetime::desitter;
    double t_max = 200.0;
    double rtol = 1e-10;
    /// Gauss-Kronrod panel width for |t| <= far_start.
    double panel = 0.25;
    /// Panel width beyond far_start (de Sitter only; the ultrastatic density
    /// keeps its high-frequency cross terms and uses `panel` throughout).
    double far_panel = 1.0;
    double far_start = 40.0;
};

/// Pairing matrix P(i,j) = <p(eta_a e_i) | p(eta_b e_j)> over [-t_max, t_max],
/// with error components. Each error is a bound on the largest entry error.
struct PairingMatrix {
    Mat2 value = Mat2::Zero();
    double quadrature_error = 0.0;  // sum over panels of |K15 - G7|
    double tail_error = 0.0;        // A/(1+t^2)^2 envelope integrated beyond t_max
    double ode_error = 0.0;         // rtol-scaled propagation error
    double tail_amplitude = 0.0;    // fitted A

    double error() const noexcept { return quadrature_error + tail_error + ode_error; }
};

PairingMatrix pairing_matrix_time_domain(const MassProfile& a, const MassProfile& b, double lambda,
                                         const QuadratureRule& quad, const PairingOptions& opt = {});

struct PairingResult {
    cplx value;
    double error = 0.0;
    PairingMatrix matrix;
};

/// <p a | p b> in the time domain. Families on different spatial modes are
/// rejected (they pair to zero by orthogonality of the eigenspinors).
PairingResult pairing_time_domain(const MassFamily& a, const MassFamily& b, double t_max, const QuadratureRule& quad,
                                  double rtol, Spacetime spacetime = Spacetime::desitter);

PairingResult pairing_time_domain(const MassFamily& a, const MassFamily& b, const QuadratureRule& quad,
                                  const PairingOptions& opt);

struct DecayReport {
    double sup_scaled = 0.0;  // sup (1 + t^2) |p u(t)|
    double t_at_sup = 0.0;
    std::vector<double> times;
    std::vector<double> norms;  // |p u(t)|
};

/// Samples (1 + t^2) |p u(t)| on n evenly spaced times in [t_lo, t_hi].
DecayReport measure_decay(const MassFamily& family, double t_lo, double t_hi, int n, const QuadratureRule& quad,
                          double rtol, Spacetime spacetime = Spacetime::desitter);

struct StrongMopReport {
    cplx lhs;
    double lhs_abs = 0.0;
    double rhs = 0.0;  // int |psi_m| |phi_m| dm with c = 1
    double error = 0.0;
    double margin = 0.0;  // rhs - lhs_abs
    bool pass = false;
};

/// |<p psi | p phi>| <= c int |phi_m|_m |psi_m|_m dm with c = 1, the left side
/// evaluated in the time domain.
StrongMopReport strong_mop_bound_check(const MassFamily& a, const MassFamily& b, const QuadratureRule& quad,
                                       const PairingOptions& opt = {});

/// Gauss-Kronrod 7/15 panels covering [-t_max, t_max]: nodes ascending, with
/// Kronrod and Gauss weights (Gauss weight 0 off the Gauss nodes).
struct TimeGrid {
    std::vector<double> nodes;
    std::vector<double> kronrod;
    std::vector<double> gauss;
    std::vector<std::size_t> panel_of;
    std::size_t panels = 0;
};

TimeGrid make_time_grid(double t_max, double panel, double far_panel, double far_start);

}  // namespace fermsig::massosc
