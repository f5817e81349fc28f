#pragma once

// Single spatial modes of the Dirac equation on R x S^3 with scale factor
// R(t) = cosh t. The mode amplitudes solve
//
//     i du/dt = [[m, -lambda/R], [-lambda/R, -m]] u,
//
// and in the interaction picture u = (e^{-imt} f1, e^{imt} f2)
//
//     df/dt = i (lambda/R) [[0, e^{2imt}], [e^{-2imt}, 0]] f,
//
// which converges to constants f^+- as t -> +-infinity.

#include <functional>
#include <span>
#include <vector>

#include "fermsig/core.hpp"
#include "fermsig/ode.hpp"

namespace fermsig::desitter {

/// Default largest |lambda| admitted by the CLI: 19/2.
inline constexpr int kMaxTwoLambda = 19;

/// Smallest eps accepted by extract_asymptotics.
inline constexpr double kMinEps = 1e-15;

using ScaleFactor = std::function<double(double)>;

inline double cosh_scale(double t) { return std::cosh(t); }

struct DeSitterMode {
    int two_lambda = 0;
    double mass = 1.0;
    /// Only de Sitter (cosh) is exercised by the test suite.
    ScaleFactor scale = cosh_scale;

    DeSitterMode() = default;
    DeSitterMode(int two_lambda_, double mass_);

    double lambda() const noexcept { return 0.5 * two_lambda; }
};

/// Right-hand side of the u-equation; works for vector and matrix states.
Mat2 mode_hamiltonian(const DeSitterMode& mode, double t);

/// Generator of the f-equation: df/dt = generator * f.
Mat2 interaction_generator(const DeSitterMode& mode, double t);

/// Phase dressing u = D(t) f with D = diag(e^{-imt}, e^{imt}).
Mat2 phase_dressing(double mass, double t);

ode::Options integrator_options(const DeSitterMode& mode, double rtol);

SpinorPair evolve_mode(const SpinorPair& u0, const DeSitterMode& mode, double t0, double t1, double rtol = 1e-10);

SpinorPair evolve_f(const SpinorPair& f0, const DeSitterMode& mode, double t0, double t1, double rtol = 1e-10);

/// Propagator of the f-equation from t0 to each of `times` (ordered away
/// from t0, all on one side of it).
std::vector<Mat2> f_propagator_samples(const DeSitterMode& mode, double t0, std::span<const double> times,
                                       double rtol);

enum class Direction { future, past };

/// f_norm * (exp(2|lambda| e^{-+t}) - 1): the bound on |f(t) - f^+-|.
double gronwall_envelope(double lambda, double f_norm, double t, Direction direction) noexcept;

/// Smallest T >= 0 with exp(2|lambda| e^{-T}) - 1 <= eps. Zero for lambda = 0.
double truncation_time(double lambda, double eps);

struct AsymptoticData {
    SpinorPair f_plus;
    SpinorPair f_minus;
    double T_plus = 0.0;   // truncation time (absolute)
    double T_minus = 0.0;  // truncation time (absolute, negative side)
    double tail_bound = 0.0;
};

struct AsymptoticOptions {
    /// Time at which u0 is the Cauchy datum.
    double t_start = 0.0;
    /// Integrator rtol; 0 selects clamp(eps/10, 1e-14, 1e-8).
    double rtol = 0.0;
};

/// Integrates the f-equation to t_start + T and t_start - T, with T chosen so
/// that the Groenwall tail is below eps, and returns f(+-T) as f^+-.
AsymptoticData extract_asymptotics(const SpinorPair& u0, const DeSitterMode& mode, double eps,
                                   const AsymptoticOptions& opt = {});

struct ScatteringPair {
    Mat2 w_plus;   // Cauchy data -> f^+
    Mat2 w_minus;  // Cauchy data -> f^-
    double T_plus = 0.0;
    double T_minus = 0.0;
    double tail_bound = 0.0;  // per unit-norm datum

    double unitarity_defect() const;
};

ScatteringPair scattering_matrices(const DeSitterMode& mode, double eps, const AsymptoticOptions& opt = {});

}  // namespace fermsig::desitter
