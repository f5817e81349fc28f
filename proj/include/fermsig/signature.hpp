#pragma once

// The fermionic signature operator S_m on a single de Sitter spatial mode.
// In the basis of Cauchy data at t = 0,
//
//     S_m = 1/2 (W_+^dagger sigma_3 W_+ + W_-^dagger sigma_3 W_-),
//
// where W_+- map Cauchy data to the asymptotic coefficients f^+-. Its
// spectral projectors give the fermionic projector at mode level.

#include <vector>

#include "fermsig/core.hpp"
#include "fermsig/desitter.hpp"
#include "fermsig/massosc.hpp"
#include "fermsig/signature_matrix.hpp"

namespace fermsig::signature {

inline constexpr double kDefaultZeroTol = 1e-10;

SignatureMatrix assemble_signature(const desitter::ScatteringPair& scattering, int two_lambda, double m);

SignatureMatrix assemble_signature(int two_lambda, double m, double eps,
                                   const desitter::AsymptoticOptions& opt = {});

/// Spectral data of a Hermitian 2x2 matrix. Eigenvalues with |value| <
/// zero_tol belong to neither projector and set `degenerate`.
struct SpectralSplit {
    double nu = 0.0;  // half the spectral gap; |eigenvalue| for trace-free input
    double eig_low = 0.0;
    double eig_high = 0.0;
    Mat2 p_plus = Mat2::Zero();
    Mat2 p_minus = Mat2::Zero();
    bool degenerate = false;
};

SpectralSplit spectral_split(const SignatureMatrix& s, double zero_tol = kDefaultZeroTol);

/// pi sum_{s=+-} int eta_a eta_b <f_a^s, sigma_3 f_b^s> dm, the closed-form
/// pairing built directly from the asymptotic coefficients of each family.
cplx closed_form_pairing(const massosc::MassFamily& a, const massosc::MassFamily& b, const QuadratureRule& quad,
                         double eps);

/// 2 pi int eta_a eta_b S_m dm: (i, j) entry is the closed-form pairing of
/// the families (eta_a, e_i) and (eta_b, e_j).
Mat2 signature_pairing_matrix(const MassProfile& a, const MassProfile& b, int two_lambda, const QuadratureRule& quad,
                              double eps);

struct IntervalIndependenceOptions {
    std::vector<double> widths{0.2, 0.1, 0.05};
    double tolerance = 2e-3;
    double eps = 1e-12;
    double rtol = 1e-10;
    /// Gauss-Legendre nodes per unit of |J|/w on each interval J.
    double nodes_per_width = 48.0;
    /// Time window max(t_max_min, t_max_scale / w).
    double t_max_min = 200.0;
    double t_max_scale = 100.0;
};

struct IntervalEstimate {
    double width = 0.0;
    Mat2 estimate_outer = Mat2::Zero();  // from the interval I
    Mat2 estimate_inner = Mat2::Zero();  // from the subinterval
    double difference = 0.0;             // max |entry| difference
    double outer_to_closed = 0.0;
    double inner_to_closed = 0.0;
    double error_outer = 0.0;  // time-domain error estimate, normalized
    double error_inner = 0.0;
};

struct IntervalIndependenceReport {
    bool interval_free = true;  // assemble_signature takes no interval
    Mat2 closed_form = Mat2::Zero();
    std::vector<IntervalEstimate> rows;
    double tolerance = 0.0;
    bool pass = false;
};

/// Estimates S_m from narrow bumps centered at m, once with a quadrature on I
/// and once on the subinterval, normalized by int eta^2; PASS when the two
/// agree within tolerance at the narrowest width.
IntervalIndependenceReport interval_independence_check(int two_lambda, double m, const MassInterval& outer,
                                                       const MassInterval& inner,
                                                       const IntervalIndependenceOptions& opt = {});

/// max |S_{m+dm} - S_m| entrywise.
double signature_variation(int two_lambda, double m, double dm, double eps);

enum class CheckStatus { pass, fail, inconclusive };

const char* to_string(CheckStatus s) noexcept;

struct SpatialNormalizationReport {
    CheckStatus status = CheckStatus::inconclusive;
    double idempotence_defect = 0.0;       // |p_-^2 - p_-|
    double orthogonality_defect = 0.0;     // |p_+ p_-|
    double symmetry_defect = 0.0;          // |p_-^dagger - p_-|
    double commutation_defect = 0.0;       // evolve, project at t_check, evolve back vs project at 0
    double mass_normalization_defect = 0.0;  // |S p_- + nu p_-|
    double nu = 0.0;
};

struct SpatialNormalizationOptions {
    double eps = 1e-12;
    double rtol = 1e-12;
    double zero_tol = kDefaultZeroTol;
    double idempotence_tolerance = 1e-12;
    double commutation_tolerance = 1e-8;
};

SpatialNormalizationReport spatial_normalization_check(int two_lambda, double m, double t_check,
                                                       const SpatialNormalizationOptions& opt = {});

struct InterpolationRow {
    double mass = 0.0;
    SignatureMatrix signature;
    SpectralSplit split;
    double distance_plus = 0.0;   // |S_m - W_+^dagger sigma_3 W_+|
    double distance_minus = 0.0;  // |S_m - W_-^dagger sigma_3 W_-|
    double unitarity_defect = 0.0;
};

std::vector<InterpolationRow> interpolation_profile(int two_lambda, const std::vector<double>& mass_grid, double eps = 1e-12,
                                                    double zero_tol = kDefaultZeroTol);

}  // namespace fermsig::signature
