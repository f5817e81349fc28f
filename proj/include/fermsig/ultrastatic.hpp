#pragma once

// Ultrastatic space-times R x N: the spatial Dirac operator enters only
// through its spectrum, and on each eigenvalue lambda the Hamiltonian is the
// constant matrix [[m, lambda], [lambda, -m]] = omega (Pi_+ - Pi_-).

#include <vector>

#include "fermsig/core.hpp"
#include "fermsig/signature_matrix.hpp"

namespace fermsig::ultrastatic {

/// Discrete spectrum of the spatial operator. A continuous spectrum is
/// represented by a user-chosen grid of lambda samples.
class UltrastaticModel {
public:
    explicit UltrastaticModel(std::vector<ModeIndex> spectrum);
    const std::vector<ModeIndex>& spectrum() const noexcept { return spectrum_; }

private:
    std::vector<ModeIndex> spectrum_;
};

struct FrequencyData {
    double omega = 0.0;
    Mat2 pi_plus;
    Mat2 pi_minus;
};

/// omega = sqrt(lambda^2 + m^2), Pi_+- = 1/2 +- (1/(2 omega)) [[m, lambda], [lambda, -m]].
FrequencyData frequency_split(double lambda, double m);

/// U = e^{-i omega t} Pi_+ + e^{i omega t} Pi_-
Mat2 evolution_matrix(double lambda, double m, double t);

/// Pi_+ - Pi_-; spectrum {+1, -1}.
SignatureMatrix ultrastatic_signature(double lambda, double m);

/// sum_k w_k eta(m_k) U^t_{m_k} u0
SpinorPair p_integrate_ultrastatic(const MassProfile& profile, const SpinorPair& u0, double lambda, double t,
                                   const QuadratureRule& quad);

/// 2 pi sum_k w_k eta_a(m_k) eta_b(m_k) (Pi_+ - Pi_-): the frequency-split
/// pairing matrix, to be sandwiched between Cauchy data.
Mat2 plancherel_pairing_matrix(const MassProfile& a, const MassProfile& b, double lambda, const QuadratureRule& quad);

}  // namespace fermsig::ultrastatic
