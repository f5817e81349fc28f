#include "fermsig/ultrastatic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace fermsig::ultrastatic {

UltrastaticModel::UltrastaticModel(std::vector<ModeIndex> spectrum) : spectrum_(std::move(spectrum)) {
    std::set<int> seen;
    for (const auto& mode : spectrum_) {
        if (mode.multiplicity < 1) throw std::invalid_argument("ultrastatic spectrum: multiplicity must be >= 1");
        if (!seen.insert(mode.two_lambda).second) {
            throw std::invalid_argument("ultrastatic spectrum: repeated eigenvalue " + std::to_string(mode.lambda()));
        }
    }
    std::sort(spectrum_.begin(), spectrum_.end(),
              [](const ModeIndex& a, const ModeIndex& b) { return a.two_lambda < b.two_lambda; });
}

FrequencyData frequency_split(double lambda, double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("frequency_split: mass must be positive");
    if (!std::isfinite(lambda)) throw std::invalid_argument("frequency_split: lambda must be finite");
    FrequencyData out;
    out.omega = std::hypot(lambda, m);
    Mat2 h;
    h << m, lambda, lambda, -m;
    const Mat2 half = 0.5 * Mat2::Identity();
    out.pi_plus = half + h / (2.0 * out.omega);
    out.pi_minus = half - h / (2.0 * out.omega);
    return out;
}

Mat2 evolution_matrix(double lambda, double m, double t) {
    const FrequencyData fd = frequency_split(lambda, m);
    const cplx ph = std::polar(1.0, -fd.omega * t);
    return ph * fd.pi_plus + std::conj(ph) * fd.pi_minus;
}

SignatureMatrix ultrastatic_signature(double lambda, double m) {
    const FrequencyData fd = frequency_split(lambda, m);
    return SignatureMatrix(fd.pi_plus - fd.pi_minus, lambda, m);
}

SpinorPair p_integrate_ultrastatic(const MassProfile& profile, const SpinorPair& u0, double lambda, double t,
                                   const QuadratureRule& quad) {
    require_finite(u0, "p_integrate_ultrastatic");
    Vec2 acc = Vec2::Zero();
    const Vec2 v = u0.vec();
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double eta = profile(quad.nodes[k]);
        if (eta == 0.0) continue;
        acc += (quad.weights[k] * eta) * (evolution_matrix(lambda, quad.nodes[k], t) * v);
    }
    return SpinorPair(acc);
}

Mat2 plancherel_pairing_matrix(const MassProfile& a, const MassProfile& b, double lambda, const QuadratureRule& quad) {
    Mat2 acc = Mat2::Zero();
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double m = quad.nodes[k];
        const double w = quad.weights[k] * a(m) * b(m);
        if (w == 0.0) continue;
        const FrequencyData fd = frequency_split(lambda, m);
        acc += w * (fd.pi_plus - fd.pi_minus);
    }
    return kTwoPi * acc;
}

}  // namespace fermsig::ultrastatic
