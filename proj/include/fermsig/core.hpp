#pragma once

// Shared numeric vocabulary for the mode-level Dirac computations: mass
// intervals, smooth mass weights, quadrature rules, spinor amplitudes and the
// two inner products (Cauchy scalar product and space-time density).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace fermsig {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Open mass interval (m_lower, m_upper) with 0 < m_lower < m_upper.
class MassInterval {
public:
    MassInterval(double m_lower, double m_upper);

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double length() const noexcept { return upper_ - lower_; }
    double midpoint() const noexcept { return 0.5 * (lower_ + upper_); }

    /// Strict interior membership.
    bool contains(double m) const noexcept { return m > lower_ && m < upper_; }
    /// True when `other` lies inside the closure of this interval.
    bool encloses(const MassInterval& other) const noexcept {
        return other.lower_ >= lower_ && other.upper_ <= upper_;
    }

private:
    double lower_;
    double upper_;
};

/// Mode amplitudes (u1, u2) of a single spatial mode.
struct SpinorPair {
    cplx u1{};
    cplx u2{};

    SpinorPair() = default;
    SpinorPair(cplx a, cplx b) : u1(a), u2(b) {}
    explicit SpinorPair(const Vec2& v) : u1(v(0)), u2(v(1)) {}

    Vec2 vec() const { return Vec2(u1, u2); }
    double norm() const { return std::sqrt(std::norm(u1) + std::norm(u2)); }
    bool finite() const noexcept;

    static SpinorPair basis(int j) { return j == 0 ? SpinorPair{1.0, 0.0} : SpinorPair{0.0, 1.0}; }
};

/// Throws std::invalid_argument if a component is NaN or infinite.
void require_finite(const SpinorPair& s, const char* what);

enum class ProfileKind { bump, polynomial_bump };

/// Smooth weight eta(m) supported in [support_lower, support_upper], a
/// subinterval of the mass interval. `mass_power` k multiplies the weight by
/// m^k, which is how the mass operator T acts on a family.
///
///   bump:             exp(-1/(1-x^2))
///   polynomial_bump:  (1-x^2)^order * sum_j coefficients[j] x^j
///
/// with x = (2m - a - b)/(b - a) on the support (a, b). Both vanish for |x| >= 1.
class MassProfile {
public:
    static MassProfile bump(const MassInterval& interval);
    static MassProfile bump(const MassInterval& interval, double center, double width);
    static MassProfile polynomial_bump(const MassInterval& interval, int order,
                                       std::vector<double> coefficients);

    const MassInterval& interval() const noexcept { return interval_; }
    ProfileKind kind() const noexcept { return kind_; }
    double support_lower() const noexcept { return support_lower_; }
    double support_upper() const noexcept { return support_upper_; }
    MassInterval support() const { return {support_lower_, support_upper_}; }
    int mass_power() const noexcept { return mass_power_; }
    int order() const noexcept { return order_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }

    /// The profile m -> m * eta(m).
    MassProfile times_mass() const;

    double operator()(double m) const noexcept;

private:
    MassProfile(const MassInterval& interval, ProfileKind kind, double lo, double hi);

    MassInterval interval_;
    ProfileKind kind_;
    double support_lower_;
    double support_upper_;
    int mass_power_ = 0;
    int order_ = 0;
    std::vector<double> coefficients_;
};

double bump_value(const MassProfile& profile, double m) noexcept;

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
    double weight_sum() const noexcept;

    template <class F>
    auto integrate(F&& f) const {
        using R = decltype(f(0.0));
        R acc{};
        for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
        return acc;
    }
};

/// n-point Gauss-Legendre rule on the interval; exact for degree <= 2n-1.
QuadratureRule gauss_legendre(const MassInterval& interval, int n);

/// Eigenvalue of the spatial Dirac operator stored as 2*lambda so that
/// half-integer spectra compare exactly.
struct ModeIndex {
    int two_lambda = 0;
    int multiplicity = 1;

    double lambda() const noexcept { return 0.5 * two_lambda; }
    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Spectrum of the Dirac operator on the unit S^3 up to |lambda| <= max_two_lambda/2:
/// lambda = +-3/2, +-5/2, ... with multiplicity lambda^2 - 1/4.
std::vector<ModeIndex> s3_spectrum(int max_two_lambda);

/// Converts a real eigenvalue to 2*lambda, rejecting non-half-integers.
int to_two_lambda(double lambda);

/// (a|b) = 2 pi <a, b>_{C^2}
cplx mode_scalar_product(const SpinorPair& a, const SpinorPair& b) noexcept;

/// conj(a1) b1 - conj(a2) b2, the integrand of the space-time pairing.
cplx mode_spacetime_density(const SpinorPair& a, const SpinorPair& b) noexcept;

/// sigma_3 = diag(1, -1)
inline Mat2 sigma3() {
    Mat2 s;
    s << 1.0, 0.0, 0.0, -1.0;
    return s;
}

/// Largest singular value of a 2x2 complex matrix.
double operator_norm(const Mat2& a);

/// Largest absolute entry.
double max_abs(const Mat2& a);

}  // namespace fermsig
