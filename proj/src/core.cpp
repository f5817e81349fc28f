#include "fermsig/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/LU>

namespace fermsig {

MassInterval::MassInterval(double m_lower, double m_upper) : lower_(m_lower), upper_(m_upper) {
    if (!std::isfinite(m_lower) || !std::isfinite(m_upper) || !(m_lower > 0.0) ||
        !(m_lower < m_upper)) {
        throw std::invalid_argument("mass interval requires 0 < m_lower < m_upper, got (" +
                                    std::to_string(m_lower) + ", " + std::to_string(m_upper) + ")");
    }
}

bool SpinorPair::finite() const noexcept {
    return std::isfinite(u1.real()) && std::isfinite(u1.imag()) && std::isfinite(u2.real()) &&
           std::isfinite(u2.imag());
}

void require_finite(const SpinorPair& s, const char* what) {
    if (!s.finite()) throw std::invalid_argument(std::string(what) + ": non-finite spinor component");
}

MassProfile::MassProfile(const MassInterval& interval, ProfileKind kind, double lo, double hi)
    : interval_(interval), kind_(kind), support_lower_(lo), support_upper_(hi) {
    if (!(lo < hi) || lo < interval.lower() || hi > interval.upper()) {
        throw std::invalid_argument("profile support must be a nonempty subinterval of the mass interval");
    }
}

MassProfile MassProfile::bump(const MassInterval& interval) {
    return MassProfile(interval, ProfileKind::bump, interval.lower(), interval.upper());
}

MassProfile MassProfile::bump(const MassInterval& interval, double center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("bump width must be positive");
    // Snap to the interval when the requested support reaches an endpoint.
    const double tol = 1e-12 * interval.upper();
    double lo = center - 0.5 * width;
    double hi = center + 0.5 * width;
    if (std::abs(lo - interval.lower()) < tol) lo = interval.lower();
    if (std::abs(hi - interval.upper()) < tol) hi = interval.upper();
    return MassProfile(interval, ProfileKind::bump, lo, hi);
}

MassProfile MassProfile::polynomial_bump(const MassInterval& interval, int order,
                                         std::vector<double> coefficients) {
    if (order < 1) throw std::invalid_argument("polynomial bump order must be >= 1");
    if (coefficients.empty()) throw std::invalid_argument("polynomial bump needs coefficients");
    MassProfile p(interval, ProfileKind::polynomial_bump, interval.lower(), interval.upper());
    p.order_ = order;
    p.coefficients_ = std::move(coefficients);
    return p;
}

MassProfile MassProfile::times_mass() const {
    MassProfile p = *this;
    ++p.mass_power_;
    return p;
}

double MassProfile::operator()(double m) const noexcept {
    const double x = (2.0 * m - support_lower_ - support_upper_) / (support_upper_ - support_lower_);
    if (!(std::abs(x) < 1.0)) return 0.0;
    const double one_minus = (1.0 - x) * (1.0 + x);
    double value = 0.0;
    switch (kind_) {
        case ProfileKind::bump:
            value = std::exp(-1.0 / one_minus);
            break;
        case ProfileKind::polynomial_bump: {
            double poly = 0.0;
            for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) poly = poly * x + *it;
            value = std::pow(one_minus, order_) * poly;
            break;
        }
    }
    for (int k = 0; k < mass_power_; ++k) value *= m;
    return value;
}

double bump_value(const MassProfile& profile, double m) noexcept { return profile(m); }

double QuadratureRule::weight_sum() const noexcept {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

QuadratureRule gauss_legendre(const MassInterval& interval, int n) {
    if (n <= 0) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * interval.length();
    const double mid = interval.midpoint();
    const int pairs = (n + 1) / 2;
    // P_n and P_{n-1} at x by the three-term recurrence.
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, p0};
    };
    for (int i = 0; i < pairs; ++i) {
        // Newton iteration from the Tricomi initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [pn, pm] = legendre(x);
            const double dx = pn / (n * (x * pn - pm) / (x * x - 1.0));
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pm] = legendre(x);
        const double dp = n * (x * pn - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Nodes ascending: root i (largest first) fills the upper end.
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.nodes[i] = mid - half * x;
        rule.weights[n - 1 - i] = half * w;
        rule.weights[i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

std::vector<ModeIndex> s3_spectrum(int max_two_lambda) {
    std::vector<ModeIndex> out;
    for (int two = 3; two <= max_two_lambda; two += 2) {
        // lambda^2 - 1/4 = (two^2 - 1) / 4
        const int mult = (two * two - 1) / 4;
        out.push_back({-two, mult});
        out.push_back({two, mult});
    }
    std::sort(out.begin(), out.end(), [](const ModeIndex& a, const ModeIndex& b) { return a.two_lambda < b.two_lambda; });
    return out;
}

int to_two_lambda(double lambda) {
    const double two = 2.0 * lambda;
    const double r = std::round(two);
    if (!std::isfinite(two) || std::abs(two - r) > 1e-9 || std::abs(r) > 1e6) {
        throw std::invalid_argument("lambda must be an integer or half-integer, got " + std::to_string(lambda));
    }
    return static_cast<int>(r);
}

cplx mode_scalar_product(const SpinorPair& a, const SpinorPair& b) noexcept {
    return kTwoPi * (std::conj(a.u1) * b.u1 + std::conj(a.u2) * b.u2);
}

cplx mode_spacetime_density(const SpinorPair& a, const SpinorPair& b) noexcept {
    return std::conj(a.u1) * b.u1 - std::conj(a.u2) * b.u2;
}

double operator_norm(const Mat2& a) {
    // sqrt of the largest eigenvalue of a^H a, in closed form for 2x2.
    const Mat2 g = a.adjoint() * a;
    const double tr = g.trace().real();
    const double det = std::max(0.0, g.determinant().real());
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return std::sqrt(std::max(0.0, 0.5 * tr + disc));
}

double max_abs(const Mat2& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace fermsig
