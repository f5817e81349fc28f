#include "fermsig/desitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fermsig::desitter {

DeSitterMode::DeSitterMode(int two_lambda_, double mass_) : two_lambda(two_lambda_), mass(mass_) {
    if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
        throw std::invalid_argument("de Sitter mode requires a positive finite mass, got " + std::to_string(mass_));
    }
}

Mat2 mode_hamiltonian(const DeSitterMode& mode, double t) {
    const double off = -mode.lambda() / mode.scale(t);
    Mat2 h;
    h << mode.mass, off, off, -mode.mass;
    return h;
}

Mat2 interaction_generator(const DeSitterMode& mode, double t) {
    const cplx a(0.0, mode.lambda() / mode.scale(t));
    const cplx ph = std::polar(1.0, 2.0 * mode.mass * t);
    Mat2 g;
    g << 0.0, a * ph, a * std::conj(ph), 0.0;
    return g;
}

Mat2 phase_dressing(double mass, double t) {
    const cplx ph = std::polar(1.0, -mass * t);
    Mat2 d;
    d << ph, 0.0, 0.0, std::conj(ph);
    return d;
}

ode::Options integrator_options(const DeSitterMode& mode, double rtol) {
    if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be positive");
    ode::Options opt;
    opt.rtol = rtol;
    opt.atol = rtol * 1e-2;
    // Keep several stages per oscillation of e^{2imt}.
    opt.max_step = 0.5 / std::max(mode.mass, 1.0);
    return opt;
}

namespace {

void check_times(double t0, double t1) {
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw std::invalid_argument("evolution times must be finite");
}

}  // namespace

SpinorPair evolve_mode(const SpinorPair& u0, const DeSitterMode& mode, double t0, double t1, double rtol) {
    check_times(t0, t1);
    require_finite(u0, "evolve_mode");
    const auto opt = integrator_options(mode, rtol);
    if (t0 == t1) return u0;
    auto rhs = [&mode](double t, const Vec2& u) -> Vec2 { return cplx(0.0, -1.0) * (mode_hamiltonian(mode, t) * u); };
    return SpinorPair(ode::integrate(rhs, t0, u0.vec(), t1, opt));
}

SpinorPair evolve_f(const SpinorPair& f0, const DeSitterMode& mode, double t0, double t1, double rtol) {
    check_times(t0, t1);
    require_finite(f0, "evolve_f");
    const auto opt = integrator_options(mode, rtol);
    if (t0 == t1 || mode.two_lambda == 0) return f0;
    auto rhs = [&mode](double t, const Vec2& f) -> Vec2 { return interaction_generator(mode, t) * f; };
    return SpinorPair(ode::integrate(rhs, t0, f0.vec(), t1, opt));
}

std::vector<Mat2> f_propagator_samples(const DeSitterMode& mode, double t0, std::span<const double> times,
                                       double rtol) {
    std::vector<Mat2> out(times.size(), Mat2::Identity());
    if (times.empty() || mode.two_lambda == 0) return out;
    const auto opt = integrator_options(mode, rtol);
    const double t_end = times.back();
    auto rhs = [&mode](double t, const Mat2& f) -> Mat2 { return interaction_generator(mode, t) * f; };
    ode::integrate(rhs, t0, Mat2(Mat2::Identity()), t_end, times,
                   [&out](std::size_t i, const Mat2& f) { out[i] = f; }, opt);
    return out;
}

double gronwall_envelope(double lambda, double f_norm, double t, Direction direction) noexcept {
    if (lambda == 0.0) return 0.0;
    const double decay = direction == Direction::future ? std::exp(-t) : std::exp(t);
    return f_norm * std::expm1(2.0 * std::abs(lambda) * decay);
}

double truncation_time(double lambda, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive and finite");
    if (eps < kMinEps) {
        throw std::invalid_argument("eps below double-precision resolution of the asymptotic data (min 1e-15)");
    }
    if (lambda == 0.0) return 0.0;
    // exp(2|l| e^{-T}) - 1 = eps  <=>  T = ln(2|l| / ln(1 + eps))
    double T = std::log(2.0 * std::abs(lambda) / std::log1p(eps));
    T = std::max(T, 0.0);
    // Nudge past rounding so the bound holds as an inequality.
    while (std::expm1(2.0 * std::abs(lambda) * std::exp(-T)) > eps) T += 1e-12 * std::max(1.0, T);
    return T;
}

namespace {

double resolve_rtol(double eps, const AsymptoticOptions& opt) {
    if (opt.rtol > 0.0) return opt.rtol;
    return std::clamp(0.1 * eps, 1e-14, 1e-8);
}

struct Window {
    double t_plus;
    double t_minus;
    double envelope;  // per unit norm
};

Window truncation_window(const DeSitterMode& mode, double eps, double t_start) {
    const double T = truncation_time(mode.lambda(), eps);
    Window w{std::max(T, t_start), std::min(-T, t_start), 0.0};
    w.envelope = std::max(gronwall_envelope(mode.lambda(), 1.0, w.t_plus, Direction::future),
                          gronwall_envelope(mode.lambda(), 1.0, w.t_minus, Direction::past));
    return w;
}

// f at t_start from the Cauchy datum u(t_start).
Mat2 undress(double mass, double t) { return phase_dressing(mass, t).adjoint(); }

}  // namespace

AsymptoticData extract_asymptotics(const SpinorPair& u0, const DeSitterMode& mode, double eps,
                                   const AsymptoticOptions& opt) {
    require_finite(u0, "extract_asymptotics");
    const Window w = truncation_window(mode, eps, opt.t_start);
    const double rtol = resolve_rtol(eps, opt);
    const SpinorPair f0(undress(mode.mass, opt.t_start) * u0.vec());

    AsymptoticData out;
    out.T_plus = w.t_plus;
    out.T_minus = w.t_minus;
    out.f_plus = evolve_f(f0, mode, opt.t_start, w.t_plus, rtol);
    out.f_minus = evolve_f(f0, mode, opt.t_start, w.t_minus, rtol);
    out.tail_bound = w.envelope * std::max(out.f_plus.norm(), out.f_minus.norm());
    return out;
}

double ScatteringPair::unitarity_defect() const {
    const Mat2 id = Mat2::Identity();
    return std::max(operator_norm(w_plus.adjoint() * w_plus - id), operator_norm(w_minus.adjoint() * w_minus - id));
}

ScatteringPair scattering_matrices(const DeSitterMode& mode, double eps, const AsymptoticOptions& opt) {
    const Window w = truncation_window(mode, eps, opt.t_start);
    const double rtol = resolve_rtol(eps, opt);
    const Mat2 f0 = undress(mode.mass, opt.t_start);

    ScatteringPair out;
    out.T_plus = w.t_plus;
    out.T_minus = w.t_minus;
    out.tail_bound = w.envelope;
    if (mode.two_lambda == 0) {
        out.w_plus = f0;
        out.w_minus = f0;
        return out;
    }
    const auto iopt = integrator_options(mode, rtol);
    auto rhs = [&mode](double t, const Mat2& f) -> Mat2 { return interaction_generator(mode, t) * f; };
    out.w_plus = ode::integrate(rhs, opt.t_start, f0, w.t_plus, iopt);
    out.w_minus = ode::integrate(rhs, opt.t_start, f0, w.t_minus, iopt);
    return out;
}

}  // namespace fermsig::desitter
