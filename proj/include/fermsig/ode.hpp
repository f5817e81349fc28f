#pragma once

// Adaptive Dormand-Prince 5(4) integrator with the 4th-order continuous
// extension of Hairer & Wanner, for Eigen-typed states (vectors or matrices of
// complex amplitudes). Output times are served from the dense interpolant, so
// the step size is governed by the tolerances alone.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fermsig::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0: automatic
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
};

/// Step-size underflow or step budget exhaustion. Carries the last time the
/// solution was accepted.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : std::runtime_error(what + " (last good t = " + std::to_string(last_good_time) + ")"),
          last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

namespace detail {

template <class State>
double scaled_norm(const State& err, const State& y0, const State& y1, const Options& opt) {
    const auto scale = opt.atol + opt.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
    return std::sqrt((err.cwiseAbs().array() / scale).square().mean());
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1. For every entry of `outputs`
/// (sorted along the direction of integration, inside [t0, t1]) calls
/// observe(index, y(output)). Returns y(t1).
template <class State, class Rhs, class Observer>
State integrate(Rhs&& rhs, double t0, State y, double t1, std::span<const double> outputs,
                Observer&& observe, const Options& opt = {}, Stats* stats = nullptr) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw std::invalid_argument("ode: tolerances must be positive");
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw std::invalid_argument("ode: non-finite time bounds");

    const double dir = t1 >= t0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double s = (outputs[i] - t0) * dir;
        if (s < 0.0 || (outputs[i] - t1) * dir > 0.0 || (i > 0 && (outputs[i] - outputs[i - 1]) * dir < 0.0)) {
            throw std::invalid_argument("ode: output times must be ordered and inside the integration range");
        }
    }

    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] == t0) observe(next_out++, y);
    if (t1 == t0) return y;

    double t = t0;
    State k1 = rhs(t, y);
    std::size_t evals = 1;

    double h = opt.initial_step;
    if (!(h > 0.0)) {
        // Hairer's starting-step heuristic.
        const State zero = State::Zero(y.rows(), y.cols());
        const double d0 = detail::scaled_norm(y, y, zero, opt);
        const double d1n = detail::scaled_norm(k1, y, zero, opt);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, std::abs(t1 - t0));
        const State y1 = y + (dir * h0) * k1;
        const State f1 = rhs(t + dir * h0, y1);
        ++evals;
        const double d2 = detail::scaled_norm(State(f1 - k1), y, zero, opt) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min(100.0 * h0, h1);
    }
    h = std::min({h, opt.max_step, std::abs(t1 - t0)});

    std::size_t accepted = 0, rejected = 0;
    bool last_rejected = false;
    while ((t1 - t) * dir > 0.0) {
        if (accepted + rejected >= opt.max_steps) throw IntegrationError("ode: step budget exhausted", t);
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < hmin) throw IntegrationError("ode: step size underflow", t);
        const bool final_step = (t + dir * h - t1) * dir >= 0.0;
        const double hs = final_step ? (t1 - t) : dir * h;

        const State k2 = rhs(t + c2 * hs, State(y + hs * (a21 * k1)));
        const State k3 = rhs(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
        const State k4 = rhs(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 = rhs(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 =
            rhs(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const State ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double tnew = final_step ? t1 : t + hs;
        const State k7 = rhs(tnew, ynew);
        evals += 6;

        const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = detail::scaled_norm(err, y, ynew, opt);

        if (en <= 1.0 && std::isfinite(en)) {
            if (next_out < outputs.size() && (outputs[next_out] - tnew) * dir <= 0.0) {
                const State ydiff = ynew - y;
                const State bspl = hs * k1 - ydiff;
                const State r4 = ydiff - hs * k7 - bspl;
                const State r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_out < outputs.size() && (outputs[next_out] - tnew) * dir <= 0.0) {
                    const double th = (outputs[next_out] - t) / hs;
                    const double th1 = 1.0 - th;
                    const State yout = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
                    observe(next_out++, yout);
                }
            }
            t = tnew;
            y = ynew;
            k1 = k7;
            ++accepted;
            double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h = std::min(std::abs(hs) * fac, opt.max_step);
            last_rejected = false;
        } else {
            ++rejected;
            const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h = std::abs(hs) * fac;
            last_rejected = true;
        }
    }
    if (stats) {
        stats->accepted += accepted;
        stats->rejected += rejected;
        stats->evaluations += evals;
    }
    return y;
}

/// Integration without intermediate outputs.
template <class State, class Rhs>
State integrate(Rhs&& rhs, double t0, const State& y0, double t1, const Options& opt = {},
                Stats* stats = nullptr) {
    return integrate(std::forward<Rhs>(rhs), t0, y0, t1, std::span<const double>{},
                     [](std::size_t, const State&) {}, opt, stats);
}

}  // namespace fermsig::ode
