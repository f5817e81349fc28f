#pragma once

// Independent reference integrator for the de Sitter mode equation: Boost.Odeint
// Runge-Kutta-Fehlberg 7(8) on the real 4-vector (Re u1, Im u1, Re u2, Im u2).

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "fermsig/core.hpp"

namespace oracle {

using State = std::array<double, 4>;

inline fermsig::SpinorPair evolve(const fermsig::SpinorPair& u0, double lambda, double m, double t0, double t1,
                                  double tol = 1e-13) {
    namespace odeint = boost::numeric::odeint;
    State y{u0.u1.real(), u0.u1.imag(), u0.u2.real(), u0.u2.imag()};
    if (t0 == t1) return u0;
    // i u' = H u  =>  u' = -i H u, H = [[m, c], [c, -m]], c = -lambda / cosh t
    auto rhs = [lambda, m](const State& s, State& ds, double t) {
        const double c = -lambda / std::cosh(t);
        const double h1r = m * s[0] + c * s[2], h1i = m * s[1] + c * s[3];
        const double h2r = c * s[0] - m * s[2], h2i = c * s[1] - m * s[3];
        ds = {h1i, -h1r, h2i, -h2r};
    };
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    const double dt = t1 > t0 ? 0.01 : -0.01;
    odeint::integrate_adaptive(stepper, rhs, y, t0, t1, dt);
    return {fermsig::cplx(y[0], y[1]), fermsig::cplx(y[2], y[3])};
}

}  // namespace oracle
