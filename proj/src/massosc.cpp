#include "fermsig/massosc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fermsig/desitter.hpp"
#include "fermsig/parallel.hpp"
#include "fermsig/ultrastatic.hpp"

namespace fermsig::massosc {

namespace {

// Gauss-Kronrod 15-point abscissae on [-1, 1] (positive half, descending) and
// weights; the 7-point Gauss rule uses abscissae 1, 3, 5, 7.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr std::size_t kBlock = 16;

void check_lambda(double lambda, Spacetime spacetime) {
    if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
    if (spacetime == Spacetime::desitter) (void)to_two_lambda(lambda);
}

// int_T^inf dt/(1+t^2)^2
double tail_integral(double T) { return 0.5 * (std::atan(1.0 / T) - T / (1.0 + T * T)); }

}  // namespace

SpinorPair p_integrate(const MassFamily& family, double t, const QuadratureRule& quad, double rtol,
                       Spacetime spacetime) {
    check_lambda(family.lambda, spacetime);
    require_finite(family.u0, "p_integrate");
    if (spacetime == Spacetime::ultrastatic) {
        return ultrastatic::p_integrate_ultrastatic(family.profile, family.u0, family.lambda, t, quad);
    }
    const int two_lambda = to_two_lambda(family.lambda);
    Vec2 acc = Vec2::Zero();
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double eta = family.profile(quad.nodes[k]);
        if (eta == 0.0) continue;
        const desitter::DeSitterMode mode(two_lambda, quad.nodes[k]);
        acc += (quad.weights[k] * eta) * desitter::evolve_mode(family.u0, mode, 0.0, t, rtol).vec();
    }
    return SpinorPair(acc);
}

std::vector<std::vector<Mat2>> sample_mass_integrated(std::span<const MassProfile> profiles, double lambda,
                                                      const QuadratureRule& quad, std::span<const double> times,
                                                      double rtol, Spacetime spacetime) {
    check_lambda(lambda, spacetime);
    if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be positive");
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("sample times must be ascending");
    for (double t : times) {
        if (!std::isfinite(t)) throw std::invalid_argument("sample times must be finite");
    }
    const std::size_t np = profiles.size();
    const std::size_t nt = times.size();

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        for (const auto& p : profiles) {
            if (p(quad.nodes[k]) != 0.0) {
                active.push_back(k);
                break;
            }
        }
    }

    const auto first_nonneg =
        static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), 0.0) - times.begin());
    std::vector<double> negative_desc(times.begin(), times.begin() + first_nonneg);
    std::reverse(negative_desc.begin(), negative_desc.end());
    const std::span<const double> nonneg = times.subspan(first_nonneg);

    // Fixed node blocks keep the summation order independent of the thread count.
    const std::size_t nblocks = (active.size() + kBlock - 1) / kBlock;
    std::vector<std::vector<std::vector<Mat2>>> partial(
        nblocks, std::vector<std::vector<Mat2>>(np, std::vector<Mat2>(nt, Mat2::Zero())));

    parallel_for(nblocks, [&](std::size_t b) {
        auto& acc = partial[b];
        const std::size_t end = std::min(active.size(), (b + 1) * kBlock);
        std::vector<double> coeff(np);
        for (std::size_t j = b * kBlock; j < end; ++j) {
            const std::size_t k = active[j];
            const double m = quad.nodes[k];
            for (std::size_t p = 0; p < np; ++p) coeff[p] = quad.weights[k] * profiles[p](m);
            auto deposit = [&](std::size_t idx, const Mat2& u) {
                for (std::size_t p = 0; p < np; ++p) {
                    if (coeff[p] != 0.0) acc[p][idx] += coeff[p] * u;
                }
            };
            if (spacetime == Spacetime::ultrastatic) {
                for (std::size_t i = 0; i < nt; ++i) deposit(i, ultrastatic::evolution_matrix(lambda, m, times[i]));
                continue;
            }
            const desitter::DeSitterMode mode(to_two_lambda(lambda), m);
            if (mode.two_lambda == 0) {
                for (std::size_t i = 0; i < nt; ++i) deposit(i, desitter::phase_dressing(m, times[i]));
                continue;
            }
            const auto opt = desitter::integrator_options(mode, rtol);
            auto rhs = [&mode](double t, const Mat2& f) -> Mat2 {
                return desitter::interaction_generator(mode, t) * f;
            };
            if (!nonneg.empty()) {
                ode::integrate(rhs, 0.0, Mat2(Mat2::Identity()), nonneg.back(), nonneg,
                               [&](std::size_t i, const Mat2& f) {
                                   const double t = nonneg[i];
                                   deposit(first_nonneg + i, desitter::phase_dressing(m, t) * f);
                               },
                               opt);
            }
            if (!negative_desc.empty()) {
                ode::integrate(rhs, 0.0, Mat2(Mat2::Identity()), negative_desc.back(), negative_desc,
                               [&](std::size_t i, const Mat2& f) {
                                   const double t = negative_desc[i];
                                   deposit(first_nonneg - 1 - i, desitter::phase_dressing(m, t) * f);
                               },
                               opt);
            }
        }
    });

    std::vector<std::vector<Mat2>> out(np, std::vector<Mat2>(nt, Mat2::Zero()));
    for (const auto& block : partial) {
        for (std::size_t p = 0; p < np; ++p) {
            for (std::size_t i = 0; i < nt; ++i) out[p][i] += block[p][i];
        }
    }
    return out;
}

TimeGrid make_time_grid(double t_max, double panel, double far_panel, double far_start) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive and finite");
    if (!(panel > 0.0) || !(far_panel > 0.0)) throw std::invalid_argument("panel widths must be positive");

    // Panels on [0, t_max], ascending.
    std::vector<std::pair<double, double>> positive;
    auto split = [&positive](double lo, double hi, double width) {
        if (!(hi > lo)) return;
        const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
        const double h = (hi - lo) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            positive.emplace_back(lo + h * i, i + 1 == n ? hi : lo + h * (i + 1));
        }
    };
    const double near_end = std::clamp(far_start, 0.0, t_max);
    split(0.0, near_end, panel);
    split(near_end, t_max, far_panel);

    std::vector<std::pair<double, double>> all;
    all.reserve(2 * positive.size());
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) all.emplace_back(-it->second, -it->first);
    all.insert(all.end(), positive.begin(), positive.end());

    TimeGrid grid;
    grid.panels = all.size();
    grid.nodes.reserve(15 * all.size());
    for (std::size_t p = 0; p < all.size(); ++p) {
        const double c = 0.5 * (all[p].first + all[p].second);
        const double h = 0.5 * (all[p].second - all[p].first);
        for (int j = -7; j <= 7; ++j) {
            const std::size_t a = static_cast<std::size_t>(7 - std::abs(j));
            const double x = j < 0 ? -kXgk[a] : kXgk[a];
            grid.nodes.push_back(c + h * x);
            grid.kronrod.push_back(h * kWgk[a]);
            grid.gauss.push_back(a % 2 == 1 ? h * kWg[a / 2] : 0.0);
            grid.panel_of.push_back(p);
        }
    }
    return grid;
}

PairingMatrix pairing_matrix_time_domain(const MassProfile& a, const MassProfile& b, double lambda,
                                         const QuadratureRule& quad, const PairingOptions& opt) {
    const bool ultra = opt.spacetime == Spacetime::ultrastatic;
    const TimeGrid grid = make_time_grid(opt.t_max, opt.panel, ultra ? opt.panel : opt.far_panel, opt.far_start);
    const std::array<MassProfile, 2> profiles{a, b};
    const auto sampled = sample_mass_integrated(profiles, lambda, quad, grid.nodes, opt.rtol, opt.spacetime);

    const Mat2 s3 = sigma3();
    PairingMatrix out;
    std::vector<Mat2> kron(grid.panels, Mat2::Zero());
    std::vector<Mat2> gauss(grid.panels, Mat2::Zero());
    double norm_integral_a = 0.0;
    double norm_integral_b = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const Mat2& pa = sampled[0][i];
        const Mat2& pb = sampled[1][i];
        const Mat2 density = pa.adjoint() * s3 * pb;
        kron[grid.panel_of[i]] += grid.kronrod[i] * density;
        gauss[grid.panel_of[i]] += grid.gauss[i] * density;
        norm_integral_a += grid.kronrod[i] * operator_norm(pa);
        norm_integral_b += grid.kronrod[i] * operator_norm(pb);
        const double t = grid.nodes[i];
        if (std::abs(t) >= 0.1 * opt.t_max) {
            const double s = 1.0 + t * t;
            out.tail_amplitude = std::max(out.tail_amplitude, max_abs(density) * s * s);
        }
    }
    for (std::size_t p = 0; p < grid.panels; ++p) {
        out.value += kron[p];
        out.quadrature_error += max_abs(kron[p] - gauss[p]);
    }
    out.tail_error = 2.0 * out.tail_amplitude * tail_integral(opt.t_max);

    if (!ultra) {
        double mass_a = 0.0;
        double mass_b = 0.0;
        for (std::size_t k = 0; k < quad.size(); ++k) {
            mass_a += quad.weights[k] * std::abs(a(quad.nodes[k]));
            mass_b += quad.weights[k] * std::abs(b(quad.nodes[k]));
        }
        // Global propagation error per unit datum taken as 100 rtol.
        out.ode_error = 100.0 * opt.rtol * (mass_a * norm_integral_b + mass_b * norm_integral_a);
    }
    return out;
}

PairingResult pairing_time_domain(const MassFamily& a, const MassFamily& b, const QuadratureRule& quad,
                                  const PairingOptions& opt) {
    if (a.lambda != b.lambda) {
        throw std::invalid_argument("pairing_time_domain: families live on different spatial modes (lambda " +
                                    std::to_string(a.lambda) + " vs " + std::to_string(b.lambda) + ")");
    }
    require_finite(a.u0, "pairing_time_domain");
    require_finite(b.u0, "pairing_time_domain");
    PairingResult out;
    out.matrix = pairing_matrix_time_domain(a.profile, b.profile, a.lambda, quad, opt);
    out.value = a.u0.vec().dot(out.matrix.value * b.u0.vec());
    out.error = 2.0 * out.matrix.error() * a.u0.norm() * b.u0.norm();
    return out;
}

PairingResult pairing_time_domain(const MassFamily& a, const MassFamily& b, double t_max, const QuadratureRule& quad,
                                  double rtol, Spacetime spacetime) {
    PairingOptions opt;
    opt.spacetime = spacetime;
    opt.t_max = t_max;
    opt.rtol = rtol;
    return pairing_time_domain(a, b, quad, opt);
}

DecayReport measure_decay(const MassFamily& family, double t_lo, double t_hi, int n, const QuadratureRule& quad,
                          double rtol, Spacetime spacetime) {
    if (n < 2 || !(t_hi > t_lo)) throw std::invalid_argument("measure_decay: need n >= 2 and t_hi > t_lo");
    DecayReport out;
    out.times.resize(n);
    for (int i = 0; i < n; ++i) out.times[i] = t_lo + (t_hi - t_lo) * i / (n - 1);
    const std::array<MassProfile, 1> profiles{family.profile};
    const auto sampled = sample_mass_integrated(profiles, family.lambda, quad, out.times, rtol, spacetime);
    out.norms.resize(n);
    const Vec2 u0 = family.u0.vec();
    for (int i = 0; i < n; ++i) {
        out.norms[i] = (sampled[0][i] * u0).norm();
        const double t = out.times[i];
        const double scaled = (1.0 + t * t) * out.norms[i];
        if (scaled > out.sup_scaled) {
            out.sup_scaled = scaled;
            out.t_at_sup = t;
        }
    }
    return out;
}

StrongMopReport strong_mop_bound_check(const MassFamily& a, const MassFamily& b, const QuadratureRule& quad,
                                       const PairingOptions& opt) {
    const PairingResult pr = pairing_time_domain(a, b, quad, opt);
    StrongMopReport out;
    out.lhs = pr.value;
    out.lhs_abs = std::abs(pr.value);
    out.error = pr.error;
    double overlap = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        overlap += quad.weights[k] * std::abs(a.profile(quad.nodes[k]) * b.profile(quad.nodes[k]));
    }
    // |psi_m|_m = sqrt(2 pi) |eta(m)| |u0|
    out.rhs = kTwoPi * overlap * a.u0.norm() * b.u0.norm();
    out.margin = out.rhs - out.lhs_abs;
    out.pass = out.lhs_abs <= out.rhs + out.error;
    return out;
}

}  // namespace fermsig::massosc
