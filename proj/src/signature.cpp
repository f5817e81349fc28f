#include "fermsig/signature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fermsig/parallel.hpp"

namespace fermsig::signature {

SignatureMatrix assemble_signature(const desitter::ScatteringPair& scattering, int two_lambda, double m) {
    const Mat2 s3 = sigma3();
    const Mat2 plus = scattering.w_plus.adjoint() * s3 * scattering.w_plus;
    const Mat2 minus = scattering.w_minus.adjoint() * s3 * scattering.w_minus;
    return SignatureMatrix(0.5 * (plus + minus), 0.5 * two_lambda, m);
}

SignatureMatrix assemble_signature(int two_lambda, double m, double eps, const desitter::AsymptoticOptions& opt) {
    const desitter::DeSitterMode mode(two_lambda, m);
    return assemble_signature(desitter::scattering_matrices(mode, eps, opt), two_lambda, m);
}

SpectralSplit spectral_split(const SignatureMatrix& s, double zero_tol) {
    const Mat2& h = s.entries();
    // h = c 1 + K with K trace-free Hermitian, eigenvalues c +- |K|.
    const double c = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double a = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const cplx b = 0.5 * (h(0, 1) + std::conj(h(1, 0)));
    const double gap = std::sqrt(a * a + std::norm(b));

    SpectralSplit out;
    out.nu = gap;
    out.eig_low = c - gap;
    out.eig_high = c + gap;

    std::array<Mat2, 2> proj;  // low, high
    if (gap == 0.0) {
        proj[0] = Mat2::Zero();
        proj[1] = Mat2::Identity();
    } else {
        Mat2 k;
        k << a, b, std::conj(b), -a;
        proj[0] = 0.5 * (Mat2::Identity() - k / gap);
        proj[1] = 0.5 * (Mat2::Identity() + k / gap);
    }
    const std::array<double, 2> eig{out.eig_low, out.eig_high};
    for (int i = 0; i < 2; ++i) {
        if (gap == 0.0 && i == 0) continue;
        if (eig[i] > zero_tol) {
            out.p_plus += proj[i];
        } else if (eig[i] < -zero_tol) {
            out.p_minus += proj[i];
        } else {
            out.degenerate = true;
        }
    }
    return out;
}

cplx closed_form_pairing(const massosc::MassFamily& a, const massosc::MassFamily& b, const QuadratureRule& quad,
                         double eps) {
    if (a.lambda != b.lambda) throw std::invalid_argument("closed_form_pairing: families on different spatial modes");
    const int two_lambda = to_two_lambda(a.lambda);
    const Mat2 s3 = sigma3();
    std::vector<cplx> terms(quad.size(), cplx{});
    parallel_for(quad.size(), [&](std::size_t k) {
        const double m = quad.nodes[k];
        const double weight = quad.weights[k] * a.profile(m) * b.profile(m);
        if (weight == 0.0) return;
        const desitter::DeSitterMode mode(two_lambda, m);
        const auto fa = desitter::extract_asymptotics(a.u0, mode, eps);
        const auto fb = desitter::extract_asymptotics(b.u0, mode, eps);
        const cplx plus = fa.f_plus.vec().dot(s3 * fb.f_plus.vec());
        const cplx minus = fa.f_minus.vec().dot(s3 * fb.f_minus.vec());
        terms[k] = weight * (plus + minus);
    });
    cplx acc{};
    for (const auto& t : terms) acc += t;
    return std::numbers::pi * acc;
}

Mat2 signature_pairing_matrix(const MassProfile& a, const MassProfile& b, int two_lambda, const QuadratureRule& quad,
                              double eps) {
    std::vector<Mat2> terms(quad.size(), Mat2::Zero());
    parallel_for(quad.size(), [&](std::size_t k) {
        const double m = quad.nodes[k];
        const double weight = quad.weights[k] * a(m) * b(m);
        if (weight == 0.0) return;
        terms[k] = weight * assemble_signature(two_lambda, m, eps).entries();
    });
    Mat2 acc = Mat2::Zero();
    for (const auto& t : terms) acc += t;
    return kTwoPi * acc;
}

IntervalIndependenceReport interval_independence_check(int two_lambda, double m, const MassInterval& outer,
                                                       const MassInterval& inner,
                                                       const IntervalIndependenceOptions& opt) {
    if (!outer.encloses(inner)) throw std::invalid_argument("interval_independence_check: subinterval not inside I");
    if (!inner.contains(m)) throw std::invalid_argument("interval_independence_check: m outside the subinterval");
    if (opt.widths.empty()) throw std::invalid_argument("interval_independence_check: no bump widths");

    IntervalIndependenceReport report;
    report.tolerance = opt.tolerance;
    report.closed_form = assemble_signature(two_lambda, m, opt.eps).entries();

    auto estimate = [&](const MassInterval& J, double w, double& error) {
        const MassProfile profile = MassProfile::bump(J, m, w);
        const int n = std::max(64, static_cast<int>(std::ceil(opt.nodes_per_width * J.length() / w)));
        const QuadratureRule quad = gauss_legendre(J, n);
        massosc::PairingOptions popt;
        popt.rtol = opt.rtol;
        popt.t_max = std::max(opt.t_max_min, opt.t_max_scale / w);
        const auto pm = massosc::pairing_matrix_time_domain(profile, profile, 0.5 * two_lambda, quad, popt);
        double norm = 0.0;
        for (std::size_t k = 0; k < quad.size(); ++k) {
            const double eta = profile(quad.nodes[k]);
            norm += quad.weights[k] * eta * eta;
        }
        error = pm.error() / (kTwoPi * norm);
        return Mat2(pm.value / (kTwoPi * norm));
    };

    for (double w : opt.widths) {
        IntervalEstimate row;
        row.width = w;
        row.estimate_outer = estimate(outer, w, row.error_outer);
        row.estimate_inner = estimate(inner, w, row.error_inner);
        row.difference = max_abs(row.estimate_outer - row.estimate_inner);
        row.outer_to_closed = max_abs(row.estimate_outer - report.closed_form);
        row.inner_to_closed = max_abs(row.estimate_inner - report.closed_form);
        report.rows.push_back(row);
    }
    const auto narrowest = std::min_element(report.rows.begin(), report.rows.end(),
                                            [](const auto& x, const auto& y) { return x.width < y.width; });
    report.pass = report.interval_free && narrowest->difference < opt.tolerance;
    return report;
}

double signature_variation(int two_lambda, double m, double dm, double eps) {
    return max_abs(assemble_signature(two_lambda, m + dm, eps).entries() -
                   assemble_signature(two_lambda, m, eps).entries());
}

const char* to_string(CheckStatus s) noexcept {
    switch (s) {
        case CheckStatus::pass:
            return "PASS";
        case CheckStatus::fail:
            return "FAIL";
        case CheckStatus::inconclusive:
            return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

SpatialNormalizationReport spatial_normalization_check(int two_lambda, double m, double t_check,
                                                       const SpatialNormalizationOptions& opt) {
    if (!std::isfinite(t_check)) throw std::invalid_argument("spatial_normalization_check: t_check must be finite");
    const desitter::DeSitterMode mode(two_lambda, m);

    const SignatureMatrix s0 = assemble_signature(two_lambda, m, opt.eps);
    desitter::AsymptoticOptions at_check;
    at_check.t_start = t_check;
    const SignatureMatrix st = assemble_signature(two_lambda, m, opt.eps, at_check);
    const SpectralSplit split0 = spectral_split(s0, opt.zero_tol);
    const SpectralSplit split_t = spectral_split(st, opt.zero_tol);

    SpatialNormalizationReport out;
    out.nu = split0.nu;
    if (split0.degenerate || split_t.degenerate) return out;

    const Mat2& pm = split0.p_minus;
    out.idempotence_defect = max_abs(pm * pm - pm);
    out.orthogonality_defect = max_abs(split0.p_plus * pm);
    out.symmetry_defect = max_abs(pm.adjoint() - pm);
    out.mass_normalization_defect = max_abs(s0.entries() * pm + split0.nu * pm);

    for (int j = 0; j < 2; ++j) {
        const SpinorPair e = SpinorPair::basis(j);
        const SpinorPair forward = desitter::evolve_mode(e, mode, 0.0, t_check, opt.rtol);
        const SpinorPair projected(split_t.p_minus * forward.vec());
        const SpinorPair back = desitter::evolve_mode(projected, mode, t_check, 0.0, opt.rtol);
        out.commutation_defect = std::max(out.commutation_defect, (back.vec() - pm * e.vec()).norm());
    }
    const bool ok = out.idempotence_defect < opt.idempotence_tolerance &&
                    out.orthogonality_defect < opt.idempotence_tolerance &&
                    out.commutation_defect < opt.commutation_tolerance;
    out.status = ok ? CheckStatus::pass : CheckStatus::fail;
    return out;
}

std::vector<InterpolationRow> interpolation_profile(int two_lambda, const std::vector<double>& mass_grid, double eps,
                                                    double zero_tol) {
    for (double m : mass_grid) {
        if (!(m > 0.0)) throw std::invalid_argument("interpolation_profile: masses must be positive");
    }
    std::vector<InterpolationRow> rows(mass_grid.size());
    const Mat2 s3 = sigma3();
    parallel_for(mass_grid.size(), [&](std::size_t i) {
        const double m = mass_grid[i];
        const desitter::DeSitterMode mode(two_lambda, m);
        const auto sc = desitter::scattering_matrices(mode, eps);
        InterpolationRow& row = rows[i];
        row.mass = m;
        row.signature = assemble_signature(sc, two_lambda, m);
        row.split = spectral_split(row.signature, zero_tol);
        row.distance_plus = operator_norm(row.signature.entries() - sc.w_plus.adjoint() * s3 * sc.w_plus);
        row.distance_minus = operator_norm(row.signature.entries() - sc.w_minus.adjoint() * s3 * sc.w_minus);
        row.unitarity_defect = sc.unitarity_defect();
    });
    return rows;
}

}  // namespace fermsig::signature
