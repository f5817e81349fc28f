#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "fermsig/desitter.hpp"
#include "fermsig/massosc.hpp"
#include "fermsig/parallel.hpp"
#include "fermsig/signature.hpp"
#include "fermsig/ultrastatic.hpp"
#include "report.hpp"

namespace fermsig::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string output_format(const std::string& command, const RunConfig& cfg) {
    if (!cfg.format.empty()) return cfg.format;
    return command == "verify" ? "json" : "csv";
}

void require_finite_rows(const Table& t) {
    for (const auto& row : t.rows) {
        for (const auto& c : row) {
            if (const auto* d = std::get_if<double>(&c); d && !std::isfinite(*d)) {
                throw NumericError("non-finite value in output table");
            }
        }
    }
}

CommandResult emit_table(const Table& t, const std::string& command, const RunConfig& cfg) {
    require_finite_rows(t);
    if (output_format(command, cfg) == "csv") return {to_csv(t), 0};
    return {dump(table_json(t, command, to_json(cfg))), 0};
}

struct GridPoint {
    double lambda;
    double mass;
};

std::vector<GridPoint> grid(const RunConfig& cfg) {
    std::vector<GridPoint> out;
    for (double l : cfg.sorted_lambdas()) {
        for (double m : cfg.masses()) out.push_back({l, m});
    }
    return out;
}

void push_entries(std::vector<Cell>& row, const Mat2& a) {
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            row.emplace_back(a(i, j).real());
            row.emplace_back(a(i, j).imag());
        }
    }
}

void push_hermitian(std::vector<Cell>& row, const Mat2& a) {
    row.emplace_back(a(0, 0).real());
    row.emplace_back(a(0, 1).real());
    row.emplace_back(a(0, 1).imag());
    row.emplace_back(a(1, 1).real());
}

std::vector<std::string> hermitian_columns(const std::string& name) {
    return {name + "_11", "re_" + name + "_12", "im_" + name + "_12", name + "_22"};
}

std::vector<std::string> entry_columns(const std::string& name) {
    std::vector<std::string> out;
    for (const char* ij : {"11", "12", "21", "22"}) {
        out.push_back("re_" + name + "_" + ij);
        out.push_back("im_" + name + "_" + ij);
    }
    return out;
}

// Propagators U(t, 0) = D(t) F(t, 0) at ascending `times`, F from the f-equation.
std::vector<Mat2> desitter_propagators(const desitter::DeSitterMode& mode, const std::vector<double>& times,
                                       double rtol) {
    const auto split = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), 0.0) - times.begin());
    const std::vector<double> forward(times.begin() + split, times.end());
    std::vector<double> backward(times.begin(), times.begin() + split);
    std::reverse(backward.begin(), backward.end());
    const auto fwd = desitter::f_propagator_samples(mode, 0.0, forward, rtol);
    const auto bwd = desitter::f_propagator_samples(mode, 0.0, backward, rtol);
    std::vector<Mat2> out(times.size());
    for (std::size_t i = 0; i < split; ++i) out[i] = bwd[split - 1 - i];
    for (std::size_t i = split; i < times.size(); ++i) out[i] = fwd[i - split];
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = desitter::phase_dressing(mode.mass, times[i]) * out[i];
    return out;
}

// ---------------------------------------------------------------- evolve

CommandResult cmd_evolve(const RunConfig& cfg) {
    Table t;
    t.columns = {"lambda", "m", "t", "re_u1", "im_u1", "re_u2", "im_u2", "norm", "current", "density", "phase"};
    const auto points = grid(cfg);
    std::vector<double> times = cfg.times.values();
    std::sort(times.begin(), times.end());
    std::vector<std::vector<std::vector<Cell>>> blocks(points.size());
    const Vec2 u0 = cfg.u0.vec();

    parallel_for(points.size(), [&](std::size_t p) {
        const auto [lambda, m] = points[p];
        std::vector<Mat2> props;
        if (cfg.desitter()) {
            props = desitter_propagators(desitter::DeSitterMode(to_two_lambda(lambda), m), times, cfg.rtol);
        } else {
            for (double s : times) props.push_back(ultrastatic::evolution_matrix(lambda, m, s));
        }
        double phase = 0.0, prev_raw = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const SpinorPair u(props[i] * u0);
            // phase: unwrapped -arg <u0, u(t)>
            const double raw = -std::arg(u0.dot(u.vec()));
            if (i == 0) {
                phase = raw;
            } else {
                phase += std::remainder(raw - prev_raw, 2.0 * std::numbers::pi);
            }
            prev_raw = raw;
            blocks[p].push_back({lambda, m, times[i], u.u1.real(), u.u1.imag(), u.u2.real(), u.u2.imag(), u.norm(),
                                 mode_scalar_product(u, u).real(), mode_spacetime_density(u, u).real(), phase});
        }
    });
    for (auto& b : blocks) {
        for (auto& r : b) t.rows.push_back(std::move(r));
    }
    return emit_table(t, "evolve", cfg);
}

// ---------------------------------------------------------------- signature

CommandResult cmd_signature(const RunConfig& cfg) {
    Table t;
    t.columns = {"lambda", "m", "nu", "eig_low", "eig_high", "degenerate"};
    for (const auto& name : {"s", "p_minus", "p_plus"}) {
        for (auto& c : hermitian_columns(name)) t.columns.push_back(c);
    }
    for (const char* c : {"distance_plus", "distance_minus", "unitarity_defect"}) t.columns.push_back(c);

    const auto masses = cfg.masses();
    for (double lambda : cfg.sorted_lambdas()) {
        std::vector<signature::InterpolationRow> rows;
        if (cfg.desitter()) {
            rows = signature::interpolation_profile(to_two_lambda(lambda), masses, cfg.eps, cfg.zero_tol);
        } else {
            for (double m : masses) {
                signature::InterpolationRow r;
                r.mass = m;
                r.signature = ultrastatic::ultrastatic_signature(lambda, m);
                r.split = signature::spectral_split(r.signature, cfg.zero_tol);
                rows.push_back(r);
            }
        }
        for (const auto& r : rows) {
            std::vector<Cell> row{lambda,           r.mass, r.split.nu, r.split.eig_low, r.split.eig_high,
                                  static_cast<long long>(r.split.degenerate)};
            push_hermitian(row, r.signature.entries());
            push_hermitian(row, r.split.p_minus);
            push_hermitian(row, r.split.p_plus);
            row.emplace_back(r.distance_plus);
            row.emplace_back(r.distance_minus);
            row.emplace_back(r.unitarity_defect);
            t.rows.push_back(std::move(row));
        }
    }
    return emit_table(t, "signature", cfg);
}

// ---------------------------------------------------------------- sweep

CommandResult cmd_sweep(const RunConfig& cfg) {
    if (!cfg.desitter()) throw ConfigError("sweep tabulates de Sitter scattering data; set spacetime=desitter");
    Table t;
    t.columns = {"lambda", "m", "T_plus", "T_minus", "tail_bound", "unitarity_defect", "transition_probability"};
    for (auto& c : entry_columns("w_plus")) t.columns.push_back(c);
    for (auto& c : entry_columns("w_minus")) t.columns.push_back(c);

    const auto points = grid(cfg);
    std::vector<std::vector<Cell>> rows(points.size());
    parallel_for(points.size(), [&](std::size_t p) {
        const auto [lambda, m] = points[p];
        const auto sc = desitter::scattering_matrices(desitter::DeSitterMode(to_two_lambda(lambda), m), cfg.eps);
        const Mat2 v = sc.w_plus * sc.w_minus.adjoint();
        std::vector<Cell> row{lambda, m, sc.T_plus, sc.T_minus, sc.tail_bound, sc.unitarity_defect(), std::norm(v(1, 0))};
        push_entries(row, sc.w_plus);
        push_entries(row, sc.w_minus);
        rows[p] = std::move(row);
    });
    t.rows = std::move(rows);
    return emit_table(t, "sweep", cfg);
}

// ---------------------------------------------------------------- verify

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation = "<";  // measured relation threshold
    ojson details = ojson::array();

    ojson to_json() const {
        ojson j;
        j["name"] = name;
        j["status"] = pass ? "PASS" : "FAIL";
        j["measured"] = measured;
        j["relation"] = relation;
        j["threshold"] = threshold;
        j["margin"] = relation == ">" ? measured - threshold : threshold - measured;
        j["details"] = details;
        return j;
    }
};

struct Context {
    const RunConfig& cfg;
    MassProfile profile;
    QuadratureRule quad;
    std::vector<double> lambdas;
    std::vector<double> masses;
    massosc::Spacetime spacetime;

    explicit Context(const RunConfig& c)
        : cfg(c),
          profile(c.make_profile()),
          quad(gauss_legendre(c.interval(), c.quadrature_nodes)),
          lambdas(c.sorted_lambdas()),
          masses(c.masses()),
          spacetime(c.desitter() ? massosc::Spacetime::desitter : massosc::Spacetime::ultrastatic) {}

    // {0} together with the configured eigenvalues, ascending.
    std::vector<double> with_zero() const {
        std::set<double> s(lambdas.begin(), lambdas.end());
        s.insert(0.0);
        return {s.begin(), s.end()};
    }

    massosc::PairingOptions pairing_options() const {
        massosc::PairingOptions opt;
        opt.spacetime = spacetime;
        opt.t_max = cfg.t_max;
        opt.rtol = cfg.rtol;
        return opt;
    }
};

Check check_unitarity(const Context& c) {
    Check k{"unitarity", false, 0.0, 1e-9};
    for (double l : c.lambdas) {
        double worst = 0.0;
        for (double m : c.masses) {
            worst = std::max(worst, desitter::scattering_matrices(desitter::DeSitterMode(to_two_lambda(l), m), c.cfg.eps)
                                        .unitarity_defect());
        }
        k.details.push_back({{"lambda", l}, {"max_defect", worst}});
        k.measured = std::max(k.measured, worst);
    }
    k.pass = k.measured < k.threshold;
    return k;
}

Check check_conservation(const Context& c) {
    Check k{"current_conservation", false, 0.0, 1e-9};
    std::vector<double> times;
    for (int i = -12; i <= 12; ++i) times.push_back(2.5 * i);
    const Vec2 a = c.cfg.u0.vec();
    const Vec2 b(cplx(-0.2, 0.5), cplx(0.9, 0.1));
    const std::vector<double> ms{c.masses.front(), c.cfg.interval().midpoint(), c.masses.back()};
    for (double l : c.lambdas) {
        double worst = 0.0;
        for (double m : ms) {
            const auto props = desitter_propagators(desitter::DeSitterMode(to_two_lambda(l), m), times,
                                                    c.cfg.conservation_rtol);
            const cplx ref = kTwoPi * a.dot(b);
            for (const auto& u : props) worst = std::max(worst, std::abs(kTwoPi * (u * a).dot(u * b) - ref));
        }
        k.details.push_back({{"lambda", l}, {"max_drift", worst}});
        k.measured = std::max(k.measured, worst);
    }
    k.pass = k.measured < k.threshold;
    return k;
}

Check check_gronwall(const Context& c) {
    Check k{"gronwall_certificate", false, 0.0, 0.5, "<"};
    std::vector<double> abs_times;
    for (double t = 2.0; t <= 30.0 + 1e-12; t += 0.25) abs_times.push_back(t);
    const double eps = 1e-14;
    long long violations = 0, samples = 0;
    double tightest = INFINITY;  // smallest envelope / residual
    for (double l : c.lambdas) {
        if (l == 0.0) continue;
        const double T = desitter::truncation_time(l, eps);
        for (double m : c.masses) {
            const desitter::DeSitterMode mode(to_two_lambda(l), m);
            for (auto dir : {desitter::Direction::future, desitter::Direction::past}) {
                const double sign = dir == desitter::Direction::future ? 1.0 : -1.0;
                std::vector<double> times;
                for (double t : abs_times) times.push_back(sign * t);
                times.push_back(sign * std::max(T, 31.0));
                const auto props = desitter::f_propagator_samples(mode, 0.0, times, 1e-14);
                const Vec2 f0 = c.cfg.u0.vec();
                const Vec2 f_inf = props.back() * f0;
                for (std::size_t i = 0; i + 1 < times.size(); ++i) {
                    const double residual = (props[i] * f0 - f_inf).norm();
                    const double env = desitter::gronwall_envelope(l, f_inf.norm(), times[i], dir);
                    ++samples;
                    if (residual > env) ++violations;
                    if (residual > 0.0) tightest = std::min(tightest, env / residual);
                }
            }
        }
    }
    k.measured = static_cast<double>(violations);
    k.details.push_back({{"samples", samples}, {"violations", violations}, {"min_envelope_over_residual", tightest}});
    k.pass = violations == 0;
    return k;
}

Check check_structure(const Context& c) {
    Check k{"signature_structure", false, 0.0, 1e-12};
    double herm = 0.0, trace = 0.0, norm = 0.0, pair = 0.0, trivial = 0.0;
    for (double l : c.with_zero()) {
        for (double sign : {1.0, -1.0}) {
            if (l == 0.0 && sign < 0) continue;
            for (double m : c.masses) {
                const auto s = signature::assemble_signature(to_two_lambda(sign * l), m, c.cfg.eps);
                herm = std::max(herm, s.hermitian_defect());
                trace = std::max(trace, s.trace_defect());
                norm = std::max(norm, s.norm());
                const auto sp = signature::spectral_split(s, c.cfg.zero_tol);
                pair = std::max(pair, std::abs(sp.eig_high + sp.eig_low));
                if (l == 0.0) trivial = std::max(trivial, max_abs(s.entries() - sigma3()));
            }
        }
    }
    k.measured = std::max({herm, trace, pair});
    k.details.push_back({{"hermitian_defect", herm},
                         {"trace_defect", trace},
                         {"eigenvalue_pair_defect", pair},
                         {"max_norm", norm},
                         {"norm_bound", 1.0 + 1e-9},
                         {"trivial_mode_defect", trivial},
                         {"trivial_mode_bound", 1e-10}});
    k.pass = k.measured < k.threshold && norm <= 1.0 + 1e-9 && trivial < 1e-10;
    return k;
}

Check check_decay(const Context& c) {
    Check k{"decay", false, 0.0, 0.05};
    const QuadratureRule fine = gauss_legendre(c.cfg.interval(), 2 * c.cfg.quadrature_nodes);
    for (double l : c.with_zero()) {
        const massosc::MassFamily fam{c.profile, c.cfg.u0, l};
        const auto a = massosc::measure_decay(fam, 10.0, 100.0, 451, c.quad, c.cfg.rtol, c.spacetime);
        const auto b = massosc::measure_decay(fam, 10.0, 100.0, 451, fine, c.cfg.rtol, c.spacetime);
        if (!std::isfinite(a.sup_scaled) || !std::isfinite(b.sup_scaled)) throw NumericError("decay: non-finite sup");
        const double change = std::abs(a.sup_scaled - b.sup_scaled) / b.sup_scaled;
        k.details.push_back({{"lambda", l},
                             {"sup_scaled", a.sup_scaled},
                             {"sup_scaled_refined", b.sup_scaled},
                             {"t_at_sup", a.t_at_sup},
                             {"relative_change", change}});
        k.measured = std::max(k.measured, change);
    }
    k.pass = k.measured < k.threshold;
    return k;
}

Check check_oracle(const Context& c) {
    Check k{"oracle_equivalence", false, 0.0, 1e-3};
    const auto opt = c.pairing_options();
    for (double l : c.lambdas) {
        const Mat2 cf = signature::signature_pairing_matrix(c.profile, c.profile, to_two_lambda(l), c.quad, c.cfg.eps);
        const auto td = massosc::pairing_matrix_time_domain(c.profile, c.profile, l, c.quad, opt);
        const double diff = max_abs(td.value - cf);
        const double rel = diff / operator_norm(cf);
        k.details.push_back({{"lambda", l},
                             {"closed_form_norm", operator_norm(cf)},
                             {"max_entry_difference", diff},
                             {"relative_error", rel},
                             {"estimated_error", td.error()},
                             {"tail_error", td.tail_error},
                             {"quadrature_error", td.quadrature_error}});
        k.measured = std::max(k.measured, rel);
    }
    k.pass = k.measured < k.threshold;
    return k;
}

Check check_plancherel(const Context& c) {
    Check k{"plancherel", false, 0.0, 1e-4};
    const auto opt = c.pairing_options();
    for (double l : c.lambdas) {
        const Mat2 exact = ultrastatic::plancherel_pairing_matrix(c.profile, c.profile, l, c.quad);
        const auto td = massosc::pairing_matrix_time_domain(c.profile, c.profile, l, c.quad, opt);
        const double diff = max_abs(td.value - exact);
        k.details.push_back({{"lambda", l},
                             {"max_entry_difference", diff},
                             {"estimated_error", td.error()},
                             {"tail_error", td.tail_error},
                             {"quadrature_error", td.quadrature_error}});
        k.measured = std::max(k.measured, diff);
    }
    k.pass = k.measured < k.threshold;
    return k;
}

Check check_t_symmetry(const Context& c) {
    // measured: largest |difference| / combined error estimate
    Check k{"t_symmetry", false, 0.0, 1.0, "<="};
    const auto opt = c.pairing_options();
    std::set<double> ls{0.0, c.lambdas.front()};
    for (double l : ls) {
        const massosc::MassFamily a{c.profile, c.cfg.u0, l};
        const massosc::MassFamily b{c.profile, SpinorPair(cplx(0.1, -0.5), 1.0), l};
        const auto left = massosc::pairing_time_domain(a.times_mass(), b, c.quad, opt);
        const auto right = massosc::pairing_time_domain(a, b.times_mass(), c.quad, opt);
        const double diff = std::abs(left.value - right.value);
        const double budget = left.error + right.error;
        k.details.push_back({{"lambda", l},
                             {"re_left", left.value.real()},
                             {"im_left", left.value.imag()},
                             {"difference", diff},
                             {"combined_error", budget}});
        k.measured = std::max(k.measured, budget > 0.0 ? diff / budget : (diff > 0.0 ? INFINITY : 0.0));
    }
    k.pass = k.measured <= k.threshold;
    return k;
}

Check check_strong_mop(const Context& c) {
    // measured: smallest (rhs + error - |lhs|)
    Check k{"strong_mop_bound", false, INFINITY, 0.0, ">"};
    const auto opt = c.pairing_options();
    for (double l : c.lambdas) {
        const massosc::MassFamily a{c.profile, c.cfg.u0, l};
        const massosc::MassFamily b{c.profile, SpinorPair(0.6, cplx(0.0, 0.8)), l};
        const auto r = massosc::strong_mop_bound_check(a, b, c.quad, opt);
        k.details.push_back(
            {{"lambda", l}, {"lhs_abs", r.lhs_abs}, {"rhs", r.rhs}, {"error", r.error}, {"margin", r.margin}});
        k.measured = std::min(k.measured, r.rhs + r.error - r.lhs_abs);
    }
    k.pass = k.measured > k.threshold;
    return k;
}

Check check_interval_independence(const Context& c) {
    Check k{"interval_independence", false, 0.0, 2e-3};
    const MassInterval I = c.cfg.interval();
    const double L = I.length();
    const MassInterval sub(I.lower() + 0.3 * L, I.upper() - 0.3 * L);
    const double l = c.lambdas.front();
    signature::IntervalIndependenceOptions opt;
    opt.eps = c.cfg.eps;
    opt.rtol = c.cfg.rtol;
    opt.tolerance = k.threshold;
    const auto r = signature::interval_independence_check(to_two_lambda(l), I.midpoint(), I, sub, opt);
    for (const auto& row : r.rows) {
        k.details.push_back({{"lambda", l},
                             {"m", I.midpoint()},
                             {"width", row.width},
                             {"difference", row.difference},
                             {"outer_to_closed_form", row.outer_to_closed},
                             {"inner_to_closed_form", row.inner_to_closed}});
    }
    k.measured = r.rows.back().difference;
    k.pass = r.pass;
    return k;
}

Check check_spatial_normalization(const Context& c) {
    Check k{"spatial_normalization", false, 0.0, 1e-8};
    signature::SpatialNormalizationOptions opt;
    opt.eps = c.cfg.eps;
    opt.zero_tol = c.cfg.zero_tol;
    bool all = true;
    const double m = c.cfg.interval().midpoint();
    for (double l : c.with_zero()) {
        const auto r = signature::spatial_normalization_check(to_two_lambda(l), m, c.cfg.t_check, opt);
        k.details.push_back({{"lambda", l},
                             {"m", m},
                             {"status", signature::to_string(r.status)},
                             {"idempotence_defect", r.idempotence_defect},
                             {"orthogonality_defect", r.orthogonality_defect},
                             {"commutation_defect", r.commutation_defect},
                             {"mass_normalization_defect", r.mass_normalization_defect},
                             {"nu", r.nu}});
        all = all && r.status == signature::CheckStatus::pass;
        k.measured = std::max(k.measured, r.commutation_defect);
    }
    k.pass = all;
    return k;
}

Check check_ultrastatic_spectrum(const Context& c) {
    Check k{"ultrastatic_spectrum", false, 0.0, 1e-13};
    double proj = 0.0;
    for (double l : c.lambdas) {
        for (double sign : {1.0, -1.0}) {
            for (double m : c.masses) {
                const auto s = ultrastatic::ultrastatic_signature(sign * l, m);
                const auto sp = signature::spectral_split(s, c.cfg.zero_tol);
                k.measured = std::max({k.measured, std::abs(sp.eig_high - 1.0), std::abs(sp.eig_low + 1.0)});
                const auto fd = ultrastatic::frequency_split(sign * l, m);
                proj = std::max({proj, max_abs(fd.pi_plus * fd.pi_plus - fd.pi_plus),
                                 max_abs(fd.pi_plus * fd.pi_minus),
                                 max_abs(fd.pi_plus + fd.pi_minus - Mat2::Identity())});
            }
        }
    }
    k.details.push_back({{"max_eigenvalue_defect", k.measured}, {"projector_defect", proj}, {"projector_bound", 1e-14}});
    k.pass = k.measured < k.threshold && proj < 1e-14;
    return k;
}

CommandResult cmd_verify(const RunConfig& cfg) {
    const Context ctx(cfg);
    std::vector<std::function<Check(const Context&)>> suite;
    if (cfg.desitter()) {
        suite = {check_unitarity, check_conservation,          check_gronwall,     check_structure,
                 check_decay,     check_oracle,                check_t_symmetry,   check_strong_mop,
                 check_interval_independence, check_spatial_normalization};
    } else {
        suite = {check_ultrastatic_spectrum, check_decay, check_plancherel, check_t_symmetry, check_strong_mop};
    }
    std::vector<Check> checks;
    for (const auto& f : suite) checks.push_back(f(ctx));
    long long failed = 0;
    for (const auto& k : checks) failed += k.pass ? 0 : 1;
    const int code = failed == 0 ? 0 : 1;

    if (output_format("verify", cfg) == "csv") {
        Table t;
        t.columns = {"name", "status", "measured", "relation", "threshold"};
        for (const auto& k : checks) {
            t.rows.push_back({k.name, std::string(k.pass ? "PASS" : "FAIL"), k.measured, k.relation, k.threshold});
        }
        return {to_csv(t), code};
    }
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "verify";
    j["config"] = to_json(cfg);
    auto arr = ojson::array();
    for (const auto& k : checks) arr.push_back(k.to_json());
    j["checks"] = std::move(arr);
    j["summary"] = {{"checks", static_cast<long long>(checks.size())},
                    {"passed", static_cast<long long>(checks.size()) - failed},
                    {"failed", failed}};
    j["all_pass"] = failed == 0;
    return {dump(j), code};
}

}  // namespace

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
    try {
        if (command == "evolve") return cmd_evolve(cfg);
        if (command == "signature") return cmd_signature(cfg);
        if (command == "sweep") return cmd_sweep(cfg);
        if (command == "verify") return cmd_verify(cfg);
    } catch (const ode::IntegrationError& e) {
        throw NumericError(e.what());
    }
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace fermsig::cli
