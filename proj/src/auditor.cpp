#include "degenlab/auditor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_times(const std::vector<double>& t_grid, const char* what) {
    for (double t : t_grid)
        if (!std::isfinite(t) || t <= 0.0) throw ParameterError(std::string(what) + ": times must be positive");
}

void require_disjoint(const SetMask& a, const SetMask& b, const char* what) {
    if (a.empty() || b.empty()) throw ParameterError(std::string(what) + ": sets must be non-empty");
    if (a.intersects(b)) throw ParameterError(std::string(what) + ": sets overlap");
}

}  // namespace

std::vector<double> rho_grid(double gap, double t) {
    std::vector<double> grid;
    if (!(gap > 0.0)) return grid;
    const double star = gap / (2.0 * t);
    const double lo = star / 8.0;
    const double ratio = std::pow(16.0, 1.0 / 63.0);
    grid.reserve(64);
    for (int k = 0; k < 64; ++k) grid.push_back(lo * std::pow(ratio, k));
    return grid;
}

std::vector<AuditRecord> gaussian_bound_audit(const Propagator& prop, const SetMask& a, const SetMask& b,
                                              const std::vector<double>& t_grid, const std::string& subject,
                                              double continuum_tolerance) {
    require_disjoint(a, b, "gaussian_bound_audit");
    require_times(t_grid, "gaussian_bound_audit");
    const DiscreteForm& form = prop.form();
    const DistanceReport dist = set_distance(form, a, b, DistanceMode::d);
    const double norms = l2_norm(form, a.indicator()) * l2_norm(form, b.indicator());
    const double gap = dist.certificate ? pointwise_gap(*dist.certificate, a, b) : kInf;

    std::vector<AuditRecord> out;
    for (double t : t_grid) {
        const double left = std::abs(prop.cross_inner(a, b, t, PropagatorKind::heat));
        const double paper_right = std::isfinite(dist.value) ? std::exp(-dist.value * dist.value / (4.0 * t)) * norms : 0.0;
        out.push_back(make_record("gaussian_paper", RecordKind::continuum, subject, {{"t", t}, {"d", dist.value}},
                                  left, paper_right, continuum_tolerance));

        double best = 1.0;
        double best_rho = 0.0;
        double best_omega = 0.0;
        if (!std::isfinite(gap)) {
            best = 0.0;
            best_rho = kInf;
        } else {
            for (double rho : rho_grid(gap, t)) {
                const double omega = exponential_twist_growth(form, rho * *dist.certificate);
                const double v = std::exp(omega * t - rho * gap);
                if (v < best) {
                    best = v;
                    best_rho = rho;
                    best_omega = omega;
                }
            }
        }
        const double cert_right = best * norms;
        out.push_back(make_record("gaussian_certified", RecordKind::certified, subject,
                                  {{"t", t}, {"gap", gap}, {"rho", best_rho}, {"omega", best_omega}}, left, cert_right,
                                  1e-8 * cert_right));
    }
    return out;
}

RhoTrace rho_optimization_trace(const DiscreteForm& form, const StateVector& psi, const SetMask& a, const SetMask& b,
                                double t, TruncationScope scope) {
    if (!std::isfinite(t) || t <= 0.0) throw ParameterError("rho_optimization_trace: time must be positive");
    const double norm = truncation_norm(form, psi, scope);
    if (norm > 1.0 + 1e-12) throw ParameterError("rho_optimization_trace: certificate norm exceeds one");
    RhoTrace trace;
    trace.t = t;
    trace.gap = pointwise_gap(psi, a, b);
    if (!(trace.gap > 0.0)) {
        trace.rho_star = 0.0;
        trace.closed_form = 1.0;
        trace.grid_min = 1.0;
        trace.argmin_within_step = true;
        trace.value_within_5pct = true;
        return trace;
    }
    trace.rho_star = trace.gap / (2.0 * t);
    trace.closed_form = std::exp(-trace.gap * trace.gap / (4.0 * t));
    trace.rho = rho_grid(trace.gap, t);
    for (double rho : trace.rho) trace.value.push_back(std::exp(rho * rho * t - rho * trace.gap));
    trace.argmin = static_cast<std::size_t>(std::min_element(trace.value.begin(), trace.value.end()) - trace.value.begin());
    trace.grid_min = trace.value[trace.argmin];
    const double step = std::log(trace.rho[1] / trace.rho[0]);
    trace.argmin_within_step = std::abs(std::log(trace.rho[trace.argmin] / trace.rho_star)) <= step;
    trace.value_within_5pct = std::abs(trace.grid_min - trace.closed_form) <= 0.05 * trace.closed_form;
    return trace;
}

std::vector<double> separation_times() {
    std::vector<double> out;
    for (int k = 0; k <= 10; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

SeparationVerdict separation_audit(const Propagator& prop, const SetMask& a, const std::vector<double>& t_grid,
                                   const std::string& subject) {
    const SetMask rest = a.complement();
    if (a.empty() || rest.empty()) throw ParameterError("separation_audit: A and its complement must be non-empty");
    require_times(t_grid, "separation_audit");
    if (t_grid.empty()) throw ParameterError("separation_audit: empty time grid");
    SeparationVerdict v;
    v.t_grid = t_grid;
    for (double t : t_grid) {
        const double leak = leakage_norm(prop, a, t);
        v.leakage.push_back(leak);
        v.records.push_back(make_record("separation_leakage", RecordKind::observational, subject, {{"t", t}}, leak,
                                        kLeakageThreshold, 0.0));
    }
    const DistanceReport dist = set_distance(prop.form(), a, rest, DistanceMode::d);
    v.path_distance = dist.value;
    // Any finite link into the complement makes the continuum set distance zero.
    v.set_distance = std::isfinite(dist.value) ? 0.0 : kInf;
    v.invariant_one_t = std::any_of(v.leakage.begin(), v.leakage.end(), [](double x) { return x <= kLeakageThreshold; });
    v.invariant_all_t = std::all_of(v.leakage.begin(), v.leakage.end(), [](double x) { return x <= kLeakageThreshold; });
    v.distance_infinite = std::isinf(v.set_distance);
    v.distance_positive = v.set_distance > 0.0;
    v.consistent = v.invariant_one_t == v.invariant_all_t && v.invariant_all_t == v.distance_infinite &&
                   v.distance_infinite == v.distance_positive;
    const double max_leak = *std::max_element(v.leakage.begin(), v.leakage.end());
    v.records.push_back(make_record("separation_consistency", RecordKind::certified, subject,
                                    {{"separated", v.distance_infinite ? 1.0 : 0.0},
                                     {"max_leakage", max_leak},
                                     {"path_distance", v.path_distance}},
                                    v.consistent ? 0.0 : 1.0, 0.0, 0.0));
    return v;
}

std::vector<AuditRecord> wave_speed_audit(const Propagator& prop, const SetMask& a, const SetMask& b,
                                          const std::vector<double>& t_grid, double tau, const std::string& subject) {
    require_disjoint(a, b, "wave_speed_audit");
    if (!std::isfinite(tau) || tau < 0.0) throw ParameterError("wave_speed_audit: tolerance must be non-negative");
    const DistanceReport dist = set_distance(prop.form(), a, b, DistanceMode::d);
    const double reach = 0.9 * dist.value;
    std::vector<double> times = t_grid;
    for (double t : times)
        if (!std::isfinite(t)) throw ParameterError("wave_speed_audit: times must be finite");
    std::stable_sort(times.begin(), times.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    std::vector<AuditRecord> out;
    double first_exceed = kInf;
    double scanned = 0.0;
    for (double t : times) {
        const double left = std::abs(prop.cross_inner(a, b, t, PropagatorKind::wave));
        scanned = std::max(scanned, std::abs(t));
        if (std::abs(t) <= reach)
            out.push_back(make_record("wave_speed", RecordKind::continuum, subject, {{"t", t}, {"d", dist.value}}, left,
                                      0.0, tau));
        if (left > 10.0 * tau && !std::isfinite(first_exceed)) first_exceed = std::abs(t);
    }
    if (std::isfinite(dist.value)) {
        AuditRecord front = make_record("wave_front", RecordKind::continuum, subject,
                                        {{"d", dist.value}, {"tau", tau}, {"first_exceedance", first_exceed}}, reach,
                                        std::isfinite(first_exceed) ? first_exceed : scanned, 0.0);
        if (!std::isfinite(first_exceed)) front.note = "no exceedance within the time grid";
        out.push_back(std::move(front));
    }
    return out;
}

std::vector<AuditRecord> twist_bound_audit(const Propagator& prop, const std::vector<StateVector>& psi_samples,
                                           const std::vector<double>& t_grid, const std::string& subject) {
    require_times(t_grid, "twist_bound_audit");
    const DiscreteForm& form = prop.form();
    std::vector<AuditRecord> out;
    for (double t : t_grid) {
        Eigen::MatrixXd heat;
        if (prop.dense()) heat = prop.heat_matrix(t);
        for (std::size_t k = 0; k < psi_samples.size(); ++k) {
            const StateVector& psi = psi_samples[k];
            form.check(psi, "twist_bound_audit");
            double left = 0.0;
            if (prop.dense()) {
                const Eigen::VectorXd up = psi.array().exp();
                const Eigen::VectorXd down = (-psi.array()).exp();
                left = spectral_norm(up.asDiagonal() * heat * down.asDiagonal());
            } else {
                left = twisted_norm(prop, psi, t);
            }
            const double omega = exponential_twist_growth(form, psi);
            const double right = std::exp(omega * t);
            const std::vector<std::pair<std::string, double>> params{
                {"t", t}, {"sample", static_cast<double>(k)}, {"omega", omega}};
            out.push_back(make_record("twist_certified", RecordKind::certified, subject, params, left, right,
                                      1e-8 * right));
            const double norm = truncation_norm(form, psi);
            const double paper = std::exp(norm * t);
            out.push_back(make_record("twist_paper", RecordKind::observational, subject,
                                      {{"t", t}, {"sample", static_cast<double>(k)}, {"truncation_norm", norm}}, left,
                                      paper, 1e-8 * paper));
        }
    }
    return out;
}

std::vector<AuditRecord> multiplier_bound_audit(const DiscreteForm& form, const StateVector& psi,
                                                const std::vector<StateVector>& phi_samples,
                                                const std::string& subject) {
    form.check(psi, "multiplier_bound_audit");
    const double gamma = truncation_norm(form, psi, TruncationScope::global);
    const double sup = psi.cwiseAbs().maxCoeff();
    std::vector<AuditRecord> out;
    for (std::size_t k = 0; k < phi_samples.size(); ++k) {
        const StateVector& phi = phi_samples[k];
        form.check(phi, "multiplier_bound_audit");
        const StateVector prod = psi.cwiseProduct(phi);
        const double left = std::sqrt(std::max(form_energy(form, prod, prod), 0.0));
        const double right =
            std::sqrt(gamma) * l2_norm(form, phi) + sup * std::sqrt(std::max(form_energy(form, phi, phi), 0.0));
        out.push_back(make_record("multiplier", RecordKind::continuum, subject,
                                  {{"sample", static_cast<double>(k)}, {"truncation_norm", gamma}}, left, right,
                                  1e-12 * right));
    }
    return out;
}

RefinementStudy refinement_study(const std::string& experiment, const std::vector<int>& sizes,
                                 const std::function<double(int)>& observable, std::optional<double> target) {
    if (sizes.size() < 3) throw ParameterError("refinement_study: need at least three grid sizes");
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] <= 0) throw ParameterError("refinement_study: sizes must be positive");
        if (k > 0 && sizes[k] != 2 * sizes[k - 1])
            throw ParameterError("refinement_study: sizes must double at each step");
    }
    RefinementStudy study;
    study.experiment = experiment;
    study.sizes = sizes;
    study.target = target;
    for (int n : sizes) study.values.push_back(observable(n));

    std::vector<double> xs;
    std::vector<double> ys;
    bool any_error = false;
    const std::size_t count = target ? sizes.size() : sizes.size() - 1;
    for (std::size_t k = 0; k < count; ++k) {
        const double err = target ? std::abs(study.values[k] - *target) : std::abs(study.values[k + 1] - study.values[k]);
        if (err > 0.0 && std::isfinite(err)) {
            xs.push_back(std::log2(static_cast<double>(sizes[k])));
            ys.push_back(std::log2(err));
            any_error = true;
        }
    }
    if (!any_error) {
        study.order = kInf;
    } else if (xs.size() < 2) {
        study.order = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx) * (xs[k] - mx);
        }
        study.order = -sxy / sxx;
    }
    bool up = true;
    bool down = true;
    for (std::size_t k = 1; k < study.values.size(); ++k) {
        up = up && study.values[k] >= study.values[k - 1];
        down = down && study.values[k] <= study.values[k - 1];
    }
    study.monotone = up || down;
    const double last = study.values.back();
    const double prev = study.values[study.values.size() - 2];
    study.last_relative_change = last == prev ? 0.0 : std::abs(last - prev) / std::max(std::abs(last), 1e-300);
    return study;
}

}  // namespace degenlab
