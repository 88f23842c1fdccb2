#include "degenlab/metric.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <tuple>

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_sets(const DiscreteForm& form, const SetMask& a, const SetMask& b, const char* what) {
    if (a.grid_size() != form.size() || b.grid_size() != form.size())
        throw GridMismatch(std::string(what) + ": set mask on another grid");
    if (a.empty() || b.empty()) throw ParameterError(std::string(what) + ": sets must be non-empty");
}

EdgeLengthTable interior_only(const EdgeLengthTable& table) {
    EdgeLengthTable out;
    out.mode = table.mode;
    out.cells = table.cells;
    for (const auto& link : table.links)
        if (link.second != table.exterior()) out.links.push_back(link);
    return out;
}

double min_over(const std::vector<double>& pot, const SetMask& set) {
    double best = kInf;
    for (int i : set.indices()) best = std::min(best, pot[static_cast<std::size_t>(i)]);
    return best;
}

// Scales psi down when the truncation norm exceeds one by more than round-off; returns the factor.
double enforce_unit_norm(const DiscreteForm& form, StateVector& psi, TruncationScope scope) {
    const double norm = truncation_norm(form, psi, scope);
    if (norm <= 1.0 + 1e-13) return 1.0;
    // Slightly below 1/sqrt(norm) so round-off cannot push the result over.
    const double factor = (1.0 - 1e-15) / std::sqrt(norm);
    psi *= factor;
    return factor;
}

}  // namespace

std::string to_string(LengthMode mode) { return mode == LengthMode::certified ? "certified" : "riemannian"; }

std::string to_string(DistanceMode mode) {
    switch (mode) {
        case DistanceMode::d: return "d";
        case DistanceMode::d1: return "d1";
        case DistanceMode::riemannian: return "riemannian";
    }
    return "d";
}

DistanceMode distance_mode_from_string(const std::string& tag) {
    if (tag == "d") return DistanceMode::d;
    if (tag == "d1") return DistanceMode::d1;
    if (tag == "riemannian") return DistanceMode::riemannian;
    throw ParameterError("unknown distance mode '" + tag + "'");
}

EdgeLengthTable certified_lengths(const DiscreteForm& form) {
    EdgeLengthTable table;
    table.mode = LengthMode::certified;
    table.cells = form.size();
    const Eigen::VectorXd& vol = form.volumes();
    for (const FormEdge& e : form.edges()) {
        EdgeLengthTable::Link link;
        link.first = e.first;
        double vmin = vol(e.first);
        if (e.is_ghost()) {
            link.second = table.exterior();
        } else {
            link.second = e.second;
            vmin = std::min(vmin, vol(e.second));
        }
        link.length = e.transmissibility > 0.0 ? std::sqrt(vmin / e.transmissibility) : kInf;
        table.links.push_back(link);
    }
    return table;
}

EdgeLengthTable riemannian_lengths(const CoefficientField& field, const Grid& grid) {
    if (field.dim() != grid.dim()) throw DomainError("field and grid dimensions differ");
    EdgeLengthTable table;
    table.mode = LengthMode::riemannian;
    table.cells = grid.size();
    for (const GridEdge& e : grid.interior_edges()) {
        const EdgeQuadratureResult q = inverse_quadrature(field, e.geometry.segment, InversePower::half, 0.0);
        table.links.push_back({e.first, e.second, q.converged ? q.value : kInf});
    }
    return table;
}

std::vector<double> shortest_potentials(const EdgeLengthTable& table, const std::vector<std::pair<int, double>>& sources) {
    const int n = table.nodes();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
    for (const auto& link : table.links) {
        if (!std::isfinite(link.length)) continue;
        adj[static_cast<std::size_t>(link.first)].emplace_back(link.second, link.length);
        adj[static_cast<std::size_t>(link.second)].emplace_back(link.first, link.length);
    }
    std::vector<double> pot(static_cast<std::size_t>(n), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (const auto& [node, value] : sources) {
        if (node < 0 || node >= n) throw ParameterError("shortest_potentials: source out of range");
        if (value < pot[static_cast<std::size_t>(node)]) {
            pot[static_cast<std::size_t>(node)] = value;
            queue.emplace(value, node);
        }
    }
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > pot[static_cast<std::size_t>(u)]) continue;
        for (const auto& [v, len] : adj[static_cast<std::size_t>(u)]) {
            const double cand = d + len;
            if (cand < pot[static_cast<std::size_t>(v)]) {
                pot[static_cast<std::size_t>(v)] = cand;
                queue.emplace(cand, v);
            }
        }
    }
    return pot;
}

double pointwise_gap(const StateVector& psi, const SetMask& a, const SetMask& b) {
    if (a.empty() || b.empty()) throw ParameterError("pointwise_gap: sets must be non-empty");
    if (a.grid_size() != psi.size() || b.grid_size() != psi.size()) throw GridMismatch("pointwise_gap: size mismatch");
    double lo = kInf;
    double hi = -kInf;
    for (int i : a.indices()) lo = std::min(lo, psi(i));
    for (int i : b.indices()) hi = std::max(hi, psi(i));
    return lo - hi;
}

namespace {

// Sweeps from B; the value is certified but, once rescaled, depends on the sweep direction.
DistanceReport oriented_distance(const DiscreteForm& form, const SetMask& a, const SetMask& b, DistanceMode mode) {
    DistanceReport report;
    report.mode = mode;
    report.a = a;
    report.b = b;
    report.grid_cells = form.size();
    const bool anchored = mode == DistanceMode::d1 && form.boundary() == BoundaryCondition::dirichlet;
    report.scope = anchored ? TruncationScope::global : TruncationScope::local;

    const EdgeLengthTable full = certified_lengths(form);
    StateVector psi(form.size());
    if (!anchored) {
        const EdgeLengthTable table = interior_only(full);
        std::vector<std::pair<int, double>> src;
        for (int i : b.indices()) src.emplace_back(i, 0.0);
        const std::vector<double> pot = shortest_potentials(table, src);
        const double d = min_over(pot, a);
        report.path_value = d;
        report.value = d;
        if (!std::isfinite(d)) return report;
        for (int i = 0; i < form.size(); ++i) psi(i) = std::min(pot[static_cast<std::size_t>(i)], d);
    } else {
        std::vector<std::pair<int, double>> src_b;
        for (int i : b.indices()) src_b.emplace_back(i, 0.0);
        const std::vector<double> pot_b = shortest_potentials(full, src_b);
        // Paths through the exterior node already realise dist(A, dD) + dist(B, dD).
        const double d = min_over(pot_b, a);
        const double b_edge = pot_b[static_cast<std::size_t>(full.exterior())];
        report.path_value = d;
        report.value = d;
        if (!std::isfinite(d)) return report;
        // Prescribed values on A, B and the exterior are mutually 1-Lipschitz; extend by the upper envelope.
        const double f_b = -std::min(b_edge, d);
        const double f_a = std::max(d - b_edge, 0.0);
        std::vector<std::pair<int, double>> src;
        for (int i : a.indices()) src.emplace_back(i, f_a);
        for (int i : b.indices()) src.emplace_back(i, f_b);
        src.emplace_back(full.exterior(), 0.0);
        const std::vector<double> pot = shortest_potentials(full, src);
        for (int i = 0; i < form.size(); ++i) {
            const double v = pot[static_cast<std::size_t>(i)];
            psi(i) = std::isfinite(v) ? v : 0.0;
        }
    }
    report.rescale = enforce_unit_norm(form, psi, report.scope);
    report.value = report.rescale == 1.0 ? report.path_value : pointwise_gap(psi, a, b);
    report.certificate_norm = truncation_norm(form, psi, report.scope);
    report.certificate = std::move(psi);
    return report;
}

}  // namespace

DistanceReport set_distance(const DiscreteForm& form, const SetMask& a, const SetMask& b, DistanceMode mode) {
    require_sets(form, a, b, "set_distance");
    if (mode == DistanceMode::riemannian) throw ParameterError("set_distance: use riemannian_distance for that mode");
    // Sweep from both ends and keep the larger certified value, so the result is symmetric.
    DistanceReport forward = oriented_distance(form, a, b, mode);
    DistanceReport backward = oriented_distance(form, b, a, mode);
    if (!(backward.value > forward.value)) return forward;
    // gap(-psi, A, B) = gap(psi, B, A) and the truncation norm is even in psi.
    std::swap(backward.a, backward.b);
    if (backward.certificate) *backward.certificate = -*backward.certificate;
    return backward;
}

DistanceReport riemannian_distance(const CoefficientField& field, const Grid& grid, const SetMask& a, const SetMask& b) {
    if (a.grid_size() != grid.size() || b.grid_size() != grid.size())
        throw GridMismatch("riemannian_distance: set mask on another grid");
    if (a.empty() || b.empty()) throw ParameterError("riemannian_distance: sets must be non-empty");
    const EdgeLengthTable table = riemannian_lengths(field, grid);
    std::vector<std::pair<int, double>> src;
    for (int i : b.indices()) src.emplace_back(i, 0.0);
    const std::vector<double> pot = shortest_potentials(table, src);
    DistanceReport report;
    report.mode = DistanceMode::riemannian;
    report.value = min_over(pot, a);
    report.path_value = report.value;
    report.a = a;
    report.b = b;
    report.grid_cells = grid.size();
    report.field_label = field.label();
    return report;
}

AuditRecord certificate_audit(const DiscreteForm& form, const DistanceReport& report) {
    if (!report.certificate) throw ParameterError("certificate_audit: report carries no certificate");
    const StateVector& psi = *report.certificate;
    form.check(psi, "certificate_audit");
    const double norm = truncation_norm(form, psi, report.scope);
    const double gap = pointwise_gap(psi, report.a, report.b);
    // One scalar violation: left = max(norm, 1 + value - gap) against right = 1.
    const double left = std::max(norm, 1.0 + (report.value - gap));
    return make_record("certificate", RecordKind::certified, to_string(report.mode),
                       {{"value", report.value}, {"norm", norm}, {"gap", gap}}, left, 1.0, 1e-12);
}

std::uint64_t fingerprint(const StateVector& v) {
    std::uint64_t h = 1469598103934665603ULL;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double x = v(i);
        if (x == 0.0) x = 0.0;  // fold -0
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &x, sizeof(double));
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::uint64_t fingerprint(const Grid& grid) {
    const Box& b = grid.box();
    StateVector v(7);
    v << grid.dim(), grid.nx(), grid.ny(), b.lo[0], b.hi[0], b.lo[1], b.hi[1];
    return fingerprint(v);
}

}  // namespace degenlab
