#include "degenlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

int block_index(const std::vector<double>& breaks, double s) {
    return static_cast<int>(std::upper_bound(breaks.begin(), breaks.end(), s) - breaks.begin());
}

void check_breaks(const std::vector<double>& breaks, double lo, double hi, const char* axis) {
    for (std::size_t k = 0; k < breaks.size(); ++k) {
        if (!(breaks[k] > lo && breaks[k] < hi))
            throw ParameterError(std::string("piecewise field: ") + axis + " break outside the open domain");
        if (k > 0 && !(breaks[k] > breaks[k - 1]))
            throw ParameterError(std::string("piecewise field: ") + axis + " breaks must increase strictly");
    }
}

}  // namespace

Box Box::interval(double a, double b) {
    if (!(b > a)) throw ParameterError("interval must satisfy a < b");
    Box box;
    box.dim = 1;
    box.lo = {a, 0.0};
    box.hi = {b, 0.0};
    return box;
}

Box Box::rectangle(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0) || !(y1 > y0)) throw ParameterError("rectangle must have positive extent");
    Box box;
    box.dim = 2;
    box.lo = {x0, y0};
    box.hi = {x1, y1};
    return box;
}

bool Box::contains(const Point& p, double slack) const {
    const double sx = slack * std::max(1.0, hi[0] - lo[0]);
    if (p.x < lo[0] - sx || p.x > hi[0] + sx) return false;
    if (dim == 2) {
        const double sy = slack * std::max(1.0, hi[1] - lo[1]);
        if (p.y < lo[1] - sy || p.y > hi[1] + sy) return false;
    }
    return true;
}

double c_delta(double x, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw ParameterError("c_delta: delta must lie in [0, 1), got " + format_double(delta));
    const double x2 = x * x;
    return std::pow(x2 / (1.0 + x2), delta);
}

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::analytic_scalar_1d: return "analytic-scalar-1d";
        case FieldKind::analytic_matrix_2d: return "analytic-matrix-2d";
        case FieldKind::piecewise_constant: return "piecewise-constant";
        case FieldKind::tabulated: return "tabulated";
    }
    return "unknown";
}

CoefficientField::CoefficientField(FieldKind kind, Box domain, Evaluator eval, double upper_bound,
                                   double ellipticity, std::array<Loci, 2> loci, std::string label)
    : kind_(kind),
      domain_(domain),
      eval_(std::move(eval)),
      upper_bound_(upper_bound),
      ellipticity_(ellipticity),
      loci_(std::move(loci)),
      label_(std::move(label)) {
    if (domain_.dim != 1 && domain_.dim != 2) throw ParameterError("field dimension must be 1 or 2");
    if (!(upper_bound_ >= 0.0) || !std::isfinite(upper_bound_)) throw ParameterError("field bound must be finite");
    if (!(ellipticity_ >= 0.0) || ellipticity_ > upper_bound_) throw ParameterError("ellipticity must lie in [0, bound]");
    for (auto& l : loci_) {
        std::sort(l.zeros.begin(), l.zeros.end());
        std::sort(l.breaks.begin(), l.breaks.end());
    }
}

CoefficientField CoefficientField::constant(double value, const Box& domain) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw ParameterError("constant field must be finite and >= 0");
    const FieldKind kind = domain.dim == 1 ? FieldKind::analytic_scalar_1d : FieldKind::analytic_matrix_2d;
    return {kind, domain, [value](Axis, const Point&) { return value; }, value, value, {}, "constant(" + format_double(value) + ")"};
}

CoefficientField CoefficientField::degenerate(double delta, const Box& domain, double scale) {
    c_delta(0.0, delta);  // validates delta
    if (!(scale > 0.0)) throw ParameterError("degenerate field scale must be positive");
    const double far = std::max(std::abs(domain.lo[0]), std::abs(domain.hi[0]));
    std::array<Loci, 2> loci;
    if (delta > 0.0 && domain.lo[0] <= 0.0 && domain.hi[0] >= 0.0) loci[0].zeros.push_back(0.0);
    const FieldKind kind = domain.dim == 1 ? FieldKind::analytic_scalar_1d : FieldKind::analytic_matrix_2d;
    const double lower = (domain.lo[0] <= 0.0 && domain.hi[0] >= 0.0)
                             ? (delta > 0.0 ? 0.0 : scale)
                             : scale * c_delta(std::min(std::abs(domain.lo[0]), std::abs(domain.hi[0])), delta);
    return {kind,
            domain,
            [delta, scale](Axis, const Point& p) { return scale * c_delta(p.x, delta); },
            scale * c_delta(far, delta),
            lower,
            std::move(loci),
            "c_delta(" + format_double(delta) + (scale != 1.0 ? ", scale=" + format_double(scale) : "") + ")"};
}

CoefficientField CoefficientField::sinusoid(double mean, double amplitude, double frequency, double phase,
                                            const Box& domain) {
    const double lower = mean - std::abs(amplitude);
    if (lower < 0.0) throw ParameterError("sinusoid field must stay nonnegative (mean >= |amplitude|)");
    const FieldKind kind = domain.dim == 1 ? FieldKind::analytic_scalar_1d : FieldKind::analytic_matrix_2d;
    const double two_pi_f = 2.0 * M_PI * frequency;
    return {kind,
            domain,
            [=](Axis, const Point& p) { return mean + amplitude * std::sin(two_pi_f * p.x + phase); },
            mean + std::abs(amplitude),
            lower,
            {},
            "sinusoid(" + format_double(mean) + "," + format_double(amplitude) + "," + format_double(frequency) +
                "," + format_double(phase) + ")"};
}

CoefficientField CoefficientField::piecewise(std::vector<double> x_breaks, std::vector<double> y_breaks,
                                             std::vector<double> values, const Box& domain) {
    check_breaks(x_breaks, domain.lo[0], domain.hi[0], "x");
    if (domain.dim == 1 && !y_breaks.empty()) throw ParameterError("piecewise field: y breaks given for a 1D domain");
    if (domain.dim == 2) check_breaks(y_breaks, domain.lo[1], domain.hi[1], "y");
    const std::size_t nbx = x_breaks.size() + 1;
    const std::size_t nby = y_breaks.size() + 1;
    if (values.size() != nbx * nby) throw ParameterError("piecewise field: expected one value per block");
    double hi = 0.0;
    double lo = std::numeric_limits<double>::max();
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("piecewise field: values must be finite and >= 0");
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    std::array<Loci, 2> loci;
    loci[0].breaks = x_breaks;
    loci[1].breaks = y_breaks;
    auto eval = [xb = std::move(x_breaks), yb = std::move(y_breaks), vals = std::move(values), nbx](Axis, const Point& p) {
        const int bx = block_index(xb, p.x);
        const int by = yb.empty() ? 0 : block_index(yb, p.y);
        return vals[static_cast<std::size_t>(by) * nbx + static_cast<std::size_t>(bx)];
    };
    return {FieldKind::piecewise_constant, domain, std::move(eval), hi, lo, std::move(loci),
            "piecewise(" + std::to_string(nbx * nby) + " blocks)"};
}

CoefficientField CoefficientField::tabulated(std::vector<double> values, int nx, int ny, const Box& domain) {
    if (nx < 1 || ny < 1 || (domain.dim == 1 && ny != 1)) throw ParameterError("tabulated field: bad table shape");
    std::vector<double> xb;
    std::vector<double> yb;
    for (int i = 1; i < nx; ++i) xb.push_back(domain.lo[0] + (domain.hi[0] - domain.lo[0]) * i / nx);
    if (domain.dim == 2)
        for (int j = 1; j < ny; ++j) yb.push_back(domain.lo[1] + (domain.hi[1] - domain.lo[1]) * j / ny);
    auto field = piecewise(std::move(xb), std::move(yb), std::move(values), domain);
    return {FieldKind::tabulated, domain,
            [field](Axis a, const Point& p) { return field(a, p); },
            field.upper_bound(), field.ellipticity(),
            {field.loci(Axis::x), field.loci(Axis::y)},
            "tabulated(" + std::to_string(nx) + "x" + std::to_string(ny) + ")"};
}

CoefficientField CoefficientField::diagonal(CoefficientField xx, CoefficientField yy) {
    if (xx.dim() != 2 || yy.dim() != 2) throw ParameterError("diagonal field needs two 2D profiles");
    const Box d = xx.domain();
    const Box e = yy.domain();
    if (d.lo != e.lo || d.hi != e.hi) throw ParameterError("diagonal field profiles must share a domain");
    std::array<Loci, 2> loci{xx.loci(Axis::x), yy.loci(Axis::y)};
    const double bound = std::max(xx.upper_bound(), yy.upper_bound());
    const double mu = std::min(xx.ellipticity(), yy.ellipticity());
    std::string label = "diag(" + xx.label() + "," + yy.label() + ")";
    return {FieldKind::analytic_matrix_2d, d,
            [xx = std::move(xx), yy = std::move(yy)](Axis a, const Point& p) {
                return a == Axis::x ? xx(Axis::x, p) : yy(Axis::y, p);
            },
            bound, mu, std::move(loci), std::move(label)};
}

double CoefficientField::operator()(Axis axis, const Point& p) const {
    if (!domain_.contains(p)) throw DomainError("coefficient evaluated outside its domain");
    return eval_(axis, p);
}

CoefficientField CoefficientField::scaled(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("scale factor must be positive");
    return {kind_, domain_, [eval = eval_, lambda](Axis a, const Point& p) { return lambda * eval(a, p); },
            lambda * upper_bound_, lambda * ellipticity_, loci_, format_double(lambda) + "*" + label_};
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

struct Integrand {
    const CoefficientField& field;
    Axis axis;
    double transverse;
    double eps;
    InversePower power;

    double operator()(double s) const {
        const Point p = axis == Axis::x ? Point{s, transverse} : Point{transverse, s};
        const double c = field(axis, p);
        if (std::isnan(c) || c < 0.0) throw ParameterError("coefficient must be nonnegative, field " + field.label());
        const double shifted = c + eps;
        if (shifted <= 0.0) return kInf;
        return power == InversePower::one ? 1.0 / shifted : 1.0 / std::sqrt(shifted);
    }
};

/// Romberg extrapolation of composite midpoint sums on [a, b]; +inf if the
/// integrand is infinite at a sample.
double romberg_midpoint(const Integrand& g, double a, double b) {
    constexpr int kMaxLevel = 16;
    const double width = b - a;
    std::vector<double> prev;
    std::vector<double> cur;
    double last = 0.0;
    for (int j = 0; j <= kMaxLevel; ++j) {
        const long n = 1L << j;
        const double step = width / static_cast<double>(n);
        double sum = 0.0;
        for (long k = 0; k < n; ++k) {
            const double v = g(a + (static_cast<double>(k) + 0.5) * step);
            if (std::isinf(v)) return kInf;
            sum += v;
        }
        cur.assign(static_cast<std::size_t>(j) + 1, 0.0);
        cur[0] = sum * step;
        double factor = 1.0;
        for (int m = 1; m <= j; ++m) {
            factor *= 4.0;
            cur[m] = cur[m - 1] + (cur[m - 1] - prev[m - 1]) / (factor - 1.0);
        }
        const double est = cur[j];
        if (j >= 3 && std::abs(est - last) <= 1e-14 * std::abs(est)) return est;
        last = est;
        prev.swap(cur);
    }
    return last;
}

struct Piece {
    double a;
    double b;
    bool zero_at_a;
    bool zero_at_b;
};

bool near(double u, double v, double scale) { return std::abs(u - v) <= 1e-14 * scale; }

std::vector<Piece> split_segment(double a, double b, const CoefficientField::Loci& loci) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    std::vector<std::pair<double, bool>> cuts;  // (position, is_zero)
    for (double z : loci.zeros)
        if (z > a && z < b && !near(z, a, scale) && !near(z, b, scale)) cuts.emplace_back(z, true);
    for (double z : loci.breaks)
        if (z > a && z < b && !near(z, a, scale) && !near(z, b, scale)) cuts.emplace_back(z, false);
    std::sort(cuts.begin(), cuts.end());
    auto is_zero = [&](double s) {
        return std::any_of(loci.zeros.begin(), loci.zeros.end(), [&](double z) { return near(z, s, scale); });
    };
    std::vector<Piece> pieces;
    double left = a;
    bool left_zero = is_zero(a);
    for (const auto& [pos, zero] : cuts) {
        if (pos <= left) {
            left_zero = left_zero || zero;
            continue;
        }
        pieces.push_back({left, pos, left_zero, zero});
        left = pos;
        left_zero = zero;
    }
    pieces.push_back({left, b, left_zero, is_zero(b)});
    // Each piece keeps at most one singular end.
    std::vector<Piece> out;
    for (const Piece& p : pieces) {
        if (p.zero_at_a && p.zero_at_b) {
            const double mid = 0.5 * (p.a + p.b);
            out.push_back({p.a, mid, true, false});
            out.push_back({mid, p.b, false, true});
        } else {
            out.push_back(p);
        }
    }
    return out;
}

/// Dyadic shells toward the singular end z of the piece; appends running totals to trace.
/// Returns the piece integral or +inf.
double singular_piece(const Integrand& g, double z, double far_end, double running, std::vector<double>& trace) {
    constexpr int kMaxShells = 220;
    constexpr int kDivergenceRun = 8;
    constexpr double kRelIncrement = 1e-3;
    constexpr double kContraction = 1.0 - 1e-3;

    const double length = far_end - z;  // signed
    double value = 0.0;
    double prev_inc = 0.0;
    double prev_est = kInf;
    int run = 0;
    int stable = 0;
    for (int k = 0; k < kMaxShells; ++k) {
        const double outer = z + length * std::ldexp(1.0, -k);
        const double inner = z + length * std::ldexp(1.0, -k - 1);
        if (inner == outer || inner == z) return value;
        const double inc = romberg_midpoint(g, std::min(inner, outer), std::max(inner, outer));
        if (std::isinf(inc)) {
            trace.push_back(kInf);
            return kInf;
        }
        value += inc;
        trace.push_back(running + value);
        if (k > 0) {
            const double ratio = prev_inc > 0.0 ? inc / prev_inc : 0.0;
            const double rel = inc / (running + value);
            if (g.eps == 0.0 && rel > kRelIncrement && ratio >= kContraction) {
                if (++run >= kDivergenceRun) return kInf;
            } else {
                run = 0;
            }
            if (ratio < kContraction) {
                const double est = value + inc * ratio / (1.0 - ratio);
                const double total = running + est;
                if (std::abs(est - prev_est) <= 1e-13 * total) {
                    if (++stable >= 2) return est;
                } else {
                    stable = 0;
                }
                prev_est = est;
            } else {
                stable = 0;
                prev_est = kInf;
            }
        }
        if (inc == 0.0) return value;
        prev_inc = inc;
    }
    // Shell budget exhausted; only reachable with eps > 0 and extreme peaks.
    return prev_est < kInf ? prev_est : value;
}

}  // namespace

EdgeQuadratureResult inverse_quadrature(const CoefficientField& field, const Segment& segment, InversePower power,
                                        double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ParameterError("viscosity shift must be finite and >= 0");
    const Box& d = field.domain();
    const int ax = static_cast<int>(segment.axis);
    if (ax >= d.dim) throw DomainError("segment axis exceeds the field dimension");
    const double a = std::min(segment.from, segment.to);
    const double b = std::max(segment.from, segment.to);
    const Point pa = segment.axis == Axis::x ? Point{a, segment.transverse} : Point{segment.transverse, a};
    const Point pb = segment.axis == Axis::x ? Point{b, segment.transverse} : Point{segment.transverse, b};
    if (!d.contains(pa) || !d.contains(pb)) throw DomainError("segment leaves the field domain");

    EdgeQuadratureResult result;
    if (a == b) {
        result.value = 0.0;
        result.trace.push_back(0.0);
        return result;
    }
    const Integrand g{field, segment.axis, segment.transverse, eps, power};
    double total = 0.0;
    for (const Piece& piece : split_segment(a, b, field.loci(segment.axis))) {
        double part = 0.0;
        if (piece.zero_at_a) {
            part = singular_piece(g, piece.a, piece.b, total, result.trace);
        } else if (piece.zero_at_b) {
            part = singular_piece(g, piece.b, piece.a, total, result.trace);
        } else {
            part = romberg_midpoint(g, piece.a, piece.b);
            result.trace.push_back(total + part);
        }
        if (std::isinf(part)) {
            result.value = kInf;
            result.converged = false;
            return result;
        }
        total += part;
    }
    result.value = total;
    return result;
}

double edge_transmissibility(const CoefficientField& field, const EdgeGeometry& edge, double eps) {
    const EdgeQuadratureResult q = inverse_quadrature(field, edge.segment, InversePower::one, eps);
    if (!q.converged) return 0.0;
    return edge.face_measure / q.value;
}

}  // namespace degenlab
