#pragma once

/// @file fields.hpp
/// @brief Coefficient fields for degenerate divergence-form operators and the
/// edge quadratures that turn them into finite-volume transmissibilities.

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace degenlab {

/// Raised when a scalar parameter lies outside its admissible range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a query leaves the domain of a field or grid.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class Axis { x = 0, y = 1 };

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box; for dimension 1 only the x interval is meaningful.
struct Box {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};

    static Box interval(double a, double b);
    static Box rectangle(double x0, double x1, double y0, double y1);

    [[nodiscard]] bool contains(const Point& p, double slack = 1e-12) const;
    [[nodiscard]] double extent(Axis axis) const { return hi[static_cast<int>(axis)] - lo[static_cast<int>(axis)]; }
};

/// (x^2 / (1 + x^2))^delta, the degenerate family vanishing at the origin.
double c_delta(double x, double delta);

enum class FieldKind { analytic_scalar_1d, analytic_matrix_2d, piecewise_constant, tabulated };

std::string to_string(FieldKind kind);

/// Diagonal coefficient C(x) = diag(c_xx(x), c_yy(x)) (scalar c in 1D).
///
/// Degenerate points are declared, not detected: each axis carries the list of
/// coordinates (along that axis) where the axis coefficient vanishes, and the
/// list of coordinates where it jumps. Quadrature isolates both.
class CoefficientField {
public:
    using Evaluator = std::function<double(Axis, const Point&)>;

    struct Loci {
        std::vector<double> zeros;
        std::vector<double> breaks;
    };

    CoefficientField(FieldKind kind, Box domain, Evaluator eval, double upper_bound, double ellipticity,
                     std::array<Loci, 2> loci, std::string label);

    static CoefficientField constant(double value, const Box& domain);
    /// scale * c_delta(x); in 2D the x-profile is used on both axes.
    static CoefficientField degenerate(double delta, const Box& domain, double scale = 1.0);
    /// mean + amplitude * sin(2 pi frequency x + phase), profile in x.
    static CoefficientField sinusoid(double mean, double amplitude, double frequency, double phase,
                                     const Box& domain);
    /// Values on the tensor blocks cut by x_breaks (and y_breaks in 2D), row-major in x.
    static CoefficientField piecewise(std::vector<double> x_breaks, std::vector<double> y_breaks,
                                      std::vector<double> values, const Box& domain);
    /// One value per grid cell of an nx-by-ny uniform partition of the domain.
    static CoefficientField tabulated(std::vector<double> values, int nx, int ny, const Box& domain);
    /// Separate axis profiles for a 2D diagonal tensor.
    static CoefficientField diagonal(CoefficientField xx, CoefficientField yy);

    [[nodiscard]] double operator()(Axis axis, const Point& p) const;

    /// Field lambda * C, exact in every evaluation when lambda is a power of two.
    [[nodiscard]] CoefficientField scaled(double lambda) const;

    [[nodiscard]] FieldKind kind() const { return kind_; }
    [[nodiscard]] int dim() const { return domain_.dim; }
    [[nodiscard]] const Box& domain() const { return domain_; }
    [[nodiscard]] double upper_bound() const { return upper_bound_; }
    [[nodiscard]] double ellipticity() const { return ellipticity_; }
    [[nodiscard]] const Loci& loci(Axis axis) const { return loci_[static_cast<int>(axis)]; }
    [[nodiscard]] const std::string& label() const { return label_; }

private:
    FieldKind kind_;
    Box domain_;
    Evaluator eval_;
    double upper_bound_;
    double ellipticity_;
    std::array<Loci, 2> loci_;
    std::string label_;
};

/// Straight segment along one axis at a fixed transverse coordinate.
struct Segment {
    Axis axis = Axis::x;
    double from = 0.0;
    double to = 0.0;
    double transverse = 0.0;
};

enum class InversePower { one, half };

struct EdgeQuadratureResult {
    double value = 0.0;  ///< +inf when divergent
    bool converged = true;
    std::vector<double> trace;  ///< partial values along the refinement
};

/// Integral over the segment of (c + eps)^{-p}, p in {1, 1/2}.
///
/// Smooth pieces are integrated by Richardson-extrapolated composite midpoint.
/// Near a declared zero the piece is cut into dyadic shells; the shell sums form
/// the refinement trace. The integral is declared divergent when eight
/// successive shells each raise the value by more than 1e-3 relative while the
/// shell increments stop contracting (ratio >= 1 - 1e-3); otherwise the
/// geometric tail is added once it stabilises.
EdgeQuadratureResult inverse_quadrature(const CoefficientField& field, const Segment& segment, InversePower power,
                                        double eps);

struct EdgeGeometry {
    Segment segment;
    double face_measure = 1.0;
};

/// Harmonic-mean conductance face_measure / int (c + eps)^{-1}; exactly 0 when
/// the integral diverges.
double edge_transmissibility(const CoefficientField& field, const EdgeGeometry& edge, double eps);

}  // namespace degenlab
