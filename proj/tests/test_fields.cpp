#include <doctest.h>

#include <cmath>

#include "degenlab/fields.hpp"
#include "support/oracles.hpp"

using namespace degenlab;

namespace {

Segment along_x(double a, double b) { return Segment{Axis::x, a, b, 0.0}; }

}  // namespace

TEST_CASE("c_delta values") {
    CHECK(c_delta(0.0, 0.75) == 0.0);
    CHECK(c_delta(1.0, 0.5) == doctest::Approx(0.70710678118654752).epsilon(1e-15));
    CHECK(c_delta(2.0, 0.25) == doctest::Approx(0.94574160900317581).epsilon(1e-15));
    CHECK(c_delta(3.0, 0.0) == 1.0);
    CHECK_THROWS_AS(c_delta(1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(c_delta(1.0, -0.1), ParameterError);
    for (double x : {-5.0, -0.3, 0.01, 7.0}) {
        const double v = c_delta(x, 0.6);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("field evaluation and metadata") {
    const auto f = CoefficientField::degenerate(0.75, Box::interval(-1, 1));
    CHECK(f(Axis::x, {0.5, 0}) == doctest::Approx(c_delta(0.5, 0.75)));
    REQUIRE(f.loci(Axis::x).zeros.size() == 1);
    CHECK(f.loci(Axis::x).zeros[0] == 0.0);
    CHECK(f.upper_bound() >= f(Axis::x, {1.0, 0}));
    CHECK(f.ellipticity() == 0.0);
    CHECK_THROWS_AS((void)f(Axis::x, {1.5, 0}), DomainError);

    const auto s = CoefficientField::sinusoid(2, 1, 1, 0, Box::interval(0, 1));
    CHECK(s.upper_bound() == 3.0);
    CHECK(s.ellipticity() == 1.0);
    CHECK_THROWS_AS(CoefficientField::sinusoid(0.5, 1, 1, 0, Box::interval(0, 1)), ParameterError);

    const auto p = CoefficientField::piecewise({0.25, 0.5}, {}, {1, 2, 3}, Box::interval(0, 1));
    CHECK(p(Axis::x, {0.1, 0}) == 1.0);
    CHECK(p(Axis::x, {0.3, 0}) == 2.0);
    CHECK(p(Axis::x, {0.9, 0}) == 3.0);
    CHECK_THROWS_AS(CoefficientField::piecewise({0.5, 0.25}, {}, {1, 2, 3}, Box::interval(0, 1)), ParameterError);
    CHECK_THROWS_AS(CoefficientField::piecewise({0.5}, {}, {1, -2}, Box::interval(0, 1)), ParameterError);

    const auto t = CoefficientField::tabulated({1, 4, 9, 16}, 2, 2, Box::rectangle(0, 1, 0, 1));
    CHECK(t(Axis::x, {0.2, 0.2}) == 1.0);
    CHECK(t(Axis::y, {0.7, 0.2}) == 4.0);
    CHECK(t(Axis::x, {0.2, 0.7}) == 9.0);
}

TEST_CASE("sampled fields are nonnegative and bounded") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<CoefficientField> fields{
        CoefficientField::degenerate(0.3, Box::interval(-2, 3)),
        CoefficientField::sinusoid(1.5, 1.5, 2, 0.4, Box::interval(0, 1)),
        CoefficientField::piecewise({0.3}, {0.6}, {0, 1, 2, 5}, Box::rectangle(0, 1, 0, 1)),
        CoefficientField::diagonal(CoefficientField::constant(2, Box::rectangle(0, 1, 0, 1)),
                                   CoefficientField::degenerate(0.5, Box::rectangle(0, 1, 0, 1))),
    };
    for (const auto& f : fields) {
        const Box& b = f.domain();
        for (int k = 0; k < 500; ++k) {
            const Point p{b.lo[0] + u(rng) * b.extent(Axis::x), b.dim == 2 ? b.lo[1] + u(rng) * b.extent(Axis::y) : 0.0};
            for (Axis a : {Axis::x, Axis::y}) {
                if (b.dim == 1 && a == Axis::y) continue;
                const double v = f(a, p);
                CHECK(v >= 0.0);
                CHECK(v <= f.upper_bound());
            }
        }
    }
}

TEST_CASE("inverse quadrature: constant and smooth integrands") {
    const auto four = CoefficientField::constant(4.0, Box::interval(0, 2));
    const auto half = inverse_quadrature(four, along_x(0.25, 1.75), InversePower::half, 0.0);
    CHECK(half.converged);
    CHECK(half.value == doctest::Approx(0.75).epsilon(1e-14));
    const auto one = inverse_quadrature(four, along_x(0.25, 1.75), InversePower::one, 0.0);
    CHECK(one.value == doctest::Approx(0.375).epsilon(1e-14));
    // Reversed segments integrate the same set.
    CHECK(inverse_quadrature(four, along_x(1.75, 0.25), InversePower::half, 0.0).value == doctest::Approx(0.75));

    const auto s = CoefficientField::sinusoid(2, 1, 1, 0, Box::interval(0, 1));
    const double ref = 0.20293852552342888;  // frozen from the Simpson oracle below
    CHECK(oracle::simpson([](double x) { return 1.0 / std::sqrt(2 + std::sin(2 * M_PI * x)); }, 0.3, 0.6) ==
          doctest::Approx(ref).epsilon(1e-13));
    CHECK(inverse_quadrature(s, along_x(0.3, 0.6), InversePower::half, 0.0).value == doctest::Approx(ref).epsilon(1e-10));

    CHECK_THROWS_AS(inverse_quadrature(s, along_x(0.5, 1.5), InversePower::one, 0.0), DomainError);
}

TEST_CASE("inverse quadrature: integrable singularity") {
    const auto f = CoefficientField::degenerate(0.25, Box::interval(-1, 1));
    // Substituting x = u^2 removes the singularity: int_0^a x^{-1/2}(1+x^2)^{1/4} dx = int_0^{sqrt a} 2 (1+u^4)^{1/4} du.
    const double oracle = 2.0 * oracle::simpson([](double u) { return 2.0 * std::pow(1 + u * u * u * u, 0.25); }, 0.0, std::sqrt(0.1));
    const double frozen = 1.2655422072770276;
    CHECK(oracle == doctest::Approx(frozen).epsilon(1e-13));
    const auto r = inverse_quadrature(f, along_x(-0.1, 0.1), InversePower::one, 0.0);
    CHECK(r.converged);
    CHECK(std::isfinite(r.value));
    CHECK(r.value == doctest::Approx(frozen).epsilon(1e-8));

    // Riemannian length across the zero for delta = 0.75 (x = u^4 substitution).
    const auto g = CoefficientField::degenerate(0.75, Box::interval(-1, 1));
    const double frozen_r = 6.7945856009225614;
    const double oracle_r = 2.0 * oracle::simpson([](double u) { return 4.0 * std::pow(1 + std::pow(u, 8), 0.375); }, 0.0, std::pow(0.5, 0.25));
    CHECK(oracle_r == doctest::Approx(frozen_r).epsilon(1e-13));
    const auto rr = inverse_quadrature(g, along_x(-0.5, 0.5), InversePower::half, 0.0);
    CHECK(rr.converged);
    CHECK(rr.value == doctest::Approx(frozen_r).epsilon(1e-8));
}

TEST_CASE("inverse quadrature: divergence detection") {
    const double h = 2.0 / 256;
    for (double delta : {0.5, 0.75, 0.9}) {
        const auto f = CoefficientField::degenerate(delta, Box::interval(-1, 1));
        const auto r = inverse_quadrature(f, along_x(-h, h), InversePower::one, 0.0);
        CHECK_FALSE(r.converged);
        CHECK(std::isinf(r.value));
        REQUIRE(r.trace.size() >= 8);
        for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] > r.trace[k - 1]);
    }
    // 2 delta < 1 is integrable; with a viscosity shift everything is.
    CHECK(inverse_quadrature(CoefficientField::degenerate(0.49, Box::interval(-1, 1)), along_x(-h, h), InversePower::one, 0.0).converged);
    CHECK(inverse_quadrature(CoefficientField::degenerate(0.75, Box::interval(-1, 1)), along_x(-h, h), InversePower::one, 1e-6).converged);
    // Zero block of a piecewise field.
    const auto wall = CoefficientField::piecewise({0.49, 0.51}, {}, {1, 0, 1}, Box::interval(0, 1));
    CHECK(std::isinf(inverse_quadrature(wall, along_x(0.4, 0.6), InversePower::one, 0.0).value));
}

TEST_CASE("edge transmissibility") {
    const int n = 256;
    const double h = 2.0 / n;
    auto straddle = EdgeGeometry{along_x(-h / 2, h / 2), 1.0};

    const auto one = CoefficientField::constant(1.0, Box::interval(-1, 1));
    CHECK(edge_transmissibility(one, straddle, 0.0) == doctest::Approx(1.0 / h).epsilon(1e-14));

    for (double delta : {0.25, 0.5, 0.75}) {
        const auto f = CoefficientField::degenerate(delta, Box::interval(-1, 1));
        const double t = edge_transmissibility(f, straddle, 0.0);
        if (delta >= 0.5) CHECK(t == 0.0);
        else CHECK(t > 0.0);
    }

    const auto f = CoefficientField::degenerate(0.75, Box::interval(-1, 1));
    const double frozen = 0.13988726757848152;  // mpmath quadrature of (c + 1e-3)^{-1}
    const double t = edge_transmissibility(f, straddle, 1e-3);
    CHECK(t > 0.0);
    CHECK(t == doctest::Approx(frozen).epsilon(1e-8));
    CHECK(t <= (1.0 + 1e-3) / h);

    // Nondecreasing in eps and converging to the eps = 0 value.
    const auto g = CoefficientField::degenerate(0.25, Box::interval(-1, 1));
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 8; ++k) {
        const double v = edge_transmissibility(g, straddle, std::pow(10.0, -k));
        CHECK(v <= prev);
        prev = v;
    }
    const double t0 = edge_transmissibility(g, straddle, 0.0);
    CHECK(t0 <= prev);
    CHECK(prev == doctest::Approx(t0).epsilon(1e-3));
}

TEST_CASE("transmissibility scales with the coefficient") {
    const double h = 1.0 / 64;
    const auto f = CoefficientField::sinusoid(2, 1, 1, 0.3, Box::interval(0, 1));
    const EdgeGeometry e{along_x(0.5 - h / 2, 0.5 + h / 2), 1.0};
    const double base = edge_transmissibility(f, e, 0.0);
    for (double lambda : {2.0, 4.0, 0.5, 0.125}) CHECK(edge_transmissibility(f.scaled(lambda), e, 0.0) == lambda * base);
    CHECK(edge_transmissibility(f.scaled(3.0), e, 0.0) == doctest::Approx(3.0 * base).epsilon(1e-14));
}
