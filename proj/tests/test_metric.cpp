#include <doctest.h>

#include <random>

#include "degenlab/metric.hpp"
#include "support/oracles.hpp"

using namespace degenlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DiscreteForm line_form(const CoefficientField& field, int n, BoundaryCondition bc = BoundaryCondition::neumann) {
    const Box& box = field.domain();
    return assemble_form(field, Grid::line(n, box.lo[0], box.hi[0]), bc, 0.0);
}

SetMask mask(const Grid& g, double a, double b) { return SetMask::rasterize(g, Region::interval(a, b)); }

CoefficientField unit() { return CoefficientField::constant(1, Box::interval(0, 1)); }
CoefficientField wavy() { return CoefficientField::sinusoid(2, 1, 1, 0, Box::interval(0, 1)); }

double distance(const DiscreteForm& form, const SetMask& a, const SetMask& b, DistanceMode mode = DistanceMode::d) {
    return set_distance(form, a, b, mode).value;
}

/// Random nonempty union of up to three intervals inside [lo, hi].
SetMask random_set(const Grid& g, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Region r;
    const int parts = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < parts; ++k) {
        double x = u(rng), y = u(rng);
        if (x > y) std::swap(x, y);
        r.parts.push_back(Box::interval(x, std::max(y, x + 0.02)));
    }
    SetMask m = SetMask::rasterize(g, r);
    return m.empty() ? SetMask::rasterize(g, Region::interval(lo, hi)) : m;
}

}  // namespace

TEST_CASE("pointwise gap") {
    const Grid g = Grid::line(50, 0, 1);
    const SetMask a = mask(g, 0, 0.3);
    const SetMask b = mask(g, 0.6, 1);
    CHECK(pointwise_gap(2.5 * a.indicator(), a, b) == 2.5);
    CHECK(pointwise_gap(StateVector::Constant(50, 0.7), a, b) == 0.0);
    std::mt19937_64 rng(1);
    const StateVector psi = oracle::random_vector(50, rng);
    CHECK(pointwise_gap(psi, a, b) == pointwise_gap(-psi, b, a));
    CHECK_THROWS_AS((void)pointwise_gap(psi, SetMask(std::vector<std::uint8_t>(50, 0)), b), ParameterError);
    CHECK_THROWS_AS((void)pointwise_gap(StateVector::Zero(40), a, b), GridMismatch);
}

TEST_CASE("certified edge lengths") {
    const DiscreteForm form = line_form(unit(), 64);
    const EdgeLengthTable t = certified_lengths(form);
    CHECK(t.mode == LengthMode::certified);
    CHECK(t.links.size() == 63);
    for (const auto& l : t.links) CHECK(l.length == doctest::Approx(1.0 / 64).epsilon(1e-13));

    const DiscreteForm cut = line_form(CoefficientField::degenerate(0.75, Box::interval(-1, 1)), 64);
    int infinite = 0;
    for (const auto& l : certified_lengths(cut).links) infinite += std::isinf(l.length);
    CHECK(infinite == 1);

    const DiscreteForm dir = line_form(unit(), 64, BoundaryCondition::dirichlet);
    const EdgeLengthTable td = certified_lengths(dir);
    CHECK(td.links.size() == 65);
    CHECK(td.links.back().second == td.exterior());
}

TEST_CASE("shortest potentials") {
    EdgeLengthTable t;
    t.cells = 4;
    t.links = {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, kInf}, {0, 4, 0.5}};
    const auto pot = shortest_potentials(t, {{2, 0.0}, {0, 10.0}});
    CHECK(pot[1] == 2.0);
    CHECK(pot[0] == 3.0);
    CHECK(pot[4] == 3.5);
    CHECK(std::isinf(pot[3]));
    CHECK_THROWS_AS((void)shortest_potentials(t, {{7, 0.0}}), ParameterError);
}

TEST_CASE("laplacian interval distance") {
    for (int n : {100, 256, 1000}) {
        const DiscreteForm form = line_form(unit(), n);
        const double h = 1.0 / n;
        const auto r = set_distance(form, mask(form.grid(), 0, 0.2), mask(form.grid(), 0.8, 1), DistanceMode::d);
        CHECK(std::abs(r.value - 0.6) <= 2 * h);
        REQUIRE(r.certificate);
        CHECK(r.certificate_norm <= 1 + 1e-12);
        CHECK(r.rescale == 1.0);
        CHECK(certificate_audit(form, r).pass);
    }
}

TEST_CASE("decoupled halves are infinitely far apart") {
    const DiscreteForm form = line_form(CoefficientField::degenerate(0.75, Box::interval(-1, 1)), 256);
    const Grid& g = form.grid();
    const SetMask left = SetMask::from_predicate(g, [](const Point& p) { return p.x < 0; });
    const auto r = set_distance(form, left, left.complement(), DistanceMode::d);
    CHECK(std::isinf(r.value));
    CHECK_FALSE(r.certificate);
    CHECK_THROWS_AS((void)certificate_audit(form, r), ParameterError);
    CHECK(std::isinf(distance(form, mask(g, -1, -0.5), mask(g, 0.5, 1))));
}

TEST_CASE("dirichlet interval: d against d1") {
    for (int n : {128, 1024}) {
        const DiscreteForm form = line_form(unit(), n, BoundaryCondition::dirichlet);
        const double h = 1.0 / n;
        const SetMask a = mask(form.grid(), 0, 0.3);
        const SetMask b = mask(form.grid(), 0.7, 1);
        const auto d = set_distance(form, a, b, DistanceMode::d);
        const auto d1 = set_distance(form, a, b, DistanceMode::d1);
        CHECK(std::abs(d.value - 0.4) <= 2 * h);
        CHECK(d1.value <= 2 * h);
        CHECK(d1.value > 0);
        CHECK(d1.scope == TruncationScope::global);
        CHECK(certificate_audit(form, d).pass);
        CHECK(certificate_audit(form, d1).pass);
    }
}

TEST_CASE("riemannian distance") {
    const double gap_tol = 2.0 / 256;
    {
        const Grid g = Grid::line(256, 0, 1);
        const auto r = riemannian_distance(unit(), g, mask(g, 0, 0.2), mask(g, 0.8, 1));
        CHECK(r.mode == DistanceMode::riemannian);
        CHECK_FALSE(r.certificate);
        CHECK(std::abs(r.value - 0.6) <= gap_tol);
        const auto r4 = riemannian_distance(CoefficientField::constant(4, Box::interval(0, 1)), g, mask(g, 0, 0.2),
                                            mask(g, 0.8, 1));
        CHECK(std::abs(r4.value - 0.3) <= gap_tol);
    }
    {
        // Path between the innermost centres -0.5 - h/2 and 0.5 + h/2.
        const int n = 256;
        const double h = 2.0 / n;
        const CoefficientField field = CoefficientField::degenerate(0.75, Box::interval(-1, 1));
        const Grid g = Grid::line(n, -1, 1);
        const auto r = riemannian_distance(field, g, mask(g, -1, -0.5), mask(g, 0.5, 1));
        const double core = 6.7945856009225614;  // int_{-1/2}^{1/2} c^{-1/2}, by x = u^4
        const double rim =
            2 * oracle::simpson([](double x) { return 1.0 / std::sqrt(c_delta(x, 0.75)); }, 0.5, 0.5 + h / 2, 256);
        CHECK(std::isfinite(r.value));
        CHECK(r.value == doctest::Approx(core + rim).epsilon(1e-8));
        CHECK(std::abs(r.value - core) <= 2 * h / std::sqrt(c_delta(0.5, 0.75)));
    }
    const Grid g = Grid::line(16, 0, 1);
    CHECK_THROWS_AS((void)riemannian_distance(unit(), g, SetMask(std::vector<std::uint8_t>(16, 0)), mask(g, 0, 1)),
                    ParameterError);
}

TEST_CASE("certificate audit") {
    const DiscreteForm form = line_form(wavy(), 200);
    const Grid& g = form.grid();
    auto r = set_distance(form, mask(g, 0.1, 0.3), mask(g, 0.6, 0.9), DistanceMode::d);
    REQUIRE(r.certificate);
    CHECK(certificate_audit(form, r).pass);

    DistanceReport doubled = r;
    *doubled.certificate *= 2.0;
    const AuditRecord bad = certificate_audit(form, doubled);
    CHECK_FALSE(bad.pass);
    CHECK(bad.param("norm") == doctest::Approx(4 * r.certificate_norm).epsilon(1e-12));

    DistanceReport clamped = r;
    *clamped.certificate = clamped.certificate->cwiseMax(0.0).cwiseMin(r.value);
    CHECK(certificate_audit(form, clamped).pass);

    DistanceReport shifted = r;
    shifted.certificate->array() += 3.0;
    CHECK(certificate_audit(form, shifted).pass);

    DistanceReport flattened = r;
    *flattened.certificate *= 0.5;
    CHECK_FALSE(certificate_audit(form, flattened).pass);

    SUBCASE("with a wrong-size certificate") {
        DistanceReport wrong = r;
        wrong.certificate = StateVector::Zero(10);
        CHECK_THROWS_AS((void)certificate_audit(form, wrong), GridMismatch);
    }
}

TEST_CASE("symmetry and set monotonicity") {
    const DiscreteForm form = line_form(wavy(), 150);
    const Grid& g = form.grid();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const SetMask a = random_set(g, 0, 0.45, rng);
        const SetMask b = random_set(g, 0.55, 1, rng);
        const double ab = distance(form, a, b);
        CHECK(ab == doctest::Approx(distance(form, b, a)).epsilon(1e-13));
        const SetMask bigger = SetMask::rasterize(g, Region{{Box::interval(0, 0.45)}});
        CHECK(distance(form, bigger, b) <= ab);
        CHECK(distance(form, a, SetMask::rasterize(g, Region::interval(0.55, 1))) <= ab);
    }
}

TEST_CASE("coefficient monotonicity and exact scaling") {
    const CoefficientField c = wavy();
    const DiscreteForm f1 = line_form(c, 200);
    const DiscreteForm f2 = line_form(c.scaled(2), 200);
    const DiscreteForm f4 = line_form(c.scaled(4), 200);
    const auto l1 = certified_lengths(f1).links;
    const auto l2 = certified_lengths(f2).links;
    for (std::size_t k = 0; k < l1.size(); ++k) CHECK(l2[k].length <= l1[k].length);

    const Grid& g = f1.grid();
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const SetMask a = random_set(g, 0, 0.4, rng);
        const SetMask b = random_set(g, 0.6, 1, rng);
        const double d1 = distance(f1, a, b);
        CHECK(distance(f2, a, b) <= d1);
        CHECK(distance(f2, a, b) == doctest::Approx(d1 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(distance(f4, a, b) == d1 / 2);
    }
}

TEST_CASE("elliptic sandwich") {
    // 1 <= 2 + sin(2 pi x) <= 3.
    for (int n : {64, 300}) {
        const DiscreteForm h = line_form(wavy(), n);
        const DiscreteForm l = line_form(unit(), n);
        const auto lh = certified_lengths(h).links;
        const auto ll = certified_lengths(l).links;
        for (std::size_t k = 0; k < lh.size(); ++k) {
            CHECK(lh[k].length <= ll[k].length * (1 + 1e-13));
            CHECK(lh[k].length >= ll[k].length / std::sqrt(3.0) * (1 - 1e-13));
        }
        std::mt19937_64 rng(13 + n);
        for (int trial = 0; trial < 10; ++trial) {
            const SetMask a = random_set(h.grid(), 0, 0.4, rng);
            const SetMask b = random_set(h.grid(), 0.6, 1, rng);
            const double dh = distance(h, a, b);
            const double dl = distance(l, a, b);
            CHECK(dh <= dl * (1 + 1e-13));
            CHECK(dh >= dl / std::sqrt(3.0) * (1 - 1e-13));
        }
    }
}

TEST_CASE("d1 never exceeds d") {
    std::mt19937_64 rng(14);
    for (auto bc : {BoundaryCondition::neumann, BoundaryCondition::dirichlet}) {
        const DiscreteForm form = line_form(wavy(), 120, bc);
        for (int trial = 0; trial < 20; ++trial) {
            const SetMask a = random_set(form.grid(), 0, 0.45, rng);
            const SetMask b = random_set(form.grid(), 0.55, 1, rng);
            const auto d = set_distance(form, a, b, DistanceMode::d);
            const auto d1 = set_distance(form, a, b, DistanceMode::d1);
            CHECK(d1.value <= d.value);
            if (bc == BoundaryCondition::neumann) CHECK(d1.value == d.value);
            CHECK(certificate_audit(form, d1).pass);
        }
    }
}

TEST_CASE("two-dimensional slabs") {
    const Box box = Box::rectangle(0, 1, 0, 1);
    const DiscreteForm form = assemble_form(CoefficientField::constant(1, box), Grid::rectangle(32, 32, box),
                                            BoundaryCondition::neumann, 0.0);
    const SetMask a = SetMask::rasterize(form.grid(), Region::box(0, 0.2, 0, 1));
    const SetMask b = SetMask::rasterize(form.grid(), Region::box(0.8, 1, 0, 1));
    const auto r = set_distance(form, a, b, DistanceMode::d);
    CHECK(std::abs(r.value - 0.6) <= 2.0 / 32);
    CHECK(r.rescale == 1.0);
    CHECK(certificate_audit(form, r).pass);

    // Corner blocks: grid paths overestimate the Euclidean distance, never underestimate it.
    const SetMask c = SetMask::rasterize(form.grid(), Region::box(0, 0.2, 0, 0.2));
    const SetMask e = SetMask::rasterize(form.grid(), Region::box(0.8, 1, 0.8, 1));
    const auto diag = set_distance(form, c, e, DistanceMode::d);
    CHECK(certificate_audit(form, diag).pass);
    CHECK(diag.value >= 0.6 * std::sqrt(2.0) - 2.0 / 32);
}

TEST_CASE("shortest path against the direct maximisation") {
    std::mt19937_64 rng(15);
    SUBCASE("long gaps agree") {
        const DiscreteForm form = line_form(wavy(), 80);
        const SetMask a = mask(form.grid(), 0, 0.2);
        const SetMask b = mask(form.grid(), 0.7, 1);
        const double d = distance(form, a, b);
        for (int start = 0; start < 3; ++start) {
            const auto best = oracle::maximise_gap(form, a, b, rng);
            REQUIRE(best.converged);
            CHECK(std::abs(best.value - d) <= 1e-3 * d);
        }
    }
    SUBCASE("three-link chain") {
        // With unit lengths the exact optimum of the per-cell program is sqrt(10), not 3.
        const DiscreteForm form = line_form(CoefficientField::constant(1, Box::interval(0, 4)), 4);
        const SetMask a = mask(form.grid(), 0, 1);
        const SetMask b = mask(form.grid(), 3, 4);
        CHECK(distance(form, a, b) == doctest::Approx(3.0).epsilon(1e-14));
        const auto best = oracle::maximise_gap(form, a, b, rng);
        REQUIRE(best.converged);
        CHECK(best.value == doctest::Approx(3.1622776601683795).epsilon(1e-7));
    }
}

TEST_CASE("fingerprints") {
    StateVector v(3);
    v << 1.0, -0.0, 2.0;
    StateVector w(3);
    w << 1.0, 0.0, 2.0;
    CHECK(fingerprint(v) == fingerprint(w));
    w(2) = std::nextafter(2.0, 3.0);
    CHECK(fingerprint(v) != fingerprint(w));
    CHECK(fingerprint(Grid::line(10, 0, 1)) != fingerprint(Grid::line(11, 0, 1)));
}
