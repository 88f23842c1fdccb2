#include <doctest.h>

#include <sstream>

#include "degenlab/mesh.hpp"
#include "support/oracles.hpp"

using namespace degenlab;

namespace {

DiscreteForm unit_laplacian(int n, BoundaryCondition bc = BoundaryCondition::neumann) {
    return assemble_form(CoefficientField::constant(1.0, Box::interval(0, 1)), Grid::line(n, 0, 1), bc, 0.0);
}

StateVector coordinate(const Grid& g) {
    StateVector x(g.size());
    for (int i = 0; i < g.size(); ++i) x(i) = g.center(i).x;
    return x;
}

}  // namespace

TEST_CASE("grid structure") {
    const Grid line = Grid::line(10, 0, 2);
    CHECK(line.size() == 10);
    CHECK(line.h() == doctest::Approx(0.2));
    CHECK(line.interior_edges().size() == 9);
    CHECK(line.ghost_edges().size() == 2);
    CHECK(line.center(0).x == doctest::Approx(0.1));
    CHECK((line.volumes().array() > 0).all());

    const Grid rect = Grid::rectangle(6, 4, Box::rectangle(0, 3, 0, 1));
    CHECK(rect.size() == 24);
    CHECK(rect.interior_edges().size() == 5 * 4 + 6 * 3);
    CHECK(rect.ghost_edges().size() == 2 * 6 + 2 * 4);
    CHECK(rect.cell_volume() == doctest::Approx(0.5 * 0.25));
    std::vector<int> degree(24, 0);
    for (const auto& e : rect.interior_edges()) {
        ++degree[e.first];
        ++degree[e.second];
        // adjacent cells only
        const int d = std::abs(e.second - e.first);
        CHECK((d == 1 || d == 6));
    }
    for (int j = 1; j < 3; ++j)
        for (int i = 1; i < 5; ++i) CHECK(degree[rect.cell_at(i, j)] == 4);
}

TEST_CASE("unit Laplacian assembly") {
    const int n = 8;
    const auto form = unit_laplacian(n);
    const double h = 1.0 / n;
    const Eigen::MatrixXd k(form.stiffness());
    for (int i = 0; i < n; ++i) {
        const double diag = (i == 0 || i == n - 1) ? 1.0 / h : 2.0 / h;
        CHECK(k(i, i) == doctest::Approx(diag));
        if (i + 1 < n) CHECK(k(i, i + 1) == doctest::Approx(-1.0 / h));
    }
    CHECK(k.isApprox(k.transpose(), 0.0));
    const StateVector ones = StateVector::Ones(n);
    CHECK(form.apply(ones).cwiseAbs().maxCoeff() == 0.0);

    const auto dir = unit_laplacian(n, BoundaryCondition::dirichlet);
    const Eigen::MatrixXd kd(dir.stiffness());
    CHECK(kd(0, 0) == doctest::Approx(1.0 / h + 2.0 / h));  // ghost link over half a cell
    CHECK(form_energy(dir, ones, ones) == doctest::Approx(2 * 2.0 / h));
}

TEST_CASE("degenerate field decouples at zero viscosity") {
    const auto f = CoefficientField::degenerate(0.75, Box::interval(-1, 1));
    const auto form = assemble_form(f, Grid::line(64, -1, 1), BoundaryCondition::neumann, 0.0);
    const Eigen::MatrixXd k(form.stiffness());
    CHECK(k.block(0, 32, 32, 32).cwiseAbs().maxCoeff() == 0.0);
    int count = 0;
    const auto comp = form.components(&count);
    CHECK(count == 2);
    CHECK(comp[0] != comp[63]);
    // zero-transmissibility edges stay in the edge list
    bool found = false;
    for (const auto& e : form.edges()) found |= (e.first == 31 && e.second == 32 && e.transmissibility == 0.0);
    CHECK(found);

    const auto viscous = assemble_form(f, Grid::line(64, -1, 1), BoundaryCondition::neumann, 1e-4);
    (void)viscous.components(&count);
    CHECK(count == 1);
}

TEST_CASE("viscosity shift is additive for constant fields") {
    const Grid g = Grid::line(32, 0, 1);
    const auto a = assemble_form(CoefficientField::constant(1.0, Box::interval(0, 1)), g, BoundaryCondition::dirichlet, 0.5);
    const auto b = assemble_form(CoefficientField::constant(1.5, Box::interval(0, 1)), g, BoundaryCondition::dirichlet, 0.0);
    REQUIRE(a.edges().size() == b.edges().size());
    for (std::size_t k = 0; k < a.edges().size(); ++k)
        CHECK(a.edges()[k].transmissibility == doctest::Approx(b.edges()[k].transmissibility).epsilon(1e-15));
}

TEST_CASE("form energy") {
    const int n = 16;
    const auto form = unit_laplacian(n);
    const double h = 1.0 / n;
    StateVector hat = StateVector::Zero(n);
    hat(5) = 1.0;
    CHECK(form_energy(form, hat, hat) == doctest::Approx(2.0 / h));
    CHECK(form_energy(form, StateVector::Ones(n), StateVector::Ones(n)) == 0.0);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        const StateVector a = oracle::random_vector(n, rng), b = oracle::random_vector(n, rng);
        CHECK(form_energy(form, a, b) == doctest::Approx(form_energy(form, b, a)).epsilon(1e-14));
        CHECK(form_energy(form, a, a) >= 0.0);
    }
    CHECK_THROWS_AS(form_energy(form, StateVector::Zero(3), hat), GridMismatch);
    StateVector bad = hat;
    bad(0) = std::nan("");
    CHECK_THROWS(form_energy(form, bad, hat));
}

TEST_CASE("norms against cell volumes") {
    const auto form = unit_laplacian(4);
    StateVector v(4);
    v << 1, -2, 0, 2;
    CHECK(l2_norm(form, v) == doctest::Approx(std::sqrt(9.0 / 4)));
    CHECK(l1_norm(form, v) == doctest::Approx(5.0 / 4));
    CHECK(inner(form, v, StateVector::Ones(4)) == doctest::Approx(1.0 / 4));
}

TEST_CASE("truncation functional and norm") {
    const int n = 32;
    const auto form = unit_laplacian(n);
    const double h = 1.0 / n;
    const StateVector x = coordinate(form.grid());
    std::mt19937_64 rng(5);

    const StateVector phi = oracle::random_vector(n, rng, 0.0, 1.0);
    CHECK(truncation_functional(form, StateVector::Constant(n, 3.5), phi) == 0.0);
    double expected = 0.0;
    for (int i = 0; i + 1 < n; ++i) expected += (1.0 / h) * h * h * 0.5 * (phi(i) + phi(i + 1));
    CHECK(truncation_functional(form, x, phi) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(truncation_functional(form, oracle::random_vector(n, rng), phi) >= 0.0);

    CHECK(truncation_norm(form, StateVector::Constant(n, -2.0)) == 0.0);
    const StateVector gamma = gamma_density(form, x);
    for (int i = 1; i + 1 < n; ++i) CHECK(gamma(i) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gamma(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(truncation_norm(form, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(truncation_norm(form, x) == gamma.maxCoeff());
    // refinement independence of the interior density
    const auto fine = unit_laplacian(4 * n);
    const StateVector gf = gamma_density(fine, coordinate(fine.grid()));
    CHECK(gf(7) == doctest::Approx(1.0).epsilon(1e-12));

    for (int k = 0; k < 10; ++k) {
        const StateVector psi = oracle::random_vector(n, rng);
        for (double rho : {0.5, 2.0, 3.0})
            CHECK(truncation_norm(form, rho * psi) == doctest::Approx(rho * rho * truncation_norm(form, psi)).epsilon(1e-14));
    }
}

TEST_CASE("truncation scope under dirichlet") {
    const auto form = unit_laplacian(16, BoundaryCondition::dirichlet);
    const StateVector ones = StateVector::Ones(16);
    CHECK(truncation_norm(form, ones, TruncationScope::local) == 0.0);
    // ghost link: T = 2/h, jump 1, vol h -> (2 h)^{-1} * 2/h = 1/h^2
    CHECK(truncation_norm(form, ones, TruncationScope::global) == doctest::Approx(256.0));
}

TEST_CASE("closed and definitional truncation forms agree") {
    std::mt19937_64 rng(17);
    const std::vector<DiscreteForm> forms{
        unit_laplacian(40, BoundaryCondition::dirichlet),
        assemble_form(CoefficientField::sinusoid(2, 1, 1, 0, Box::rectangle(0, 1, 0, 1)), Grid::rectangle(9, 7, Box::rectangle(0, 1, 0, 1)),
                      BoundaryCondition::neumann, 0.0),
        assemble_form(CoefficientField::degenerate(0.75, Box::interval(-1, 1)), Grid::line(50, -1, 1), BoundaryCondition::dirichlet, 0.0),
    };
    for (const auto& form : forms) {
        for (int k = 0; k < 30; ++k) {
            const StateVector psi = oracle::random_vector(form.size(), rng);
            const StateVector phi = oracle::random_vector(form.size(), rng);
            const double closed = truncation_functional(form, psi, phi);
            const double def = truncation_functional_definition(form, psi, phi);
            CHECK(std::abs(closed - def) <= 1e-12 * std::max(1.0, std::abs(closed)) * 100);
        }
    }
}

TEST_CASE("truncation functional converges at second order") {
    const auto f = CoefficientField::sinusoid(2, 1, 1, 0, Box::interval(0, 1));
    // int_0^1 (1 + x^2)(2 + sin 2 pi x) (pi sin pi x)^2 dx, by Simpson on the smooth integrand
    const double exact = oracle::simpson([](double x) {
        const double d = M_PI * std::sin(M_PI * x);
        return (1 + x * x) * (2 + std::sin(2 * M_PI * x)) * d * d;
    }, 0.0, 1.0);
    std::vector<double> err;
    for (int n : {32, 64, 128, 256}) {
        const Grid g = Grid::line(n, 0, 1);
        const auto form = assemble_form(f, g, BoundaryCondition::neumann, 0.0);
        StateVector psi(n), phi(n);
        for (int i = 0; i < n; ++i) {
            const double x = g.center(i).x;
            psi(i) = std::cos(M_PI * x);
            phi(i) = 1 + x * x;
        }
        err.push_back(std::abs(truncation_functional(form, psi, phi) - exact));
    }
    for (std::size_t k = 1; k < err.size(); ++k) {
        const double ratio = err[k - 1] / err[k];
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
    }
}

TEST_CASE("exponential perturbation identity") {
    std::mt19937_64 rng(23);
    const auto form = assemble_form(CoefficientField::sinusoid(2, 1, 1, 0, Box::interval(0, 1)), Grid::line(64, 0, 1),
                                    BoundaryCondition::dirichlet, 0.0);
    for (int k = 0; k < 20; ++k) {
        const StateVector psi = oracle::random_vector(64, rng, -0.05, 0.05);
        const StateVector phi = oracle::random_vector(64, rng);
        const double direct = exponential_perturbation_direct(form, psi, phi);
        const double closed = exponential_perturbation_closed(form, psi, phi);
        CHECK(std::abs(direct - closed) <= 1e-12 * (std::abs(direct) + form_energy(form, phi, phi)));
    }
    // Taylor consistency: the cosh sum is sum T phi_i phi_j (d psi)^2 to fourth order, and that
    // quadratic term differs from I_psi(phi^2) by exactly half of sum T (d psi)^2 (d phi)^2.
    const StateVector psi = oracle::smooth_vector(form.grid(), rng);
    const StateVector phi = oracle::smooth_vector(form.grid(), rng).array() + 1.5;
    const StateVector phi2 = phi.cwiseProduct(phi);
    std::vector<double> residual;
    for (double rho : {0.1, 0.05, 0.025}) {
        const StateVector p = rho * psi;
        double quadratic = 0.0, mismatch = 0.0, ghost = 0.0;
        for (const auto& e : form.edges()) {
            if (e.is_ghost()) {
                ghost += 0.5 * e.transmissibility * p(e.first) * p(e.first) * phi2(e.first);
                continue;
            }
            const double dp = p(e.first) - p(e.second);
            const double df = phi(e.first) - phi(e.second);
            quadratic += e.transmissibility * phi(e.first) * phi(e.second) * dp * dp;
            mismatch += 0.5 * e.transmissibility * dp * dp * df * df;
        }
        residual.push_back(std::abs(exponential_perturbation_closed(form, p, phi) - quadratic));
        CHECK(truncation_functional(form, p, phi2) - ghost ==
              doctest::Approx(quadratic + mismatch).epsilon(1e-12));
    }
    CHECK(residual[0] / residual[1] == doctest::Approx(16.0).epsilon(0.05));
    CHECK(residual[1] / residual[2] == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("edge dump") {
    const auto form = unit_laplacian(3, BoundaryCondition::dirichlet);
    std::ostringstream os;
    write_edge_csv(form, os);
    const std::string s = os.str();
    CHECK(s.rfind("edge_id,cell_i,cell_j,T_e\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 2 + 2);
}
