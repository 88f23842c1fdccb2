#include "degenlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace degenlab {

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::neumann ? "neumann" : "dirichlet"; }

BoundaryCondition boundary_from_string(const std::string& tag) {
    if (tag == "neumann") return BoundaryCondition::neumann;
    if (tag == "dirichlet") return BoundaryCondition::dirichlet;
    throw ParameterError("unknown boundary condition '" + tag + "' (expected neumann or dirichlet)");
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(Box box, int nx, int ny) : box_(box), nx_(nx), ny_(ny) {
    if (nx_ < 1 || ny_ < 1) throw ParameterError("grid needs at least one cell per axis");
    if (box_.dim == 1 && ny_ != 1) throw ParameterError("1D grid must have ny = 1");
    hx_ = (box_.hi[0] - box_.lo[0]) / nx_;
    hy_ = box_.dim == 2 ? (box_.hi[1] - box_.lo[1]) / ny_ : 1.0;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const int c = cell_at(i, j);
            const Point p = center(c);
            if (i + 1 < nx_) {
                const Point q = center(c + 1);
                interior_.push_back({c, c + 1, Axis::x, {{Axis::x, p.x, q.x, p.y}, box_.dim == 2 ? hy_ : 1.0}});
            }
            if (box_.dim == 2 && j + 1 < ny_) {
                const Point q = center(c + nx_);
                interior_.push_back({c, c + nx_, Axis::y, {{Axis::y, p.y, q.y, p.x}, hx_}});
            }
        }
    }
}

Grid Grid::line(int n, double lo, double hi) { return {Box::interval(lo, hi), n, 1}; }

Grid Grid::rectangle(int nx, int ny, const Box& box) {
    if (box.dim != 2) throw ParameterError("rectangle grid needs a 2D box");
    return {box, nx, ny};
}

Grid Grid::over(const Box& box, int nx, int ny) { return box.dim == 1 ? Grid(box, nx, 1) : Grid(box, nx, ny); }

Eigen::VectorXd Grid::volumes() const { return Eigen::VectorXd::Constant(size(), cell_volume()); }

Point Grid::center(int cell) const {
    if (cell < 0 || cell >= size()) throw DomainError("cell index out of range");
    const int i = cell % nx_;
    const int j = cell / nx_;
    Point p{box_.lo[0] + (i + 0.5) * hx_, 0.0};
    if (box_.dim == 2) p.y = box_.lo[1] + (j + 0.5) * hy_;
    return p;
}

std::vector<GridEdge> Grid::ghost_edges() const {
    std::vector<GridEdge> ghosts;
    const double face_x = box_.dim == 2 ? hy_ : 1.0;
    for (int c = 0; c < size(); ++c) {
        const int i = c % nx_;
        const int j = c / nx_;
        const Point p = center(c);
        if (i == 0) ghosts.push_back({c, -1, Axis::x, {{Axis::x, box_.lo[0], p.x, p.y}, face_x}});
        if (i == nx_ - 1) ghosts.push_back({c, -1, Axis::x, {{Axis::x, p.x, box_.hi[0], p.y}, face_x}});
        if (box_.dim == 2) {
            if (j == 0) ghosts.push_back({c, -1, Axis::y, {{Axis::y, box_.lo[1], p.y, p.x}, hx_}});
            if (j == ny_ - 1) ghosts.push_back({c, -1, Axis::y, {{Axis::y, p.y, box_.hi[1], p.x}, hx_}});
        }
    }
    return ghosts;
}

int Grid::degree(int cell) const {
    const int i = cell % nx_;
    const int j = cell / nx_;
    int d = (i > 0) + (i + 1 < nx_);
    if (box_.dim == 2) d += (j > 0) + (j + 1 < ny_);
    return d;
}

bool Grid::same_shape(const Grid& other) const {
    return box_.dim == other.box_.dim && nx_ == other.nx_ && ny_ == other.ny_ && box_.lo == other.box_.lo &&
           box_.hi == other.box_.hi;
}

// ---------------------------------------------------------------------------
// Regions and masks

Region Region::interval(double a, double b) { return {{Box::interval(a, b)}}; }

Region Region::box(double x0, double x1, double y0, double y1) { return {{Box::rectangle(x0, x1, y0, y1)}}; }

bool Region::contains(const Point& p) const {
    return std::any_of(parts.begin(), parts.end(), [&](const Box& b) { return b.contains(p, 0.0); });
}

SetMask::SetMask(std::vector<std::uint8_t> cells) : cells_(std::move(cells)) {}

SetMask SetMask::rasterize(const Grid& grid, const Region& region) {
    for (const Box& part : region.parts)
        if (part.dim != grid.dim()) throw DomainError("region dimension does not match the grid");
    return from_predicate(grid, [&](const Point& p) { return region.contains(p); });
}

SetMask SetMask::from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred) {
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(grid.size()));
    for (int c = 0; c < grid.size(); ++c) cells[static_cast<std::size_t>(c)] = pred(grid.center(c)) ? 1 : 0;
    return SetMask(std::move(cells));
}

SetMask SetMask::all(const Grid& grid) { return SetMask(std::vector<std::uint8_t>(static_cast<std::size_t>(grid.size()), 1)); }

int SetMask::count() const { return static_cast<int>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1})); }

SetMask SetMask::complement() const {
    std::vector<std::uint8_t> out(cells_.size());
    std::transform(cells_.begin(), cells_.end(), out.begin(), [](std::uint8_t v) -> std::uint8_t { return v ? 0 : 1; });
    return SetMask(std::move(out));
}

bool SetMask::intersects(const SetMask& other) const {
    if (other.cells_.size() != cells_.size()) throw GridMismatch("masks live on different grids");
    for (std::size_t k = 0; k < cells_.size(); ++k)
        if (cells_[k] && other.cells_[k]) return true;
    return false;
}

bool SetMask::subset_of(const SetMask& other) const {
    if (other.cells_.size() != cells_.size()) throw GridMismatch("masks live on different grids");
    for (std::size_t k = 0; k < cells_.size(); ++k)
        if (cells_[k] && !other.cells_[k]) return false;
    return true;
}

std::vector<int> SetMask::indices() const {
    std::vector<int> out;
    for (std::size_t k = 0; k < cells_.size(); ++k)
        if (cells_[k]) out.push_back(static_cast<int>(k));
    return out;
}

StateVector SetMask::indicator() const {
    StateVector v(static_cast<Eigen::Index>(cells_.size()));
    for (std::size_t k = 0; k < cells_.size(); ++k) v[static_cast<Eigen::Index>(k)] = cells_[k] ? 1.0 : 0.0;
    return v;
}

// ---------------------------------------------------------------------------
// Discrete form

DiscreteForm::DiscreteForm(Grid grid, BoundaryCondition bc, double eps, std::vector<FormEdge> edges)
    : grid_(std::move(grid)), bc_(bc), eps_(eps), edges_(std::move(edges)), vol_(grid_.volumes()) {
    const int n = grid_.size();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edges_.size() * 4);
    for (const FormEdge& e : edges_) {
        if (!std::isfinite(e.transmissibility) || e.transmissibility < 0.0)
            throw AssemblyError("non-finite or negative transmissibility on edge " + std::to_string(e.first) + "-" +
                                std::to_string(e.second));
        if (e.first < 0 || e.first >= n || e.second >= n) throw AssemblyError("edge references a missing cell");
        const double t = e.transmissibility;
        triplets.emplace_back(e.first, e.first, t);
        if (!e.is_ghost()) {
            triplets.emplace_back(e.second, e.second, t);
            triplets.emplace_back(e.first, e.second, -t);
            triplets.emplace_back(e.second, e.first, -t);
        }
    }
    stiffness_.resize(n, n);
    stiffness_.setFromTriplets(triplets.begin(), triplets.end());
    stiffness_.makeCompressed();
}

Eigen::SparseMatrix<double> DiscreteForm::symmetric_operator() const {
    const Eigen::VectorXd s = vol_.cwiseSqrt().cwiseInverse();
    return s.asDiagonal() * stiffness_ * s.asDiagonal();
}

StateVector DiscreteForm::apply(const StateVector& phi) const {
    check(phi, "apply");
    // Flux differences edge by edge keep H 1 = 0 exact under neumann.
    StateVector out = StateVector::Zero(phi.size());
    for (const FormEdge& e : edges_) {
        if (e.is_ghost()) {
            out[e.first] += e.transmissibility * phi[e.first];
            continue;
        }
        const double flux = e.transmissibility * (phi[e.first] - phi[e.second]);
        out[e.first] += flux;
        out[e.second] -= flux;
    }
    return out.cwiseQuotient(vol_);
}

std::vector<int> DiscreteForm::components(int* count) const {
    const int n = size();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    for (const FormEdge& e : edges_) {
        if (e.is_ghost() || e.transmissibility <= 0.0) continue;
        const int a = find(e.first);
        const int b = find(e.second);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<int> comp(static_cast<std::size_t>(n));
    int next = 0;
    for (int c = 0; c < n; ++c) {
        const int r = find(c);
        if (label[static_cast<std::size_t>(r)] < 0) label[static_cast<std::size_t>(r)] = next++;
        comp[static_cast<std::size_t>(c)] = label[static_cast<std::size_t>(r)];
    }
    if (count) *count = next;
    return comp;
}

void DiscreteForm::check(const StateVector& v, const char* what) const {
    if (v.size() != size())
        throw GridMismatch(std::string(what) + ": vector of size " + std::to_string(v.size()) + " on a grid of " +
                           std::to_string(size()) + " cells");
    if (!v.allFinite()) throw ParameterError(std::string(what) + ": vector has non-finite entries");
}

DiscreteForm assemble_form(const CoefficientField& field, const Grid& grid, BoundaryCondition bc, double eps) {
    if (field.dim() != grid.dim()) throw DomainError("field and grid dimensions differ");
    const Box& fb = field.domain();
    const Box& gb = grid.box();
    for (int a = 0; a < grid.dim(); ++a) {
        const double slack = 1e-12 * std::max(1.0, fb.hi[a] - fb.lo[a]);
        if (gb.lo[a] < fb.lo[a] - slack || gb.hi[a] > fb.hi[a] + slack)
            throw DomainError("grid extends beyond the field domain");
    }
    std::vector<FormEdge> edges;
    edges.reserve(grid.interior_edges().size());
    for (const GridEdge& e : grid.interior_edges())
        edges.push_back({e.first, e.second, e.axis, edge_transmissibility(field, e.geometry, eps)});
    if (bc == BoundaryCondition::dirichlet)
        for (const GridEdge& e : grid.ghost_edges())
            edges.push_back({e.first, -1, e.axis, edge_transmissibility(field, e.geometry, eps)});
    return {grid, bc, eps, std::move(edges)};
}

double inner(const DiscreteForm& form, const StateVector& a, const StateVector& b) {
    form.check(a, "inner");
    form.check(b, "inner");
    return (a.array() * b.array() * form.volumes().array()).sum();
}

double l2_norm(const DiscreteForm& form, const StateVector& v) { return std::sqrt(inner(form, v, v)); }

double l1_norm(const DiscreteForm& form, const StateVector& v) {
    form.check(v, "l1_norm");
    return (v.array().abs() * form.volumes().array()).sum();
}

namespace {

double other_value(const FormEdge& e, const StateVector& v) { return e.is_ghost() ? 0.0 : v[e.second]; }

}  // namespace

double form_energy(const DiscreteForm& form, const StateVector& psi, const StateVector& phi) {
    form.check(psi, "form_energy");
    form.check(phi, "form_energy");
    // Edge by edge, so constants give exactly zero.
    double sum = 0.0;
    for (const FormEdge& e : form.edges())
        sum += e.transmissibility * (psi[e.first] - other_value(e, psi)) * (phi[e.first] - other_value(e, phi));
    return sum;
}

double truncation_functional(const DiscreteForm& form, const StateVector& psi, const StateVector& phi) {
    form.check(psi, "truncation_functional");
    form.check(phi, "truncation_functional");
    double sum = 0.0;
    for (const FormEdge& e : form.edges()) {
        const double d = psi[e.first] - other_value(e, psi);
        sum += e.transmissibility * d * d * 0.5 * (phi[e.first] + other_value(e, phi));
    }
    return sum;
}

double truncation_functional_definition(const DiscreteForm& form, const StateVector& psi, const StateVector& phi) {
    const StateVector psi_phi = psi.cwiseProduct(phi);
    const StateVector psi_sq = psi.cwiseProduct(psi);
    return form_energy(form, psi_phi, psi) - 0.5 * form_energy(form, psi_sq, phi);
}

StateVector gamma_density(const DiscreteForm& form, const StateVector& psi, TruncationScope scope) {
    form.check(psi, "gamma_density");
    StateVector gamma = StateVector::Zero(form.size());
    for (const FormEdge& e : form.edges()) {
        if (e.is_ghost() && scope == TruncationScope::local) continue;
        const double d = psi[e.first] - other_value(e, psi);
        const double w = e.transmissibility * d * d;
        gamma[e.first] += w;
        if (!e.is_ghost()) gamma[e.second] += w;
    }
    return gamma.cwiseQuotient(2.0 * form.volumes());
}

double truncation_norm(const DiscreteForm& form, const StateVector& psi, TruncationScope scope) {
    return gamma_density(form, psi, scope).maxCoeff();
}

double exponential_perturbation_direct(const DiscreteForm& form, const StateVector& psi, const StateVector& phi) {
    form.check(psi, "exponential_perturbation");
    const StateVector down = (-psi.array()).exp().matrix().cwiseProduct(phi);
    const StateVector up = psi.array().exp().matrix().cwiseProduct(phi);
    return form_energy(form, phi, phi) - form_energy(form, down, up);
}

double exponential_perturbation_closed(const DiscreteForm& form, const StateVector& psi, const StateVector& phi) {
    form.check(psi, "exponential_perturbation");
    form.check(phi, "exponential_perturbation");
    double sum = 0.0;
    for (const FormEdge& e : form.edges()) {
        if (e.is_ghost()) continue;  // the zero exterior cancels exactly
        const double d = psi[e.first] - psi[e.second];
        const double sh = std::sinh(0.5 * d);
        sum += 4.0 * e.transmissibility * phi[e.first] * phi[e.second] * sh * sh;  // 2 T (cosh d - 1)
    }
    return sum;
}

void write_edge_csv(const DiscreteForm& form, std::ostream& out) {
    out << "edge_id,cell_i,cell_j,T_e\n";
    const auto old = out.precision(17);
    for (std::size_t k = 0; k < form.edges().size(); ++k) {
        const FormEdge& e = form.edges()[k];
        out << k << ',' << e.first << ',' << e.second << ',' << e.transmissibility << '\n';
    }
    out.precision(old);
}

}  // namespace degenlab
