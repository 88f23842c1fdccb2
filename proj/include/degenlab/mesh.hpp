#pragma once

/// @file mesh.hpp
/// @brief Uniform cell grids, cell masks, and the assembled discrete Dirichlet form.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "degenlab/fields.hpp"

namespace degenlab {

using StateVector = Eigen::VectorXd;

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector size does not match the grid it is used with.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class BoundaryCondition { neumann, dirichlet };

std::string to_string(BoundaryCondition bc);
BoundaryCondition boundary_from_string(const std::string& tag);

/// Adjacent-cell link; `second < 0` marks a dirichlet ghost link to the zero exterior.
struct GridEdge {
    int first = 0;
    int second = 0;
    Axis axis = Axis::x;
    EdgeGeometry geometry;

    [[nodiscard]] bool is_ghost() const { return second < 0; }
};

/// Uniform cell-centred grid on a box, in 1 or 2 dimensions.
///
/// Cells are numbered i + nx * j. Interior edges are listed by ascending
/// first cell (the +x link before the +y link); ghost edges follow in the same
/// order when requested.
class Grid {
public:
    static Grid line(int n, double lo, double hi);
    static Grid rectangle(int nx, int ny, const Box& box);
    static Grid over(const Box& box, int nx, int ny = 1);

    [[nodiscard]] int dim() const { return box_.dim; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] int size() const { return nx_ * ny_; }
    [[nodiscard]] const Box& box() const { return box_; }
    [[nodiscard]] double spacing(Axis axis) const { return axis == Axis::x ? hx_ : hy_; }
    /// Largest cell width.
    [[nodiscard]] double h() const { return dim() == 1 ? hx_ : std::max(hx_, hy_); }
    [[nodiscard]] double cell_volume() const { return dim() == 1 ? hx_ : hx_ * hy_; }
    [[nodiscard]] Eigen::VectorXd volumes() const;
    [[nodiscard]] Point center(int cell) const;
    [[nodiscard]] int cell_at(int ix, int iy = 0) const { return ix + nx_ * iy; }

    [[nodiscard]] const std::vector<GridEdge>& interior_edges() const { return interior_; }
    /// Links from boundary cells to the exterior through half a cell.
    [[nodiscard]] std::vector<GridEdge> ghost_edges() const;
    /// Number of interior edges incident to a cell.
    [[nodiscard]] int degree(int cell) const;

    [[nodiscard]] bool same_shape(const Grid& other) const;

private:
    Grid(Box box, int nx, int ny);

    Box box_;
    int nx_;
    int ny_;
    double hx_;
    double hy_;
    std::vector<GridEdge> interior_;
};

/// Union of coordinate intervals (1D) or boxes (2D).
struct Region {
    std::vector<Box> parts;

    static Region interval(double a, double b);
    static Region box(double x0, double x1, double y0, double y1);
    [[nodiscard]] bool contains(const Point& p) const;
};

/// A measurable set realised as a union of grid cells.
class SetMask {
public:
    SetMask() = default;
    explicit SetMask(std::vector<std::uint8_t> cells);

    /// Cells whose centre lies in the region (closed intervals).
    static SetMask rasterize(const Grid& grid, const Region& region);
    static SetMask from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred);
    static SetMask all(const Grid& grid);

    [[nodiscard]] int grid_size() const { return static_cast<int>(cells_.size()); }
    [[nodiscard]] bool contains(int cell) const { return cells_[static_cast<std::size_t>(cell)] != 0; }
    [[nodiscard]] int count() const;
    [[nodiscard]] bool empty() const { return count() == 0; }
    [[nodiscard]] SetMask complement() const;
    [[nodiscard]] bool intersects(const SetMask& other) const;
    [[nodiscard]] bool subset_of(const SetMask& other) const;
    [[nodiscard]] std::vector<int> indices() const;
    /// 0/1 vector.
    [[nodiscard]] StateVector indicator() const;

private:
    std::vector<std::uint8_t> cells_;
};

/// Interior or ghost link with its assembled conductance.
struct FormEdge {
    int first = 0;
    int second = 0;  ///< < 0 for a dirichlet ghost link
    Axis axis = Axis::x;
    double transmissibility = 0.0;

    [[nodiscard]] bool is_ghost() const { return second < 0; }
};

/// Which links a truncation quantity sees. `local` drops dirichlet ghost links
/// (test functions supported away from the boundary); `global` keeps them with
/// the exterior pinned to zero.
enum class TruncationScope { local, global };

/// Discrete form E(u, v) = sum_e T_e (du)_e (dv)_e on cell vectors, with the
/// self-adjoint operator H = V^{-1} K on L2(vol).
class DiscreteForm {
public:
    DiscreteForm(Grid grid, BoundaryCondition bc, double eps, std::vector<FormEdge> edges);

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] BoundaryCondition boundary() const { return bc_; }
    [[nodiscard]] double viscosity() const { return eps_; }
    [[nodiscard]] const std::vector<FormEdge>& edges() const { return edges_; }
    [[nodiscard]] int size() const { return grid_.size(); }
    [[nodiscard]] const Eigen::VectorXd& volumes() const { return vol_; }
    /// Stiffness K with phi^T K phi = E(phi, phi).
    [[nodiscard]] const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
    /// V^{-1/2} K V^{-1/2}: H in volume-orthonormal coordinates.
    [[nodiscard]] Eigen::SparseMatrix<double> symmetric_operator() const;
    /// H phi = V^{-1} K phi.
    [[nodiscard]] StateVector apply(const StateVector& phi) const;
    /// Connected components over links with T > 0 (ghost links ignored); cell -> component id.
    [[nodiscard]] std::vector<int> components(int* count = nullptr) const;

    void check(const StateVector& v, const char* what) const;

private:
    Grid grid_;
    BoundaryCondition bc_;
    double eps_;
    std::vector<FormEdge> edges_;
    Eigen::VectorXd vol_;
    Eigen::SparseMatrix<double> stiffness_;
};

DiscreteForm assemble_form(const CoefficientField& field, const Grid& grid, BoundaryCondition bc, double eps);

/// Volume-weighted inner product and norm.
double inner(const DiscreteForm& form, const StateVector& a, const StateVector& b);
double l2_norm(const DiscreteForm& form, const StateVector& v);
double l1_norm(const DiscreteForm& form, const StateVector& v);

/// E(psi, phi).
double form_energy(const DiscreteForm& form, const StateVector& psi, const StateVector& phi);

/// I_psi(phi) through the closed edge form sum_e T_e (d psi)_e^2 avg_e(phi).
double truncation_functional(const DiscreteForm& form, const StateVector& psi, const StateVector& phi);
/// I_psi(phi) = E(psi phi, psi) - E(psi^2, phi) / 2 evaluated literally.
double truncation_functional_definition(const DiscreteForm& form, const StateVector& psi, const StateVector& phi);

/// Per-cell Gamma_i = (2 vol_i)^{-1} sum_{e at i} T_e (d psi)_e^2.
StateVector gamma_density(const DiscreteForm& form, const StateVector& psi,
                          TruncationScope scope = TruncationScope::local);
/// |||I_psi|||: the supremum of |I_psi(phi)| over ||phi||_1 <= 1, i.e. max_i Gamma_i.
double truncation_norm(const DiscreteForm& form, const StateVector& psi,
                       TruncationScope scope = TruncationScope::local);

/// E(phi, phi) - E(e^{-psi} phi, e^{psi} phi), evaluated directly.
double exponential_perturbation_direct(const DiscreteForm& form, const StateVector& psi, const StateVector& phi);
/// Same quantity via sum_e 2 T_e phi_i phi_j (cosh (d psi)_e - 1).
double exponential_perturbation_closed(const DiscreteForm& form, const StateVector& psi, const StateVector& phi);

/// CSV dump: edge_id,cell_i,cell_j,T_e (cell_j = -1 for ghost links).
void write_edge_csv(const DiscreteForm& form, std::ostream& out);

}  // namespace degenlab
