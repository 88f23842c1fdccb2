#pragma once

/// @file propagator.hpp
/// @brief Functional calculus of the assembled operator: heat semigroup,
/// resolvent, wave propagator, and the twisted-semigroup growth rate.

#include <memory>
#include <mutex>
#include <vector>

#include "degenlab/mesh.hpp"

namespace degenlab {

/// Eigenpairs of H restricted to one connected component, in volume-orthonormal coordinates.
struct SpectralComponent {
    std::vector<int> cells;
    Eigen::VectorXd eigenvalues;   ///< ascending
    Eigen::MatrixXd eigenvectors;  ///< columns, rows indexed like `cells`
};

struct PropagatorOptions {
    /// Largest grid handled by dense spectral calculus; Lanczos beyond.
    int dense_limit = 4096;
    double krylov_tolerance = 1e-11;
    int krylov_max_dimension = 250;
    /// Uniform error target of the Chebyshev wave expansion.
    double chebyshev_tolerance = 1e-13;
    double power_tolerance = 1e-8;
    int power_max_iterations = 10000;
};

enum class WaveMethod { automatic, spectral, chebyshev };
enum class PropagatorKind { heat, wave };

class Propagator {
public:
    explicit Propagator(DiscreteForm form, PropagatorOptions options = {});

    [[nodiscard]] const DiscreteForm& form() const { return form_; }
    [[nodiscard]] const PropagatorOptions& options() const { return options_; }
    /// True when the dense spectral route is used for this grid.
    [[nodiscard]] bool dense() const { return form_.size() <= options_.dense_limit; }

    /// Spectral cache, built on first use; throws if the grid exceeds the dense limit.
    [[nodiscard]] const std::vector<SpectralComponent>& spectrum() const;
    /// Largest eigenvalue of the cached spectrum.
    [[nodiscard]] double max_eigenvalue() const;
    /// Gershgorin upper bound on the spectrum of H.
    [[nodiscard]] double gershgorin_bound() const;

    /// e^{-tH} phi, t > 0.
    [[nodiscard]] StateVector heat(const StateVector& phi, double t) const;
    /// (H + lambda)^{-1} phi, lambda > 0, by sparse factorisation.
    [[nodiscard]] StateVector resolvent(const StateVector& phi, double lambda) const;
    /// cos(t H^{1/2}) phi.
    [[nodiscard]] StateVector wave(const StateVector& phi, double t, WaveMethod method = WaveMethod::automatic) const;
    /// (1_A, K_t 1_B) with K_t = e^{-tH} (t >= 0) or cos(t H^{1/2}).
    [[nodiscard]] double cross_inner(const SetMask& a, const SetMask& b, double t, PropagatorKind kind) const;

    /// Block [rows, cols] of e^{-tH} in volume-orthonormal coordinates (dense route only).
    [[nodiscard]] Eigen::MatrixXd heat_block(const SetMask& rows, const SetMask& cols, double t) const;
    [[nodiscard]] Eigen::MatrixXd heat_matrix(double t) const;

private:
    StateVector spectral_apply(const StateVector& phi, const std::function<double(double)>& f) const;
    StateVector lanczos_heat(const StateVector& u, double t) const;
    StateVector chebyshev_wave(const StateVector& phi, double t) const;

    DiscreteForm form_;
    PropagatorOptions options_;
    Eigen::VectorXd sqrt_vol_;
    Eigen::SparseMatrix<double> h_sym_;
    mutable std::once_flag spectrum_once_;
    mutable std::vector<SpectralComponent> spectrum_;
};

/// Spectral norm of a dense matrix (largest singular value).
double spectral_norm(const Eigen::MatrixXd& m);

/// Operator norm of 1_{A^c} S_t 1_A on L2(vol): how much of L2(A) leaks out in time t.
double leakage_norm(const Propagator& prop, const SetMask& a, double t);

/// ||M_psi S_t M_psi^{-1}||_{2->2} with M_psi = multiplication by e^{psi}.
/// Dense SVD within the dense limit; power iteration beyond.
double twisted_norm(const Propagator& prop, const StateVector& psi, double t);

/// omega(psi) = max_i vol_i^{-1} sum_{interior e at i} T_e (cosh (d psi)_e - 1).
/// Certified: ||M_psi S_t M_psi^{-1}|| <= e^{omega t} for the discrete operator.
double exponential_twist_growth(const DiscreteForm& form, const StateVector& psi);

struct ViscosityStep {
    double eps = 0.0;
    StateVector resolvent;
    double test_form_value = 0.0;  ///< h_eps(phi) for the fixed input phi
    double own_form_value = 0.0;   ///< h_eps(u_eps)
    double gap_to_previous = 0.0;  ///< ||u_eps - u_prev||_2 (0 for the first step)
    double gap_to_limit = 0.0;     ///< ||u_eps - u_0||_2
};

struct ViscosityStudy {
    std::vector<ViscosityStep> steps;
    StateVector limit;  ///< resolvent of the eps = 0 (harmonic-limit) assembly
    double lambda = 1.0;
    bool cauchy = false;                ///< successive gaps strictly decreasing
    bool form_values_nonincreasing = false;
    double final_gap = 0.0;
    std::vector<double> observed_rates;  ///< log(gap_k / gap_{k-1}) / log(eps_k / eps_{k-1})
};

ViscosityStudy viscosity_limit_study(const CoefficientField& field, const Grid& grid, BoundaryCondition bc,
                                     const StateVector& phi, double lambda, const std::vector<double>& eps_sequence);

}  // namespace degenlab
