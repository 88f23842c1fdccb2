#pragma once

/// @file auditor.hpp
/// @brief Audits of heat-kernel off-diagonal bounds, twisted semigroups,
/// invariant-subspace separation, wave finite speed, and refinement studies.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degenlab/audit_record.hpp"
#include "degenlab/metric.hpp"
#include "degenlab/propagator.hpp"

namespace degenlab {

/// 64 geometric points spanning [rho*/8, 2 rho*] with rho* = gap / (2t).
std::vector<double> rho_grid(double gap, double t);

/// Heat cross inner products against the Gaussian bound. Per t: one continuum
/// record with the mode-d distance and one certified record optimised over rho.
std::vector<AuditRecord> gaussian_bound_audit(const Propagator& prop, const SetMask& a, const SetMask& b,
                                              const std::vector<double>& t_grid, const std::string& subject = "",
                                              double continuum_tolerance = 0.0);

struct RhoTrace {
    std::vector<double> rho;
    std::vector<double> value;  ///< e^{rho^2 t - rho gap}
    double gap = 0.0;
    double t = 0.0;
    double rho_star = 0.0;
    double closed_form = 1.0;  ///< e^{-gap^2 / 4t} (1 when gap <= 0)
    std::size_t argmin = 0;
    double grid_min = 1.0;
    bool argmin_within_step = false;
    bool value_within_5pct = false;
};

RhoTrace rho_optimization_trace(const DiscreteForm& form, const StateVector& psi, const SetMask& a, const SetMask& b,
                                double t, TruncationScope scope = TruncationScope::local);

struct SeparationVerdict {
    std::vector<double> t_grid;
    std::vector<double> leakage;
    double path_distance = 0.0;  ///< raw mode-d value between A and its complement
    double set_distance = 0.0;   ///< 0 when a finite link touches the complement, else +inf
    bool invariant_one_t = false;
    bool invariant_all_t = false;
    bool distance_infinite = false;
    bool distance_positive = false;
    bool consistent = false;
    std::vector<AuditRecord> records;
};

/// Leakage threshold below which L2(A) counts as invariant.
inline constexpr double kLeakageThreshold = 1e-10;

/// The default separation time grid {2^-k : k = 0..10}.
std::vector<double> separation_times();

SeparationVerdict separation_audit(const Propagator& prop, const SetMask& a, const std::vector<double>& t_grid,
                                   const std::string& subject = "");

/// Wave cross inner products; zero (within tau) for |t| <= 0.9 d, plus a record
/// of the first t where the value exceeds 10 tau.
std::vector<AuditRecord> wave_speed_audit(const Propagator& prop, const SetMask& a, const SetMask& b,
                                          const std::vector<double>& t_grid, double tau, const std::string& subject = "");

/// Twisted-norm records: certified against e^{omega t}, observational against e^{|||I||| t}.
std::vector<AuditRecord> twist_bound_audit(const Propagator& prop, const std::vector<StateVector>& psi_samples,
                                           const std::vector<double>& t_grid, const std::string& subject = "");

/// E(psi phi)^{1/2} against |||I_psi|||^{1/2} ||phi|| + ||psi||_inf E(phi)^{1/2}, global scope.
std::vector<AuditRecord> multiplier_bound_audit(const DiscreteForm& form, const StateVector& psi,
                                                const std::vector<StateVector>& phi_samples,
                                                const std::string& subject = "");

struct RefinementStudy {
    std::string experiment;
    std::vector<int> sizes;
    std::vector<double> values;
    /// Least-squares slope of -log2 |error| against log2 n; +inf when every error is zero.
    double order = 0.0;
    bool monotone = false;
    double last_relative_change = 0.0;
    std::optional<double> target;
};

/// Evaluates `observable(n)` on a dyadic size sequence (each twice the last).
/// Errors are distances to `target` when given, otherwise successive differences.
RefinementStudy refinement_study(const std::string& experiment, const std::vector<int>& sizes,
                                 const std::function<double(int)>& observable,
                                 std::optional<double> target = std::nullopt);

}  // namespace degenlab
