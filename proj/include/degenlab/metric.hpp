#pragma once

/// @file metric.hpp
/// @brief Set distances certified by truncation-bounded test functions, the
/// boundary-anchored variant, and the Riemannian path distance for contrast.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degenlab/audit_record.hpp"
#include "degenlab/mesh.hpp"

namespace degenlab {

enum class LengthMode { certified, riemannian };
enum class DistanceMode { d, d1, riemannian };

std::string to_string(LengthMode mode);
std::string to_string(DistanceMode mode);
DistanceMode distance_mode_from_string(const std::string& tag);

/// Per-link lengths for shortest-path sweeps. Ghost links join a single
/// exterior node numbered `cells`.
struct EdgeLengthTable {
    struct Link {
        int first = 0;
        int second = 0;  ///< exterior node for ghost links
        double length = 0.0;  ///< +inf for cut links
    };

    LengthMode mode = LengthMode::certified;
    int cells = 0;
    std::vector<Link> links;

    [[nodiscard]] int nodes() const { return cells + 1; }
    [[nodiscard]] int exterior() const { return cells; }
};

/// Certified lengths (min(vol_i, vol_j) / T_e)^{1/2}: a function whose jump
/// across every link is at most its length has Gamma_i <= deg_i / 2.
EdgeLengthTable certified_lengths(const DiscreteForm& form);
/// Lengths int_edge c^{-1/2} along the centre-to-centre segments (interior links only).
EdgeLengthTable riemannian_lengths(const CoefficientField& field, const Grid& grid);

/// Multi-source shortest paths: node potentials min_s (value_s + dist(s, .)).
/// Ties between equal labels are settled in ascending node order.
std::vector<double> shortest_potentials(const EdgeLengthTable& table, const std::vector<std::pair<int, double>>& sources);

struct DistanceReport {
    DistanceMode mode = DistanceMode::d;
    double value = 0.0;  ///< may be +inf
    std::optional<StateVector> certificate;
    double certificate_norm = 0.0;
    TruncationScope scope = TruncationScope::local;
    /// Factor applied to the raw sweep certificate to enforce Gamma <= 1 (1 unless a 2D cell saw several steep links).
    double rescale = 1.0;
    double path_value = 0.0;  ///< raw shortest-path value before any rescale
    SetMask a;
    SetMask b;
    int grid_cells = 0;
    std::string field_label;
};

/// min_A psi - max_B psi.
double pointwise_gap(const StateVector& psi, const SetMask& a, const SetMask& b);

DistanceReport set_distance(const DiscreteForm& form, const SetMask& a, const SetMask& b, DistanceMode mode);

DistanceReport riemannian_distance(const CoefficientField& field, const Grid& grid, const SetMask& a, const SetMask& b);

/// Rechecks norm <= 1 + 1e-12 and gap >= value - 1e-12 on the report's certificate.
AuditRecord certificate_audit(const DiscreteForm& form, const DistanceReport& report);

/// FNV-1a over the bytes of a vector; stable across runs on one platform.
std::uint64_t fingerprint(const StateVector& v);
std::uint64_t fingerprint(const Grid& grid);

}  // namespace degenlab
