#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace degenlab {

/// certified: a theorem of the discrete system. continuum: a target that holds
/// in the continuum limit. observational: logged, never gates the exit code.
enum class RecordKind { certified, continuum, observational };

std::string to_string(RecordKind kind);

struct AuditRecord {
    std::string audit;
    RecordKind kind = RecordKind::certified;
    std::string subject;  ///< field / sets / instance label
    std::vector<std::pair<std::string, double>> params;
    double left = 0.0;
    double right = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;

    /// Fills margin and pass from left, right, tolerance.
    /// right = +inf is a sentinel: pass iff |left| <= tolerance.
    void settle();
    [[nodiscard]] double param(const std::string& key, double fallback = std::numeric_limits<double>::quiet_NaN()) const;
};

AuditRecord make_record(std::string audit, RecordKind kind, std::string subject,
                        std::vector<std::pair<std::string, double>> params, double left, double right,
                        double tolerance);

}  // namespace degenlab
