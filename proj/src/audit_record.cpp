#include "degenlab/audit_record.hpp"

#include <cmath>

namespace degenlab {

std::string to_string(RecordKind kind) {
    switch (kind) {
        case RecordKind::certified: return "certified";
        case RecordKind::continuum: return "continuum";
        case RecordKind::observational: return "observational";
    }
    return "certified";
}

void AuditRecord::settle() {
    if (std::isinf(right) && right > 0.0) {
        margin = right;
        pass = std::abs(left) <= tolerance;
        return;
    }
    margin = right - left;
    pass = margin >= -tolerance;
}

double AuditRecord::param(const std::string& key, double fallback) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return fallback;
}

AuditRecord make_record(std::string audit, RecordKind kind, std::string subject,
                        std::vector<std::pair<std::string, double>> params, double left, double right,
                        double tolerance) {
    AuditRecord r;
    r.audit = std::move(audit);
    r.kind = kind;
    r.subject = std::move(subject);
    r.params = std::move(params);
    r.left = left;
    r.right = right;
    r.tolerance = tolerance;
    r.settle();
    return r;
}

}  // namespace degenlab
