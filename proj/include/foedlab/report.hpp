#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace foedlab {

// One row of a verification ledger: a named identity, the mathematical
// statement being checked, both sides as evaluated, and the outcome.
//
// status is "pass" when the gap is within tolerance and "flag" otherwise.
// A "flag" row records a real, reproducible discrepancy (for example a
// known defect in one of the checked formulas); it is reported but does
// not abort the run.
struct IdentityReport {
    std::string name;
    std::string anchor;   // human-readable statement of the identity
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_gap = 0.0;
    double rel_gap = 0.0;
    double tolerance = 0.0;
    std::string status;   // "pass" or "flag"
};

inline IdentityReport make_identity_report(std::string name, std::string anchor,
                                           double lhs, double rhs, double tolerance) {
    IdentityReport r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_gap = std::fabs(lhs - rhs);
    const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
    r.rel_gap = scale > 0.0 ? r.abs_gap / scale : 0.0;
    r.tolerance = tolerance;
    r.status = (r.abs_gap <= tolerance || r.rel_gap <= tolerance) ? "pass" : "flag";
    return r;
}

}  // namespace foedlab
