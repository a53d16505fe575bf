#pragma once

#include <string>
#include <vector>

#include "foedlab/model.hpp"
#include "foedlab/quadrature.hpp"
#include "foedlab/report.hpp"

namespace foedlab {

// One verification-ledger entry: the identity row plus the engine error that
// prevented its computation, when one occurred (rows never abort the run).
struct LedgerRow {
    IdentityReport report;
    std::string error;
};

// The fixed identity battery behind the `verify` subcommand. Rows that probe
// reference-model-specific discrepancies (the degenerate single-integral
// formula, the kernel/marginal exchange, the closed-form rate display, the
// rate-definition variants) always run on their pinned gauss_gauss inputs;
// every other row runs on the supplied model. Known-discrepancy rows come
// out with status "flag" and the measured gap; that is their passing state.
std::vector<LedgerRow> verification_ledger(const ProcessModel& model,
                                           const QuadratureConfig& cfg);

// Full command-line front end. Returns the process exit code: 0 on success
// (flagged ledger rows included), 1 on usage/config errors, 2 on engine
// failures.
int run_cli(int argc, char** argv);

}  // namespace foedlab
