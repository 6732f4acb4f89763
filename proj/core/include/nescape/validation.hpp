#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nescape::validation {

// One cross-check: a computed number against an independent reference.
// pass iff |rel_error| <= tolerance. For residual-style rows the reference is
// 0 and rel_error is the residual itself (absolute convention, noted in the
// provenance); for one-sided rows rel_error is the constraint violation,
// clamped at 0 when satisfied.
struct ReportRow {
  std::string id;
  double reference = 0;
  std::string provenance;
  double computed = 0;
  double rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};

enum class Suite { quick, full };

struct ValidationReport {
  Suite suite = Suite::quick;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  bool all_pass() const;
};

// Overrides the pinned tolerance for matching row ids; used to demonstrate
// that the statistical rows really carry noise.
using ToleranceOverride = std::function<std::optional<double>(const std::string& id)>;

// The cross-validation harness: closed forms vs solver vs Monte Carlo. The
// quick suite runs reduced trajectory counts with tolerances widened to four
// standard errors where statistics dominate; the full suite runs the
// acceptance-scale experiments. Row failures never abort the suite. The
// report is deterministic given (suite, seed).
ValidationReport run_validation(Suite suite, std::uint64_t seed,
                                const ToleranceOverride& override_tol = {});

} // namespace nescape::validation
