#pragma once

#include <string>
#include <vector>

#include "cameo/lp.hpp"
#include "cameo/optimizer.hpp"

namespace cameo::testing {

/// Result of re-checking a solution vector against the sizing constraints, computed
/// from the case data and variable names only (never from the model's rows).
struct AuditReport {
  double max_violation = 0;
  std::string worst;     // description of the largest violation
  double objective = 0;  // recomputed lifetime net value
  bool ok(double tol) const { return max_violation <= tol; }
};

AuditReport audit_solution(const opt::SizingCase& c, const lp::LinearProgram& model, const std::vector<double>& x);

}  // namespace cameo::testing
