#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cameo::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus s);

struct Term {
  int var = 0;
  double coef = 0;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0;
};

/// maximize c.x  subject to  rows,  lower <= x <= upper.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double objective = 0);
  void add_constraint(std::vector<Term> terms, Relation relation, double rhs);

  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::string& name(int var) const { return names_.at(var); }
  int find(const std::string& name) const;  // -1 when absent

  void set_objective(int var, double c) { objective_.at(var) = c; }
  void set_bounds(int var, double lower, double upper);

  /// Objective value of x (no feasibility check).
  double evaluate(const std::vector<double>& x) const;
  /// Largest violation of any bound or row at x.
  double max_violation(const std::vector<double>& x) const;

  /// Throws InvariantError when l > u or a row names an undeclared variable.
  void check() const;

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> names_;
  std::vector<Constraint> rows_;
};

struct SolverOptions {
  double tolerance = 1e-7;
  int max_iterations = 0;      // 0: 50 * (rows + columns)
  int refactor_interval = 100;
  /// Polled every few iterations; returning true aborts the solve with Timeout.
  std::function<bool()> should_stop;
};

struct LPSolution {
  std::vector<double> x;
  double objective = 0;
  SolveStatus status = SolveStatus::Infeasible;
  int iterations = 0;
};

/// Bounded-variable revised primal simplex (two phases, Harris ratio test, sparse LU basis
/// with product-form updates). Infeasible and unbounded models are reported through
/// `status`; numerical breakdown throws NumericalFailure.
LPSolution solve_lp(const LinearProgram& model, const SolverOptions& options = {});

}  // namespace cameo::lp
