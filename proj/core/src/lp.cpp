#include "cameo/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "cameo/errors.hpp"
#include "cameo/util.hpp"

namespace cameo::lp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

// ---- model ----------------------------------------------------------------

int LinearProgram::add_variable(std::string name, double lower, double upper, double objective) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  names_.push_back(std::move(name));
  return static_cast<int>(objective_.size()) - 1;
}

void LinearProgram::add_constraint(std::vector<Term> terms, Relation relation, double rhs) {
  rows_.push_back({std::move(terms), relation, rhs});
}

int LinearProgram::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
  double v = 0;
  for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0;
  for (std::size_t j = 0; j < objective_.size(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (const auto& row : rows_) {
    double lhs = 0;
    for (const auto& t : row.terms) lhs += t.coef * x[t.var];
    double v = row.relation == Relation::Equal ? std::abs(lhs - row.rhs) : lhs - row.rhs;
    worst = std::max(worst, v);
  }
  return worst;
}

void LinearProgram::check() const {
  for (std::size_t j = 0; j < lower_.size(); ++j)
    if (!(lower_[j] <= upper_[j]) || std::isnan(lower_[j]) || std::isnan(upper_[j]))
      throw InvariantError("variable " + names_[j] + ": lower bound exceeds upper bound");
  const int n = num_variables();
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& t : rows_[i].terms)
      if (t.var < 0 || t.var >= n)
        throw InvariantError("row " + std::to_string(i) + " references undeclared variable " +
                             std::to_string(t.var));
}

// ---- solver ---------------------------------------------------------------

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, Free, Fixed };

struct Eta {
  int row = 0;
  double pivot = 1;
  std::vector<int> idx;
  std::vector<double> val;
};

constexpr double kPivotTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr int kDegenerateLimit = 60;

double ptol(double bound) { return kPrimalTol * (1.0 + std::abs(bound)); }

class Simplex {
 public:
  Simplex(const LinearProgram& model, const SolverOptions& options);
  LPSolution solve();

 private:
  enum class PhaseResult { Optimal, Unbounded };

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) f(row_idx_[p], val_[p]);
    } else {
      f(j - n_, 1.0);
    }
  }

  void refactor();
  void recompute_basic_values();
  void ftran(int column, std::vector<double>& out);
  void btran(std::vector<double>& v);
  double infeasibility() const;
  PhaseResult run_phase(bool phase_one);
  void tick();

  const LinearProgram& model_;
  SolverOptions opt_;
  int m_ = 0, n_ = 0, total_ = 0;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_;
  std::vector<double> lo_, hi_, cost_, b_;
  double cost_scale_ = 1;

  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> basic_;
  std::vector<int> where_;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  int iterations_ = 0;
  int max_iterations_ = 0;

  std::vector<double> work_y_, work_alpha_, work_d_, work_cost_;
};

Simplex::Simplex(const LinearProgram& model, const SolverOptions& options)
    : model_(model), opt_(options) {
  model.check();
  m_ = model.num_constraints();
  n_ = model.num_variables();
  total_ = n_ + m_;

  // Column-major copy of the structural part; duplicate terms are summed.
  std::vector<std::vector<std::pair<int, double>>> cols(n_);
  for (int i = 0; i < m_; ++i)
    for (const auto& t : model.constraints()[i].terms) cols[t.var].emplace_back(i, t.coef);
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) {
    auto& c = cols[j];
    std::sort(c.begin(), c.end());
    int last = -1;
    for (auto [r, v] : c) {
      if (r == last) {
        val_.back() += v;
        continue;
      }
      row_idx_.push_back(r);
      val_.push_back(v);
      last = r;
    }
    col_start_[j + 1] = static_cast<int>(row_idx_.size());
  }

  lo_.resize(total_);
  hi_.resize(total_);
  cost_.assign(total_, 0.0);
  b_.resize(m_);
  double cmax = 0;
  for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(model.objective()[j]));
  cost_scale_ = cmax > 0 ? 1.0 / cmax : 1.0;
  for (int j = 0; j < n_; ++j) {
    lo_[j] = model.lower()[j];
    hi_[j] = model.upper()[j];
    cost_[j] = -model.objective()[j] * cost_scale_;  // internal form minimizes
  }
  for (int i = 0; i < m_; ++i) {
    const auto& row = model.constraints()[i];
    b_[i] = row.rhs;
    lo_[n_ + i] = 0;
    hi_[n_ + i] = row.relation == Relation::Equal ? 0.0 : kInf;
  }

  x_.assign(total_, 0.0);
  state_.assign(total_, VarState::AtLower);
  for (int j = 0; j < n_; ++j) {
    if (lo_[j] == hi_[j]) {
      state_[j] = VarState::Fixed;
      x_[j] = lo_[j];
    } else if (std::isfinite(lo_[j])) {
      state_[j] = VarState::AtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      state_[j] = VarState::AtUpper;
      x_[j] = hi_[j];
    } else {
      state_[j] = VarState::Free;
      x_[j] = 0;
    }
  }
  basic_.resize(m_);
  where_.assign(total_, -1);
  for (int i = 0; i < m_; ++i) {
    basic_[i] = n_ + i;
    where_[n_ + i] = i;
    state_[n_ + i] = VarState::Basic;
  }
  max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations : 50 * (m_ + n_) + 1000;
  work_y_.resize(m_);
  work_alpha_.resize(m_);
  work_d_.resize(total_);
  work_cost_.resize(total_);
}

void Simplex::refactor() {
  etas_.clear();
  if (m_ == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 3);
  for (int k = 0; k < m_; ++k) for_column(basic_[k], [&](int r, double v) { trip.emplace_back(r, k, v); });
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  lu_.analyzePattern(B);
  lu_.factorize(B);
  if (lu_.info() != Eigen::Success)
    throw NumericalFailure("simplex: basis factorization failed after " +
                           std::to_string(iterations_) + " iterations: " + lu_.lastErrorMessage());
}

void Simplex::recompute_basic_values() {
  if (m_ == 0) return;
  std::vector<double> rhs = b_;
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == VarState::Basic || x_[j] == 0) continue;
    const double xj = x_[j];
    for_column(j, [&](int r, double v) { rhs[r] -= v * xj; });
  }
  Eigen::Map<Eigen::VectorXd> r(rhs.data(), m_);
  Eigen::VectorXd sol = lu_.solve(r);
  for (const auto& e : etas_) {
    double zr = sol[e.row] / e.pivot;
    for (std::size_t p = 0; p < e.idx.size(); ++p) sol[e.idx[p]] -= e.val[p] * zr;
    sol[e.row] = zr;
  }
  for (int k = 0; k < m_; ++k) x_[basic_[k]] = sol[k];
}

void Simplex::ftran(int column, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for_column(column, [&](int r, double v) { out[r] = v; });
  Eigen::Map<Eigen::VectorXd> rhs(out.data(), m_);
  Eigen::VectorXd sol = lu_.solve(rhs);
  for (const auto& e : etas_) {
    double zr = sol[e.row] / e.pivot;
    if (zr != 0)
      for (std::size_t p = 0; p < e.idx.size(); ++p) sol[e.idx[p]] -= e.val[p] * zr;
    sol[e.row] = zr;
  }
  std::copy(sol.data(), sol.data() + m_, out.begin());
}

void Simplex::btran(std::vector<double>& v) {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (std::size_t p = 0; p < it->idx.size(); ++p) s -= it->val[p] * v[it->idx[p]];
    v[it->row] = s / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> rhs(v.data(), m_);
  Eigen::VectorXd sol = lu_.transpose().solve(rhs);
  std::copy(sol.data(), sol.data() + m_, v.begin());
}

double Simplex::infeasibility() const {
  double s = 0;
  for (int k = 0; k < m_; ++k) {
    int j = basic_[k];
    if (x_[j] < lo_[j] - ptol(lo_[j])) s += lo_[j] - x_[j];
    else if (x_[j] > hi_[j] + ptol(hi_[j])) s += x_[j] - hi_[j];
  }
  return s;
}

void Simplex::tick() {
  ++iterations_;
  if (iterations_ > max_iterations_)
    throw NumericalFailure("simplex: iteration limit " + std::to_string(max_iterations_) +
                           " reached (rows=" + std::to_string(m_) +
                           ", cols=" + std::to_string(n_) + ")");
  if (opt_.should_stop && iterations_ % 32 == 0 && opt_.should_stop())
    throw Timeout("simplex: stopped after " + std::to_string(iterations_) + " iterations");
}

Simplex::PhaseResult Simplex::run_phase(bool phase_one) {
  int degenerate_run = 0;
  bool bland = false;
  for (;;) {
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      refactor();
      recompute_basic_values();
    }

    // Phase-one costs penalize the current bound violations of basic variables.
    if (phase_one) {
      std::fill(work_cost_.begin(), work_cost_.end(), 0.0);
      bool any = false;
      for (int k = 0; k < m_; ++k) {
        int j = basic_[k];
        if (x_[j] < lo_[j] - ptol(lo_[j])) {
          work_cost_[j] = -1;
          any = true;
        } else if (x_[j] > hi_[j] + ptol(hi_[j])) {
          work_cost_[j] = 1;
          any = true;
        }
      }
      if (!any) return PhaseResult::Optimal;
    }
    const std::vector<double>& cost = phase_one ? work_cost_ : cost_;

    for (int k = 0; k < m_; ++k) work_y_[k] = cost[basic_[k]];
    btran(work_y_);

    // Pricing: Dantzig's rule, or lowest eligible index while anti-cycling.
    int enter = -1;
    double best = 0;
    for (int j = 0; j < total_; ++j) {
      const auto st = state_[j];
      if (st == VarState::Basic || st == VarState::Fixed) continue;
      double d = cost[j];
      for_column(j, [&](int r, double v) { d -= work_y_[r] * v; });
      double score = 0;
      if ((st == VarState::AtLower || st == VarState::Free) && d < -kDualTol) score = -d;
      if ((st == VarState::AtUpper || st == VarState::Free) && d > kDualTol) score = d;
      if (score == 0) continue;
      work_d_[j] = d;
      if (bland) {
        enter = j;
        break;
      }
      if (score > best) {
        best = score;
        enter = j;
      }
    }
    if (enter < 0) return PhaseResult::Optimal;

    tick();
    ftran(enter, work_alpha_);
    const double dir = work_d_[enter] < 0 ? 1.0 : -1.0;

    // Harris two-pass ratio test. delta is the change of basic k per unit step; the first
    // pass relaxes every bound by its tolerance, the second picks the largest pivot.
    auto limit = [&](int k, bool relaxed, bool& to_upper) -> double {
      if (std::abs(work_alpha_[k]) <= kPivotTol) return kInf;
      const double delta = -dir * work_alpha_[k];
      const int j = basic_[k];
      const double xv = x_[j];
      if (phase_one && xv < lo_[j] - ptol(lo_[j])) {
        if (delta <= 0) return kInf;
        to_upper = false;
        return (lo_[j] - xv + (relaxed ? ptol(lo_[j]) : 0.0)) / delta;
      }
      if (phase_one && xv > hi_[j] + ptol(hi_[j])) {
        if (delta >= 0) return kInf;
        to_upper = true;
        return (xv - hi_[j] + (relaxed ? ptol(hi_[j]) : 0.0)) / -delta;
      }
      if (delta < 0) {
        if (!std::isfinite(lo_[j])) return kInf;
        to_upper = false;
        return (xv - lo_[j] + (relaxed ? ptol(lo_[j]) : 0.0)) / -delta;
      }
      if (!std::isfinite(hi_[j])) return kInf;
      to_upper = true;
      return (hi_[j] - xv + (relaxed ? ptol(hi_[j]) : 0.0)) / delta;
    };

    double theta_max = kInf;
    bool ignored = false;
    for (int k = 0; k < m_; ++k) theta_max = std::min(theta_max, limit(k, !bland, ignored));
    int leave = -1;
    bool leave_upper = false;
    double theta = kInf;
    double best_pivot = 0;
    for (int k = 0; k < m_; ++k) {
      bool up = false;
      double r = limit(k, false, up);
      if (r > theta_max || !std::isfinite(r)) continue;
      const double piv = std::abs(work_alpha_[k]);
      bool take = bland ? (leave < 0 || basic_[k] < basic_[leave]) : piv > best_pivot;
      if (take) {
        best_pivot = piv;
        leave = k;
        leave_upper = up;
        theta = r;
      }
    }
    const double range = hi_[enter] - lo_[enter];
    const bool can_flip = std::isfinite(range);
    if (leave < 0 && !can_flip) {
      if (phase_one)
        throw NumericalFailure("simplex: unbounded ray in phase one after " +
                               std::to_string(iterations_) + " iterations");
      return PhaseResult::Unbounded;
    }
    theta = std::max(theta, 0.0);
    const bool flip = can_flip && (leave < 0 || range <= theta);
    if (flip) theta = range;

    if (theta <= 1e-12) {
      if (++degenerate_run > kDegenerateLimit) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }

    x_[enter] += dir * theta;
    if (theta != 0)
      for (int k = 0; k < m_; ++k)
        if (work_alpha_[k] != 0) x_[basic_[k]] -= dir * theta * work_alpha_[k];

    if (flip) {
      state_[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
      continue;
    }

    const int out = basic_[leave];
    x_[out] = leave_upper ? hi_[out] : lo_[out];
    state_[out] = lo_[out] == hi_[out] ? VarState::Fixed
                  : leave_upper        ? VarState::AtUpper
                                       : VarState::AtLower;
    where_[out] = -1;
    basic_[leave] = enter;
    where_[enter] = leave;
    state_[enter] = VarState::Basic;

    Eta e;
    e.row = leave;
    e.pivot = work_alpha_[leave];
    for (int k = 0; k < m_; ++k)
      if (k != leave && std::abs(work_alpha_[k]) > 1e-14) {
        e.idx.push_back(k);
        e.val.push_back(work_alpha_[k]);
      }
    etas_.push_back(std::move(e));
  }
}

LPSolution Simplex::solve() {
  LPSolution sol;
  for (int round = 0; round < 6; ++round) {
    refactor();
    recompute_basic_values();
    if (infeasibility() > 0) {
      run_phase(true);
      refactor();
      recompute_basic_values();
      if (infeasibility() > 0) {
        // Phase one stops when no column reduces the violation; after a clean
        // refactorization that verdict is final.
        if (run_phase(true) == PhaseResult::Optimal && etas_.empty() && infeasibility() > 0) {
          sol.status = SolveStatus::Infeasible;
          sol.iterations = iterations_;
          return sol;
        }
        continue;
      }
    }
    if (run_phase(false) == PhaseResult::Unbounded) {
      sol.status = SolveStatus::Unbounded;
      sol.iterations = iterations_;
      return sol;
    }
    refactor();
    recompute_basic_values();
    if (infeasibility() > 0) continue;  // drift: restore feasibility and re-optimize
    if (run_phase(false) != PhaseResult::Optimal || !etas_.empty()) continue;

    sol.status = SolveStatus::Optimal;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    // Snap values sitting within tolerance of a bound onto it.
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]) && std::abs(sol.x[j] - lo_[j]) <= ptol(lo_[j])) sol.x[j] = lo_[j];
      if (std::isfinite(hi_[j]) && std::abs(sol.x[j] - hi_[j]) <= ptol(hi_[j])) sol.x[j] = hi_[j];
    }
    sol.objective = model_.evaluate(sol.x);
    return sol;
  }
  throw NumericalFailure("simplex: could not reach a stable optimal basis after " +
                         std::to_string(iterations_) + " iterations");
}

}  // namespace

LPSolution solve_lp(const LinearProgram& model, const SolverOptions& options) {
  Simplex s(model, options);
  return s.solve();
}

}  // namespace cameo::lp
