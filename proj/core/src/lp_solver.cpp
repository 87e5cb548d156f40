#include "fairflow/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fairflow/errors.hpp"

namespace fairflow {

namespace {

constexpr double kInfVal = std::numeric_limits<double>::infinity();
constexpr double kUbInf = 1e30;    // bounds at or beyond this are "no bound"
constexpr double kPivotEps = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kRatioTie = 1e-12;

// Dense bounded-variable simplex working state. Columns are laid out as
// [structural | slacks for '<' rows | artificials], one artificial per row
// that cannot start with a feasible slack basis.
struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> t;    // rows x cols, row-major: B^-1 * A
  std::vector<double> xb;   // values of basic variables, per row
  std::vector<int> basis;   // column basic in each row
  std::vector<double> lo, hi;
  std::vector<double> cost;     // current-phase objective (minimized)
  std::vector<double> red;      // reduced costs
  std::vector<char> at_hi;      // nonbasic rest position (0 = lower bound)
  std::vector<char> basic;      // column currently in the basis?
  int art_begin = 0;            // first artificial column

  double* row(int i) { return t.data() + static_cast<size_t>(i) * cols; }

  double rest_value(int j) const { return at_hi[j] ? hi[j] : lo[j]; }

  void refresh_reduced() {
    red = cost;
    for (int i = 0; i < rows; ++i) {
      double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      const double* r = t.data() + static_cast<size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) red[j] -= cb * r[j];
    }
    for (int i = 0; i < rows; ++i) red[basis[i]] = 0.0;
  }
};

enum class PhaseOutcome { Converged, Unbounded, IterLimit };

// Runs simplex iterations on the current phase objective until no entering
// column improves it. Uses largest-violation pricing and falls back to
// Bland's rule after a long degenerate streak so cycling cannot persist.
PhaseOutcome run_phase(Tableau& tb, int64_t& iter, int64_t iter_cap) {
  std::vector<double> col(tb.rows);
  int degenerate_streak = 0;
  bool bland = false;

  for (;;) {
    if (++iter > iter_cap) return PhaseOutcome::IterLimit;
    if ((iter & 511) == 0) tb.refresh_reduced();

    // Pricing: pick the entering column.
    int enter = -1;
    double best = kCostTol;
    for (int j = 0; j < tb.cols; ++j) {
      if (tb.basic[j]) continue;
      if (tb.lo[j] == tb.hi[j]) continue;  // pinned, can never move
      double dj = tb.red[j];
      bool eligible = tb.at_hi[j] ? (dj > kCostTol) : (dj < -kCostTol);
      if (!eligible) continue;
      if (bland) {
        enter = j;
        break;
      }
      double score = std::fabs(dj);
      if (score > best) {
        best = score;
        enter = j;
      }
    }
    if (enter < 0) return PhaseOutcome::Converged;

    int dir = tb.at_hi[enter] ? -1 : +1;
    for (int i = 0; i < tb.rows; ++i) col[i] = tb.row(i)[enter];

    // Ratio test: the entering variable moves by t >= 0 in direction dir.
    double flip_t = kInfVal;
    if (tb.hi[enter] < kUbInf && tb.lo[enter] > -kUbInf)
      flip_t = tb.hi[enter] - tb.lo[enter];

    double pivot_t = kInfVal;
    int leave = -1;
    int leave_at_hi = 0;
    for (int i = 0; i < tb.rows; ++i) {
      double w = dir * col[i];
      double cand;
      int hits_hi;
      if (w > kPivotEps) {  // basic variable falls toward its lower bound
        double l = tb.lo[tb.basis[i]];
        if (l <= -kUbInf) continue;
        cand = (tb.xb[i] - l) / w;
        hits_hi = 0;
      } else if (w < -kPivotEps) {  // basic variable rises toward its upper bound
        double h = tb.hi[tb.basis[i]];
        if (h >= kUbInf) continue;
        cand = (h - tb.xb[i]) / (-w);
        hits_hi = 1;
      } else {
        continue;
      }
      if (cand < 0.0) cand = 0.0;
      bool take;
      if (leave < 0) {
        take = true;
      } else if (cand < pivot_t - kRatioTie) {
        take = true;
      } else if (cand <= pivot_t + kRatioTie) {
        // Tied ratios: prefer the sturdier pivot, or the smallest basis
        // index when Bland's rule is in force.
        take = bland ? (tb.basis[i] < tb.basis[leave])
                     : (std::fabs(col[i]) > std::fabs(col[leave]));
      } else {
        take = false;
      }
      if (take) {
        pivot_t = cand;
        leave = i;
        leave_at_hi = hits_hi;
      }
    }

    if (leave < 0 && flip_t >= kInfVal) return PhaseOutcome::Unbounded;

    bool do_flip = (leave < 0) || (flip_t <= pivot_t + kPivotEps);
    double step = do_flip ? flip_t : pivot_t;
    if (step < 1e-10) {
      if (++degenerate_streak > 300) bland = true;
    } else {
      degenerate_streak = 0;
      // Leave Bland mode once real progress resumes; pricing quality matters.
      bland = false;
    }

    if (do_flip) {
      for (int i = 0; i < tb.rows; ++i) tb.xb[i] -= step * dir * col[i];
      tb.at_hi[enter] ^= 1;
      continue;
    }

    // Basis change.
    double enter_val = tb.rest_value(enter) + dir * step;
    for (int i = 0; i < tb.rows; ++i) {
      if (i != leave) tb.xb[i] -= step * dir * col[i];
    }
    int leaving_var = tb.basis[leave];
    tb.basic[leaving_var] = 0;
    tb.at_hi[leaving_var] = static_cast<char>(leave_at_hi);
    if (leaving_var >= tb.art_begin) {
      // An artificial that exits the basis is done for good.
      tb.lo[leaving_var] = 0.0;
      tb.hi[leaving_var] = 0.0;
      tb.at_hi[leaving_var] = 0;
    }
    tb.basic[enter] = 1;
    tb.basis[leave] = enter;
    tb.xb[leave] = enter_val;

    double* prow = tb.row(leave);
    double pivot = prow[enter];
    double inv = 1.0 / pivot;
    for (int j = 0; j < tb.cols; ++j) prow[j] *= inv;
    prow[enter] = 1.0;
    for (int i = 0; i < tb.rows; ++i) {
      if (i == leave) continue;
      double f = col[i];
      if (f == 0.0) continue;
      double* r = tb.row(i);
      for (int j = 0; j < tb.cols; ++j) r[j] -= f * prow[j];
      r[enter] = 0.0;
    }
    double de = tb.red[enter];
    if (de != 0.0) {
      for (int j = 0; j < tb.cols; ++j) tb.red[j] -= de * prow[j];
    }
    tb.red[enter] = 0.0;
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
  const int n = problem.num_vars;
  if (n < 0 || static_cast<int>(problem.lb.size()) != n ||
      static_cast<int>(problem.ub.size()) != n ||
      static_cast<int>(problem.obj.size()) != n)
    throw InvalidParameter("lp: bounds/objective sizes disagree with num_vars");
  for (int j = 0; j < n; ++j) {
    if (problem.lb[j] <= -kUbInf)
      throw InvalidParameter("lp: every variable needs a finite lower bound");
  }

  LpResult out;
  for (int j = 0; j < n; ++j) {
    if (problem.lb[j] > problem.ub[j] + 1e-12) {
      out.status = LpStatus::Infeasible;
      return out;
    }
  }

  const int nrows = static_cast<int>(problem.rows.size());
  // Normalize rows to '<' or '='; count slacks.
  std::vector<char> flip(nrows, 0);
  std::vector<char> is_eq(nrows, 0);
  int nslack = 0;
  for (int i = 0; i < nrows; ++i) {
    const LinearRow& lr = problem.rows[i];
    if (lr.cmp == '=') {
      is_eq[i] = 1;
    } else if (lr.cmp == '<') {
      ++nslack;
    } else if (lr.cmp == '>') {
      flip[i] = 1;
      ++nslack;
    } else {
      throw InvalidParameter("lp: row comparator must be one of <, >, =");
    }
    for (const auto& [var, coef] : lr.terms) {
      (void)coef;
      if (var < 0 || var >= n) throw InvalidParameter("lp: row references unknown variable");
    }
  }

  Tableau tb;
  tb.rows = nrows;
  tb.art_begin = n + nslack;
  tb.cols = n + nslack + nrows;  // artificial slot per row; unused ones stay pinned
  tb.t.assign(static_cast<size_t>(nrows) * tb.cols, 0.0);
  tb.xb.assign(nrows, 0.0);
  tb.basis.assign(nrows, -1);
  tb.lo.assign(tb.cols, 0.0);
  tb.hi.assign(tb.cols, 0.0);
  tb.cost.assign(tb.cols, 0.0);
  tb.at_hi.assign(tb.cols, 0);
  tb.basic.assign(tb.cols, 0);

  for (int j = 0; j < n; ++j) {
    tb.lo[j] = problem.lb[j];
    tb.hi[j] = problem.ub[j] >= kUbInf ? kInfVal : problem.ub[j];
  }

  // Fill the constraint matrix, assign slack columns, and compute the
  // residual of each row at the all-at-lower-bound starting point.
  int slack_at = n;
  int art_count = 0;
  std::vector<double> dense(n, 0.0);
  for (int i = 0; i < nrows; ++i) {
    const LinearRow& lr = problem.rows[i];
    double sign = flip[i] ? -1.0 : 1.0;
    double rhs = sign * lr.rhs;
    double* r = tb.row(i);
    for (const auto& [var, coef] : lr.terms) r[var] += sign * coef;
    double act = 0.0;
    for (const auto& [var, coef] : lr.terms) {
      (void)coef;
      if (dense[var] == 0.0) act += r[var] * tb.lo[var];  // guard double-count
      dense[var] = 1.0;
    }
    for (const auto& [var, coef] : lr.terms) {
      (void)coef;
      dense[var] = 0.0;
    }
    double resid = rhs - act;

    int slack_col = -1;
    if (!is_eq[i]) {
      slack_col = slack_at++;
      r[slack_col] = 1.0;
      tb.lo[slack_col] = 0.0;
      tb.hi[slack_col] = kInfVal;
    }

    if (!is_eq[i] && resid >= 0.0) {
      tb.basis[i] = slack_col;
      tb.basic[slack_col] = 1;
      tb.xb[i] = resid;
    } else {
      int art = tb.art_begin + i;
      double sigma = resid >= 0.0 ? 1.0 : -1.0;
      r[art] = sigma;
      tb.lo[art] = 0.0;
      tb.hi[art] = kInfVal;
      tb.basis[i] = art;
      tb.basic[art] = 1;
      tb.xb[i] = std::fabs(resid);
      if (sigma < 0.0) {
        // Keep the tableau equal to B^-1 * A for the starting basis.
        for (int j = 0; j < tb.cols; ++j) r[j] = -r[j];
        r[art] = 1.0;
        tb.xb[i] = std::fabs(resid);
      }
      ++art_count;
    }
  }
  // Pin artificial slots that were never used.
  for (int i = 0; i < nrows; ++i) {
    int art = tb.art_begin + i;
    if (!tb.basic[art]) {
      tb.lo[art] = 0.0;
      tb.hi[art] = 0.0;
    }
  }

  int64_t iter = 0;
  const int64_t iter_cap = 10000 + 50LL * (nrows + tb.cols);

  if (art_count > 0) {
    for (int j = 0; j < tb.cols; ++j) tb.cost[j] = (j >= tb.art_begin && tb.basic[j]) ? 1.0 : 0.0;
    // Mark every live artificial's cost, basic or not (all start basic).
    for (int i = 0; i < nrows; ++i) {
      int art = tb.art_begin + i;
      if (tb.hi[art] > 0.0 || tb.basic[art]) tb.cost[art] = 1.0;
    }
    tb.refresh_reduced();
    PhaseOutcome p1 = run_phase(tb, iter, iter_cap);
    out.iterations = iter;
    if (p1 == PhaseOutcome::IterLimit || p1 == PhaseOutcome::Unbounded) {
      out.status = LpStatus::IterLimit;  // phase 1 is bounded below; treat oddity as a limit
      return out;
    }
    double infeas = 0.0;
    for (int i = 0; i < nrows; ++i) {
      if (tb.basis[i] >= tb.art_begin) infeas += std::fabs(tb.xb[i]);
    }
    if (infeas > kFeasTol) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Lock every artificial at zero for phase 2.
    for (int i = 0; i < nrows; ++i) {
      int art = tb.art_begin + i;
      tb.lo[art] = 0.0;
      tb.hi[art] = tb.basic[art] ? 0.0 : tb.hi[art];
      if (!tb.basic[art]) tb.hi[art] = 0.0;
      tb.at_hi[art] = 0;
    }
  }

  // Phase 2: the caller's objective, minimized internally.
  double obj_sign = problem.maximize ? -1.0 : 1.0;
  std::fill(tb.cost.begin(), tb.cost.end(), 0.0);
  for (int j = 0; j < n; ++j) tb.cost[j] = obj_sign * problem.obj[j];
  tb.refresh_reduced();
  PhaseOutcome p2 = run_phase(tb, iter, iter_cap);
  out.iterations = iter;
  if (p2 == PhaseOutcome::IterLimit) {
    out.status = LpStatus::IterLimit;
    return out;
  }
  if (p2 == PhaseOutcome::Unbounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  out.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) out.x[j] = tb.rest_value(j);
  for (int i = 0; i < nrows; ++i) {
    if (tb.basis[i] < n) out.x[tb.basis[i]] = tb.xb[i];
  }
  for (int j = 0; j < n; ++j) {
    double lo = problem.lb[j];
    double hi = problem.ub[j] >= kUbInf ? kInfVal : problem.ub[j];
    out.x[j] = std::min(std::max(out.x[j], lo), hi);
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += problem.obj[j] * out.x[j];
  out.objective = obj;
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace fairflow
