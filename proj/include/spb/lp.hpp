#pragma once

#include <vector>

// Dense two-phase primal simplex for small maximization LPs (tens of rows,
// a few hundred columns), with dual values per row. All variables are >= 0.

namespace spb::lp {

enum class RowSense { LE, GE, EQ };

struct Row {
  std::vector<double> a;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
};

struct Problem {
  std::vector<double> c;  // maximize c'x
  std::vector<Row> rows;
};

enum class Status { Optimal, Infeasible, Unbounded };

// Dual sign convention (maximization): dual of a <= row is >= 0, of a
// >= row is <= 0, of an = row is free.
struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;         // per original row (optimal solves)
  double infeasibility = 0.0;        // phase-1 residual when infeasible
  std::vector<double> phase1_duals;  // duals of the phase-1 LP when infeasible
};

struct PhaseOneResult {
  bool feasible = false;
  std::vector<double> x;          // basic feasible point when feasible
  double residual = 0.0;          // minimized artificial sum otherwise
  std::vector<double> duals;      // phase-1 duals per original row
};

Solution solve_lp(const Problem& p);
PhaseOneResult phase_one(const Problem& p);

}  // namespace spb::lp
