#pragma once

#include "spb/lp.hpp"
#include "spb/mixtures.hpp"
#include "spb/model.hpp"

#include <vector>

namespace spb {

/// Ordered set of distinct atoms in the support.
class AtomSet {
public:
  AtomSet() = default;
  explicit AtomSet(double dedup_tol) : tol_(dedup_tol) {}
  bool add(double x);  // false if a duplicate within tolerance
  bool contains(double x) const;
  const std::vector<double>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  void keep(const std::vector<size_t>& indices);
  double dedup_tol() const { return tol_; }

private:
  std::vector<double> atoms_;
  double tol_ = 1e-10;
};

struct MasterSolution {
  std::vector<double> weights;
  double objective = 0.0;           // in the user's sense
  double objective_internal = 0.0;  // max-space objective
  std::vector<double> lambda;       // net dual per constraint (max-space)
  std::vector<double> rho_lo, rho_hi;
  double tau = 0.0;
};

enum class SubproblemPath { ExactPolynomial, NumericSearch };

struct TraceEntry {
  double master_objective;  // user sense
  double reduced_cost;
  double new_atom;
  SubproblemPath path;
};

struct BoundResult {
  double bound = 0.0;
  double gap = 0.0;  // final reduced cost (Theorem-style certificate)
  Sense sense = Sense::Upper;
  std::vector<double> atoms;
  std::vector<double> weights;
  MixtureFamily family;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  bool converged = false;
  bool stalled = false;
  bool hit_search_cap = false;  // final pricing grew without bound; value relies on search_cap
  double epsilon_used = 0.0;
  double search_cap_used = 0.0;
};

struct SubproblemResult {
  double x_star = 0.0;
  double reduced_cost = 0.0;
  SubproblemPath path = SubproblemPath::NumericSearch;
  bool unbounded_growth = false;
};

class CgSolver {
public:
  explicit CgSolver(ProblemSpec spec);

  AtomSet initialize_atoms();
  MasterSolution solve_master(const AtomSet& atoms) const;
  SubproblemResult solve_subproblem(const MasterSolution& master) const;
  BoundResult run();

  const ProblemSpec& spec() const { return spec_; }
  const TransformedFunction& transformed_target() const { return ft_; }
  const std::vector<TransformedFunction>& transformed_constraints() const { return gt_; }

private:
  ProblemSpec spec_;
  TransformedFunction ft_;
  std::vector<TransformedFunction> gt_;
  bool exact_path_ = false;
  Domain atom_domain_{0.0, 1.0};  // support clipped to search_cap
  // cached transformed values on the numeric-search grid
  mutable std::vector<double> grid_x_, grid_f_;
  mutable std::vector<std::vector<double>> grid_g_;

  double objective_at(double x) const;  // max-space transformed target
  double reduced_cost_at(double x, const std::vector<double>& lambda, double tau,
                         bool with_objective) const;
  SubproblemResult price(const std::vector<double>& lambda, double tau,
                         bool with_objective) const;
  SubproblemResult price_exact(const std::vector<double>& lambda, double tau,
                               bool with_objective) const;
  SubproblemResult price_numeric(const std::vector<double>& lambda, double tau,
                                 bool with_objective) const;
  void ensure_grid() const;
  lp::Problem build_master_lp(const AtomSet& atoms) const;
};

/// Convenience wrappers mirroring the operation names.
MasterSolution solve_master(const AtomSet& atoms, const ProblemSpec& spec);
SubproblemResult solve_subproblem(const MasterSolution& duals, const ProblemSpec& spec);
AtomSet initialize_atoms(const ProblemSpec& spec);
BoundResult run_cg(const ProblemSpec& spec);

struct MomentEnvelope {
  double mu_lo = 0.0, mu_hi = 0.0, var_hi = 0.0;
  bool mu_lo_unbounded = false, mu_hi_unbounded = false, var_unbounded = false;
};

/// Extremal mean and variance consistent with the constraint set
/// (Dirac-family auxiliary solves; variance via a pinned-mean sweep).
MomentEnvelope moment_envelope(const ProblemSpec& spec);

}  // namespace spb
