#pragma once

#include "spb/cg.hpp"

namespace spb {

/// Finite mixture Sum p_x H_x built from a solver result.
struct MixtureDistribution {
  MixtureFamily family;
  std::vector<double> atoms;
  std::vector<double> weights;
  double u_lo = 0.0, u_hi = 0.0;  // evaluation window

  void validate() const;
};

/// Window from the 1e-6 component quantiles.
MixtureDistribution make_distribution(const BoundResult& result);
MixtureDistribution make_distribution(const MixtureFamily& family,
                                      std::vector<double> atoms,
                                      std::vector<double> weights);

double mixture_pdf(const MixtureDistribution& dist, double u);
double mixture_cdf(const MixtureDistribution& dist, double u);

/// Grid test: exactly one strict local maximum after plateau merging.
bool is_unimodal(const MixtureDistribution& dist);

struct BisectionTraceEntry {
  double alpha;
  bool unimodal;
  double bound;
};

struct BisectionResult {
  double alpha_star = 0.0;
  double bound = 0.0;
  bool unimodal = false;
  std::vector<BisectionTraceEntry> trace;
  BoundResult solve;  // solver output at alpha_star
};

/// Bisection for the smallest alpha whose extremal lognormal mixture is
/// unimodal. `spec.family` is treated as a Lognormal placeholder; its alpha
/// is overridden during the search.
BisectionResult bisect_alpha(const ProblemSpec& spec, double alpha_lo, double alpha_hi,
                             double eps);

struct LerBounds {
  double ler_lo = 0.0;
  double ler_hi = 0.0;
  BoundResult upper_solve, lower_solve;  // bounds on E[max(X-d, 0)]
};

/// Loss elimination ratio bounds: LER = (E[X] - E[max(X-d,0)]) / E[X] with
/// E[X] pinned to mu.
LerBounds ler_bounds(double mu, double sigma2, double b, double d,
                     const MixtureFamily& family);

struct DistributionTable {
  bool atom_table = false;  // Dirac: atom/weight rows instead of u/pdf/cdf
  std::vector<double> u, pdf, cdf;
  std::vector<double> atoms, weights;
};

DistributionTable export_distribution(const MixtureDistribution& dist, int n_points);

}  // namespace spb
