#pragma once

#include "spb/model.hpp"

namespace spb::oracles {

/// Closed-form worst-case expected call payoff given mean and variance,
/// support [0, inf).
double lo_upper_bound(double mu, double sigma, double d);

/// Undiscounted-strike Black-Scholes call price.
double black_scholes_call(double s0, double k, double r, double vol, double t);

double normal_cdf(double z);

struct GridOracleConfig {
  int n = 20001;       // number of grid atoms, >= 101
  double clip = 0.0;   // upper clip for unbounded supports; <= 0 means search_cap
};

/// Brute-force bound: a single dense LP over a fixed grid of atoms.
/// Independent of the column-generation loop; used for cross-checks only.
double grid_lp_bound(const ProblemSpec& spec, const GridOracleConfig& cfg = {});

}  // namespace spb::oracles
