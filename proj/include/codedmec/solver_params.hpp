// include/codedmec/solver_params.hpp
#pragma once

#include <array>
#include <optional>

namespace codedmec {

/// Knobs of the consensus ADMM computation solver.
///
/// Rates inside the solver are expressed in units of O/tau and channel terms
/// in Hz per bit/s, so `beta` and `rho` are dimensionless in those units.
enum class InitMode {
  Linearized,  // fractional knapsack on the savings of each single switch from x = 0
  Half,        // 0.5 on free entries, projected onto the budget
};

struct SolverParams {
  double beta = 100.0;
  InitMode init = InitMode::Linearized;

  /// Penalties for (x = y, out-rate, in-rate, out-channel, in-channel)
  /// consensus. Empty means ten times the largest constraint coefficient of
  /// each block.
  std::optional<std::array<double, 5>> rho;

  /// Outer stop: ||x(t+1) - x(t)||_2 <= tolerance, checked once t >= min_iterations.
  double tolerance = 1.0;
  int min_iterations = 200;
  int max_iterations = 300;

  int cccp_max_iterations = 30;
  double cccp_tolerance = 1e-6;

  double qp_tolerance = 1e-9;
  double rounding_threshold = 0.5;
};

/// Throws std::invalid_argument when a parameter is out of range.
void validate_solver_params(const SolverParams& p);

}  // namespace codedmec
