// include/codedmec/opt_compute.hpp
//
// Consensus ADMM for the computation decision with no cache.
//
// Units inside the solver: rates are in multiples of O/tau (so the output
// rate is 1 and the input rate of pair (k,f) is a_kf = I/(tau - I w_f/g_k)
// divided by O/tau); channel terms are 1/log2(1+snr) as is. Bandwidths
// reported outside the solver are converted back to Hz.
//
// Per sample n and task f the solver keeps four global variables
//   out_rate, in_rate, out_channel, in_channel
// (the output group, computed at the server, and the input group, computed
// locally), their local copies with the same names in pi_hat, and one
// copy y^n of x per sample.
#pragma once

#include "codedmec/model.hpp"
#include "codedmec/qp.hpp"
#include "codedmec/solver_params.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace codedmec {

/// Problem data shared by every ADMM step.
struct P2Data {
  std::size_t num_devices = 0;
  std::size_t num_tasks = 0;
  std::size_t num_samples = 0;
  double rate_unit = 0.0;    // bit/s per solver rate unit, O/tau unless O = 0
  double output_coef = 1.0;  // O/tau in solver units

  Eigen::MatrixXd input_rate;  // K x F, a_kf; 0 where the deadline cannot be met
  Eigen::MatrixXd energy;      // K x F, p alpha g^2 I w
  std::vector<double> channel;  // h_k
  std::vector<double> budget;   // E_k
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> deadline_ok;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> free;  // entries not clamped to 0

  /// requesters[n][f]: devices that ask for f in sample n.
  std::vector<std::vector<std::vector<DeviceIndex>>> requesters;
};

P2Data make_p2_data(const Scenario& s, const SampleSet& samples);

/// Objective of a binary decision in Hz (average over samples, no cache).
double p2_objective(const P2Data& data, const ComputeDecision& x);

struct PiBlock {
  Eigen::MatrixXd out_rate;  // F x N
  Eigen::MatrixXd in_rate;
  Eigen::MatrixXd out_channel;
  Eigen::MatrixXd in_channel;

  static PiBlock zeros(std::size_t tasks, std::size_t samples);
  double squared_norm() const;
  PiBlock operator-(const PiBlock& other) const;
};

struct AdmmState {
  Eigen::MatrixXd x;                    // K x F in [0,1]
  std::vector<Eigen::MatrixXd> y;       // N copies, K x F
  std::vector<Eigen::MatrixXd> lambda;  // N duals, K x F
  PiBlock pi;
  PiBlock pi_hat;
  PiBlock z;                            // z1..z4 in the same layout
  std::array<double, 5> rho{};
  double beta = 0.0;
  int iteration = 0;
};

/// Gradient of the augmented Lagrangian with respect to the primal blocks.
struct AdmmGradient {
  Eigen::MatrixXd x;
  std::vector<Eigen::MatrixXd> y;
  PiBlock pi;
  PiBlock pi_hat;
};

/// Explicit params.rho, or 10x the largest coefficient of each block.
std::array<double, 5> resolve_rho(const SolverParams& params, const P2Data& data);

/// x from params.init, y = x, Pi tight at x, Pi_hat = Pi, duals 0.
AdmmState initial_state(const P2Data& data, const SolverParams& params);

/// Tight Pi for a relaxed x: each group at the max of its gated coefficients.
PiBlock tight_pi(const P2Data& data, const Eigen::MatrixXd& x);

/// y and Pi_hat step. Parallel over samples; the serial version is the reference.
void update_copies(AdmmState& state, const P2Data& data, const SolverParams& params);
void update_copies_serial(AdmmState& state, const P2Data& data, const SolverParams& params);

/// The (f, n) copy subproblem as a dense QP, variables [y of free requesters, 4 hats].
QpProblem copy_subproblem(const AdmmState& state, const P2Data& data, TaskIndex f, std::size_t n,
                          std::vector<DeviceIndex>* free_requesters = nullptr);

struct CccpReport {
  int iterations = 0;
  bool monotone = true;
  std::vector<double> surrogate;  // value before the first step and after each step
};

/// x and Pi step by CCCP on the true P2.2.3 objective.
CccpReport update_globals(AdmmState& state, const P2Data& data, const SolverParams& params);

/// One device's x step: min D/2 |x - center|^2 over the box with e'x <= E, clamped
/// entries fixed at 0. center already includes the linearized penalty.
Eigen::VectorXd solve_device_step(const Eigen::VectorXd& center, const Eigen::VectorXd& energy, double budget,
                                  std::span<const std::uint8_t> free);

void update_duals(AdmmState& state);

double lagrangian_value(const AdmmState& state, const P2Data& data);
AdmmGradient lagrangian_gradient(const AdmmState& state, const P2Data& data);

/// sqrt(sum_n |x - y^n|^2 + |Pi_hat - Pi|^2)
double primal_residual(const AdmmState& state);

/// Threshold, then per device drop the entries with the smallest Hz saved per
/// joule until the energy budget holds. Deadline-infeasible entries are 0.
ComputeDecision round_and_repair(const Eigen::MatrixXd& x, const Scenario& s, double threshold = 0.5);

struct AdmmTraceRow {
  int iteration = 0;
  double lagrangian = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double dx_norm = 0.0;
  double binary_violation = 0.0;  // sum x(1-x)
  double candidate_bandwidth = 0.0;  // Hz, rounded iterate
  int cccp_iterations = 0;
  bool cccp_monotone = true;
};

struct P2Result {
  ComputeDecision x;
  Eigen::MatrixXd relaxed;  // last iterate
  double bandwidth = 0.0;   // Hz
  int iterations = 0;
  bool converged = false;
  int best_iteration = 0;   // 0 = the all-zero start
  std::vector<AdmmTraceRow> trace;
};

/// Runs ADMM until |x(t+1) - x(t)| <= tolerance (once t >= min_iterations) or
/// max_iterations. Returns the best rounded iterate, never worse than x = 0.
P2Result solve_p2(const Scenario& s, const SampleSet& samples, const SolverParams& params);

void write_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& trace);

}  // namespace codedmec
