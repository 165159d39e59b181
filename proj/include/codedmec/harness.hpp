// include/codedmec/harness.hpp
//
// The full pipeline (compute decision, then cache search), the comparison
// policies, an exhaustive optimizer for tiny instances and parameter sweeps.
#pragma once

#include "codedmec/config.hpp"
#include "codedmec/opt_cache.hpp"
#include "codedmec/opt_compute.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace codedmec {

// ---- pipeline ---------------------------------------------------------------

struct PipelineOptions {
  CacheSearchOptions cache;
};

struct PipelineResult {
  P2Result p2;
  CachePlan plan;           // cache search on the ADMM decision
  CacheDecision cache;      // chosen c, d
  ComputeDecision x;        // chosen x
  bool zero_compute = false;  // the all-server decision won the cache search
  double bandwidth = 0.0;   // Hz
};

/// ADMM for x, then the cache search for both data types. The all-server
/// decision x = 0 (the solver's starting incumbent) also goes through the
/// cache search and is kept when it ends lower.
PipelineResult run_pipeline(const Scenario& s, const SampleSet& samples, const SolverParams& params,
                            const PipelineOptions& options = {});

// ---- baselines ---------------------------------------------------------------

/// Everything computed and sent whole by the server.
double baseline_traditional(const Scenario& s, const SampleSet& samples);

/// x = 0 with coded output caching.
CacheSearchResult baseline_local_coded_cache(const Scenario& s, const SampleSet& samples);

/// ADMM decision with no cache.
P2Result baseline_local_computing(const Scenario& s, const SampleSet& samples, const SolverParams& params);

struct UncodedResult {
  DataType type = DataType::Input;
  std::vector<TaskIndex> cached;  // identical at every device
  ComputeDecision x;
  double bandwidth = 0.0;
  int iterations = 0;  // ADMM iterations behind x
};

/// Tasks by sampled demand count, most requested first, ties by index.
std::vector<TaskIndex> popularity_order(const Scenario& s, const SampleSet& samples);

/// Average bandwidth when every device stores the whole `type` data of the
/// tasks in `cached`. A cached output serves the request for free; a cached
/// input does when the device computes locally.
double uncoded_bandwidth(const Scenario& s, std::span<const TaskIndex> cached, DataType type,
                         const ComputeDecision& x, const SampleSet& samples);

/// Whole-file caching of the floor(C/size) most requested tasks at every
/// device. Like the pipeline it tries the ADMM decision and x = 0 (cached
/// outputs switched off) with inputs or outputs cached and keeps the lowest.
/// `no_cache_p2` (the ADMM result without a cache) is reused when given.
UncodedResult baseline_uncoded(const Scenario& s, const SampleSet& samples, const SolverParams& params,
                               const P2Result* no_cache_p2 = nullptr);

// ---- exhaustive oracle -------------------------------------------------------

struct BruteForceResult {
  ComputeDecision x;
  CacheDecision cache;
  double bandwidth = 0.0;
  std::size_t feasible_x = 0;   // energy- and deadline-feasible x enumerated
  std::size_t cache_options = 0;  // distinct (c, d) placements
};

/// Global minimum over every feasible x, every c and both d. Needs K F <= 12
/// and F <= 6, otherwise SizeGuardError.
BruteForceResult brute_force_joint(const Scenario& s, const SampleSet& samples);
BruteForceResult brute_force_joint_serial(const Scenario& s, const SampleSet& samples);

// ---- sweeps ------------------------------------------------------------------

enum class SweepAxis { CacheBits, CpuFreq, NumDevices };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

/// Copy of cfg with the axis set to value (g becomes the same at every device).
ScenarioConfig with_axis(const ScenarioConfig& cfg, SweepAxis axis, double value);

struct SweepRow {
  double axis_value = 0.0;
  std::size_t replication = 0;
  std::string policy;
  double bandwidth = 0.0;  // NaN on failure
  int iterations = 0;
  double wall_ms = 0.0;
  std::string error;
};

struct SweepOptions {
  bool timing = true;  // false writes 0 wall times so reruns are byte-identical
};

inline const std::vector<std::string>& sweep_policies() {
  static const std::vector<std::string> names = {"proposed", "local_coded_cache", "local_computing", "traditional",
                                                 "uncoded"};
  return names;
}

/// One row per (point, replication, policy), in that order.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis, std::span<const double> points,
                                std::size_t replications, const SweepOptions& options = {});

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Mean bandwidth of one policy at each point (failed rows skipped).
std::vector<double> sweep_means(const std::vector<SweepRow>& rows, std::span<const double> points,
                                const std::string& policy);

}  // namespace codedmec
