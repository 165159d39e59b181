// include/codedmec/opt_cache.hpp
//
// Greedy prefix search over coded-cache decisions for a fixed compute
// decision x*. Candidate tasks are those with at least one matching compute
// choice (some x* = 1 when caching inputs, some x* = 0 when caching outputs),
// ordered by how often the matching requests occur in the samples. Prefixes
// of that order are tried from longest to empty, and a prefix is evaluated
// only when its placement parameter t differs from the last evaluated one.
#pragma once

#include "codedmec/coded_delivery.hpp"
#include "codedmec/model.hpp"

#include <iosfwd>
#include <vector>

namespace codedmec {

struct CacheSearchStep {
  std::size_t num = 0;  // prefix length
  std::size_t t = 0;
  bool evaluated = false;
  double bandwidth = 0.0;  // Hz, only when evaluated
};

struct CacheSearchResult {
  CacheDecision cache;
  double bandwidth = 0.0;  // Hz
  std::vector<TaskIndex> order;  // candidate tasks, most requested first
  std::vector<CacheSearchStep> log;
};

struct CacheSearchOptions {
  /// Evaluate every prefix, ignoring the unchanged-t skip.
  bool exhaustive_prefix = false;
};

/// Candidate tasks for data type d, sorted by sampled matching-request count
/// (descending), ties by task index.
std::vector<TaskIndex> candidate_order(DataType d, const ComputeDecision& x, const SampleSet& samples);

/// Placement parameter of a prefix of length num: min(K, floor(CK/(num size))), 0 for num = 0.
std::size_t prefix_t(const Scenario& s, DataType d, std::size_t num);

CacheSearchResult solve_p3_variant(DataType d, const ComputeDecision& x, const Scenario& s, const SampleSet& samples,
                                   const CacheSearchOptions& options = {});

struct CachePlan {
  CacheSearchResult input;   // d = 1
  CacheSearchResult output;  // d = 0
  const CacheSearchResult& best() const { return output.bandwidth < input.bandwidth ? output : input; }
};

/// Runs both data types; ties go to caching inputs.
CachePlan solve_p3(const ComputeDecision& x, const Scenario& s, const SampleSet& samples,
                   const CacheSearchOptions& options = {});

/// "num,t,evaluated,bandwidth_hz" rows.
void write_search_log(std::ostream& os, const CacheSearchResult& r);

}  // namespace codedmec
