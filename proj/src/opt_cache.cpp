// src/opt_cache.cpp
#include "codedmec/opt_cache.hpp"

#include "codedmec/bandwidth.hpp"
#include "codedmec/errors.hpp"

#include <algorithm>
#include <ostream>

namespace codedmec {

std::vector<TaskIndex> candidate_order(DataType d, const ComputeDecision& x, const SampleSet& samples) {
  const std::size_t K = x.num_devices();
  const std::size_t F = x.num_tasks();
  const bool want_local = d == DataType::Input;
  std::vector<TaskIndex> order;
  for (TaskIndex f = 0; f < F; ++f) {
    for (DeviceIndex k = 0; k < K; ++k) {
      if (x(k, f) == want_local) {
        order.push_back(f);
        break;
      }
    }
  }
  std::vector<std::size_t> count(F, 0);
  for (const auto& q : samples.states) {
    for (DeviceIndex k = 0; k < K; ++k) {
      const TaskIndex f = q.demand[k];
      if (x(k, f) == want_local) ++count[f];
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](TaskIndex a, TaskIndex b) { return count[a] > count[b]; });
  return order;
}

std::size_t prefix_t(const Scenario& s, DataType d, std::size_t num) { return placement_parameter(s, d, num); }

CacheSearchResult solve_p3_variant(DataType d, const ComputeDecision& x, const Scenario& s, const SampleSet& samples,
                                   const CacheSearchOptions& options) {
  if (x.num_devices() != s.num_devices || x.num_tasks() != s.num_tasks) {
    throw ValidationError("x", "compute decision shape does not match the scenario");
  }
  CacheSearchResult out;
  out.order = candidate_order(d, x, samples);
  const std::size_t num_max = out.order.size();

  auto decision_for = [&](std::size_t num) {
    std::vector<std::uint8_t> c(s.num_tasks, 0);
    for (std::size_t i = 0; i < num; ++i) c[out.order[i]] = 1;
    return derive_t(c, d, s);
  };

  out.log.resize(num_max + 1);
  std::size_t t0 = prefix_t(s, d, num_max);
  out.log[0] = {num_max, t0, true, 0.0};
  for (std::size_t i = 1; i <= num_max; ++i) {
    const std::size_t num = num_max - i;
    const std::size_t t = prefix_t(s, d, num);
    const bool eval = options.exhaustive_prefix || t != t0;
    out.log[i] = {num, t, eval, 0.0};
    t0 = t;
  }

  std::vector<CacheDecision> decisions(out.log.size());
  for (std::size_t i = 0; i < out.log.size(); ++i) {
    if (!out.log[i].evaluated) continue;
    decisions[i] = decision_for(out.log[i].num);
    out.log[i].bandwidth = average_bandwidth(s, decisions[i], x, samples);
  }

  out.cache = decisions[0];
  out.bandwidth = out.log[0].bandwidth;
  for (std::size_t i = 1; i < out.log.size(); ++i) {
    if (out.log[i].evaluated && out.log[i].bandwidth <= out.bandwidth) {
      out.bandwidth = out.log[i].bandwidth;
      out.cache = decisions[i];
    }
  }
  return out;
}

CachePlan solve_p3(const ComputeDecision& x, const Scenario& s, const SampleSet& samples,
                   const CacheSearchOptions& options) {
  CachePlan plan;
  plan.input = solve_p3_variant(DataType::Input, x, s, samples, options);
  plan.output = solve_p3_variant(DataType::Output, x, s, samples, options);
  return plan;
}

void write_search_log(std::ostream& os, const CacheSearchResult& r) {
  os << "num,t,evaluated,bandwidth_hz\n";
  const auto old = os.precision(12);
  for (const auto& step : r.log) {
    os << step.num << ',' << step.t << ',' << (step.evaluated ? 1 : 0) << ',';
    if (step.evaluated) os << step.bandwidth;
    os << '\n';
  }
  os.precision(old);
}

}  // namespace codedmec
