// src/harness.cpp
#include "codedmec/harness.hpp"

#include "codedmec/bandwidth.hpp"
#include "codedmec/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace codedmec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool any_local(const ComputeDecision& x) { return x.count() > 0; }

std::size_t whole_files(double cache_bits, double size, std::size_t tasks) {
  if (!(size > 0.0)) return tasks;
  const double n = std::floor(cache_bits / size);
  return n >= static_cast<double>(tasks) ? tasks : static_cast<std::size_t>(std::max(0.0, n));
}

// Same compute candidates as the pipeline (x* and x = 0), whole-file placement
// instead of the coded one.
UncodedResult uncoded_with(const Scenario& s, const SampleSet& samples, const P2Result& base) {
  const std::size_t F = s.num_tasks;
  const auto order = popularity_order(s, samples);
  std::vector<ComputeDecision> xs{base.x};
  if (any_local(base.x)) xs.emplace_back(s.num_devices, F);

  UncodedResult best;
  best.bandwidth = std::numeric_limits<double>::infinity();
  for (const auto& x0 : xs) {
    for (DataType type : {DataType::Input, DataType::Output}) {
      UncodedResult r;
      r.type = type;
      const double size = type == DataType::Input ? s.input_bits : s.output_bits;
      r.cached.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(whole_files(s.cache_bits, size, F)));
      r.x = x0;
      if (type == DataType::Output) {
        // a cached output is never recomputed
        for (TaskIndex f : r.cached) {
          for (DeviceIndex k = 0; k < s.num_devices; ++k) r.x.set(k, f, false);
        }
      }
      r.bandwidth = uncoded_bandwidth(s, r.cached, type, r.x, samples);
      if (r.bandwidth < best.bandwidth) best = std::move(r);
    }
  }
  best.iterations = base.iterations;
  return best;
}

PipelineResult pipeline_with(const Scenario& s, const SampleSet& samples, const P2Result& p2,
                             const PipelineOptions& options) {
  PipelineResult r;
  r.p2 = p2;
  r.plan = solve_p3(p2.x, s, samples, options.cache);
  const auto& best = r.plan.best();
  r.cache = best.cache;
  r.x = p2.x;
  r.bandwidth = best.bandwidth;
  if (any_local(p2.x)) {
    const ComputeDecision zero(s.num_devices, s.num_tasks);
    const CachePlan alt = solve_p3(zero, s, samples, options.cache);
    if (alt.best().bandwidth < r.bandwidth) {
      r.cache = alt.best().cache;
      r.x = zero;
      r.bandwidth = alt.best().bandwidth;
      r.zero_compute = true;
    }
  }
  return r;
}

void check_brute_force_size(const Scenario& s) {
  if (s.num_devices * s.num_tasks > 12 || s.num_tasks > 6) {
    throw SizeGuardError("brute force needs K*F <= 12 and F <= 6 (got K=" + std::to_string(s.num_devices) +
                         ", F=" + std::to_string(s.num_tasks) + ")");
  }
}

struct BruteSpace {
  std::vector<std::pair<DeviceIndex, TaskIndex>> free;  // enumerated entries
  std::vector<CacheDecision> caches;
  std::vector<BandwidthKernel> kernels;
};

BruteSpace brute_space(const Scenario& s) {
  check_brute_force_size(s);
  BruteSpace sp;
  for (DeviceIndex k = 0; k < s.num_devices; ++k) {
    for (TaskIndex f = 0; f < s.num_tasks; ++f) {
      if (deadline_feasible(s, k, f)) sp.free.emplace_back(k, f);
    }
  }
  std::map<std::pair<int, std::vector<std::uint8_t>>, bool> seen;
  for (DataType d : {DataType::Input, DataType::Output}) {
    for (std::uint32_t mask = 0; mask < (1u << s.num_tasks); ++mask) {
      std::vector<std::uint8_t> c(s.num_tasks);
      for (TaskIndex f = 0; f < s.num_tasks; ++f) c[f] = (mask >> f) & 1u;
      CacheDecision cd = derive_t(c, d, s);
      // Nothing cached behaves the same for either type.
      const int key_type = cd.num_cached == 0 ? -1 : static_cast<int>(d);
      if (!seen.emplace(std::make_pair(key_type, cd.cached), true).second) continue;
      sp.caches.push_back(std::move(cd));
    }
  }
  sp.kernels.reserve(sp.caches.size());
  for (const auto& cd : sp.caches) sp.kernels.emplace_back(s, cd);
  return sp;
}

ComputeDecision decode_x(const Scenario& s, const BruteSpace& sp, std::uint64_t mask) {
  ComputeDecision x(s.num_devices, s.num_tasks);
  for (std::size_t i = 0; i < sp.free.size(); ++i) {
    if ((mask >> i) & 1u) x.set(sp.free[i].first, sp.free[i].second, true);
  }
  return x;
}

struct BruteBest {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t mask = 0;
  std::size_t cache = 0;
  std::size_t feasible = 0;
};

// Best cache for one x; the sample sum runs in a fixed order.
void brute_visit(const Scenario& s, const SampleSet& samples, const BruteSpace& sp, std::uint64_t mask,
                 BruteBest& best) {
  const ComputeDecision x = decode_x(s, sp, mask);
  if (!check_energy_feasible(s, x)) return;
  ++best.feasible;
  for (std::size_t c = 0; c < sp.kernels.size(); ++c) {
    double total = 0.0;
    for (const auto& q : samples.states) total += sp.kernels[c].state_value(x, q);
    const double v = samples.size() ? total / static_cast<double>(samples.size()) : 0.0;
    if (v < best.value) {
      best.value = v;
      best.mask = mask;
      best.cache = c;
    }
  }
}

BruteForceResult brute_result(const Scenario& s, const BruteSpace& sp, const BruteBest& best) {
  BruteForceResult r;
  r.x = decode_x(s, sp, best.mask);
  r.cache = sp.caches[best.cache];
  r.bandwidth = best.value;
  r.feasible_x = best.feasible;
  r.cache_options = sp.caches.size();
  return r;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

// ---- pipeline ---------------------------------------------------------------

PipelineResult run_pipeline(const Scenario& s, const SampleSet& samples, const SolverParams& params,
                            const PipelineOptions& options) {
  return pipeline_with(s, samples, solve_p2(s, samples, params), options);
}

// ---- baselines ---------------------------------------------------------------

double baseline_traditional(const Scenario& s, const SampleSet& samples) {
  return average_bandwidth(s, no_cache(s), ComputeDecision(s.num_devices, s.num_tasks), samples);
}

CacheSearchResult baseline_local_coded_cache(const Scenario& s, const SampleSet& samples) {
  return solve_p3_variant(DataType::Output, ComputeDecision(s.num_devices, s.num_tasks), s, samples);
}

P2Result baseline_local_computing(const Scenario& s, const SampleSet& samples, const SolverParams& params) {
  return solve_p2(s, samples, params);
}

std::vector<TaskIndex> popularity_order(const Scenario& s, const SampleSet& samples) {
  std::vector<std::size_t> count(s.num_tasks, 0);
  for (const auto& q : samples.states) {
    for (TaskIndex f : q.demand) ++count[f];
  }
  std::vector<TaskIndex> order(s.num_tasks);
  for (TaskIndex f = 0; f < s.num_tasks; ++f) order[f] = f;
  std::stable_sort(order.begin(), order.end(), [&](TaskIndex a, TaskIndex b) { return count[a] > count[b]; });
  return order;
}

double uncoded_bandwidth(const Scenario& s, std::span<const TaskIndex> cached, DataType type,
                         const ComputeDecision& x, const SampleSet& samples) {
  const std::size_t K = s.num_devices;
  const std::size_t F = s.num_tasks;
  std::vector<std::uint8_t> is_cached(F, 0);
  for (TaskIndex f : cached) is_cached.at(f) = 1;
  std::vector<double> channel(K);
  for (DeviceIndex k = 0; k < K; ++k) channel[k] = channel_cost(s, k);
  const double out_rate = s.output_bits / s.slot_seconds;

  std::vector<double> in_r(F), in_h(F), out_h(F);
  double total = 0.0;
  for (const auto& q : samples.states) {
    std::fill(in_r.begin(), in_r.end(), 0.0);
    std::fill(in_h.begin(), in_h.end(), 0.0);
    std::fill(out_h.begin(), out_h.end(), 0.0);
    for (DeviceIndex k = 0; k < K; ++k) {
      const TaskIndex f = q.demand[k];
      const bool local = x(k, f);
      if (is_cached[f] && (type == DataType::Output || local)) continue;
      if (local) {
        const double window = download_window(s, k, f);
        if (!(window > 0.0)) throw DeadlineError(k, f);
        in_r[f] = std::max(in_r[f], s.input_bits / window);
        in_h[f] = std::max(in_h[f], channel[k]);
      } else {
        out_h[f] = std::max(out_h[f], channel[k]);
      }
    }
    double v = 0.0;
    for (TaskIndex f = 0; f < F; ++f) v += in_r[f] * in_h[f];
    for (TaskIndex f = 0; f < F; ++f) v += out_rate * out_h[f];
    total += v;
  }
  return samples.size() ? total / static_cast<double>(samples.size()) : 0.0;
}

UncodedResult baseline_uncoded(const Scenario& s, const SampleSet& samples, const SolverParams& params,
                               const P2Result* no_cache_p2) {
  if (no_cache_p2) return uncoded_with(s, samples, *no_cache_p2);
  return uncoded_with(s, samples, solve_p2(s, samples, params));
}

// ---- exhaustive oracle -------------------------------------------------------

BruteForceResult brute_force_joint(const Scenario& s, const SampleSet& samples) {
  const BruteSpace sp = brute_space(s);
  const std::uint64_t total = std::uint64_t{1} << sp.free.size();
  const auto chunks = static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(total, 256));
  std::vector<BruteBest> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::uint64_t lo = total * static_cast<std::uint64_t>(c) / static_cast<std::uint64_t>(chunks);
    const std::uint64_t hi = total * static_cast<std::uint64_t>(c + 1) / static_cast<std::uint64_t>(chunks);
    auto& best = partial[static_cast<std::size_t>(c)];
    for (std::uint64_t mask = lo; mask < hi; ++mask) brute_visit(s, samples, sp, mask, best);
  }
  // Chunks are in mask order, so strict < keeps the serial tie-break.
  BruteBest best;
  for (const auto& p : partial) {
    best.feasible += p.feasible;
    if (p.value < best.value) {
      best.value = p.value;
      best.mask = p.mask;
      best.cache = p.cache;
    }
  }
  return brute_result(s, sp, best);
}

BruteForceResult brute_force_joint_serial(const Scenario& s, const SampleSet& samples) {
  const BruteSpace sp = brute_space(s);
  BruteBest best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sp.free.size()); ++mask) brute_visit(s, samples, sp, mask, best);
  return brute_result(s, sp, best);
}

// ---- sweeps ------------------------------------------------------------------

SweepAxis parse_axis(const std::string& name) {
  if (name == "cache_bits" || name == "C") return SweepAxis::CacheBits;
  if (name == "cpu_freq" || name == "g") return SweepAxis::CpuFreq;
  if (name == "num_devices" || name == "K") return SweepAxis::NumDevices;
  throw ValidationError("axis", "unknown axis '" + name + "' (cache_bits, cpu_freq, num_devices)");
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::CacheBits: return "cache_bits";
    case SweepAxis::CpuFreq: return "cpu_freq";
    case SweepAxis::NumDevices: return "num_devices";
  }
  return "";
}

ScenarioConfig with_axis(const ScenarioConfig& cfg, SweepAxis axis, double value) {
  ScenarioConfig out = cfg;
  switch (axis) {
    case SweepAxis::CacheBits:
      out.cache_bits = value;
      break;
    case SweepAxis::CpuFreq:
      out.cpu_freq = ValueSampler::fixed(value);
      break;
    case SweepAxis::NumDevices:
      if (!(value >= 1.0) || value != std::floor(value)) throw ValidationError("K", "sweep points must be positive integers");
      out.num_devices = static_cast<std::size_t>(value);
      break;
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, SweepAxis axis, std::span<const double> points,
                                std::size_t replications, const SweepOptions& options) {
  const auto& policies = sweep_policies();
  const std::size_t P = policies.size();
  std::vector<SweepRow> rows(points.size() * replications * P);
  auto row_at = [&](std::size_t point, std::size_t rep, std::size_t policy) -> SweepRow& {
    return rows[(point * replications + rep) * P + policy];
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t r = 0; r < replications; ++r) {
      for (std::size_t p = 0; p < P; ++p) {
        auto& row = row_at(i, r, p);
        row.axis_value = points[i];
        row.replication = r;
        row.policy = policies[p];
        row.bandwidth = kNaN;
      }
    }
  }

  // One job per replication. Along the cache axis the no-cache ADMM run does
  // not depend on the point, so it is shared across points.
  const auto reps = static_cast<std::ptrdiff_t>(replications);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t rr = 0; rr < reps; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    std::optional<P2Result> p2;
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto record_error = [&](const std::string& what) {
        for (std::size_t p = 0; p < P; ++p) {
          auto& row = row_at(i, r, p);
          if (std::isnan(row.bandwidth) && row.error.empty()) row.error = what;
        }
      };
      try {
        const ScenarioConfig point_cfg = with_axis(cfg, axis, points[i]);
        const Scenario s = build_scenario(point_cfg, r);
        const SampleSet samples = build_samples(point_cfg, s, r);
        if (!p2 || axis != SweepAxis::CacheBits) p2 = solve_p2(s, samples, cfg.admm);

        auto timed = [&](std::size_t policy, auto&& body) {
          auto& row = row_at(i, r, policy);
          const auto start = std::chrono::steady_clock::now();
          try {
            body(row);
          } catch (const std::exception& e) {
            row.bandwidth = kNaN;
            row.error = e.what();
          }
          row.wall_ms = options.timing ? elapsed_ms(start) : 0.0;
        };

        timed(0, [&](SweepRow& row) {
          const auto res = pipeline_with(s, samples, *p2, {});
          row.bandwidth = res.bandwidth;
          row.iterations = p2->iterations;
        });
        timed(1, [&](SweepRow& row) { row.bandwidth = baseline_local_coded_cache(s, samples).bandwidth; });
        timed(2, [&](SweepRow& row) {
          row.bandwidth = p2->bandwidth;
          row.iterations = p2->iterations;
        });
        timed(3, [&](SweepRow& row) { row.bandwidth = baseline_traditional(s, samples); });
        timed(4, [&](SweepRow& row) {
          const auto res = uncoded_with(s, samples, *p2);
          row.bandwidth = res.bandwidth;
          row.iterations = res.iterations;
        });
      } catch (const std::exception& e) {
        record_error(e.what());
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "axis_value,replication,policy,bandwidth_hz,iters,wall_ms,error\n";
  const auto old = os.precision(12);
  for (const auto& row : rows) {
    os << row.axis_value << ',' << row.replication << ',' << row.policy << ',';
    if (std::isnan(row.bandwidth)) {
      os << "nan";
    } else {
      os << row.bandwidth;
    }
    os << ',' << row.iterations << ',';
    os.precision(6);
    os << row.wall_ms;
    os.precision(12);
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << ',' << err << '\n';
  }
  os.precision(old);
}

std::vector<double> sweep_means(const std::vector<SweepRow>& rows, std::span<const double> points,
                                const std::string& policy) {
  std::vector<double> out;
  for (double v : points) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row.axis_value == v && row.policy == policy && !std::isnan(row.bandwidth)) {
        sum += row.bandwidth;
        ++n;
      }
    }
    out.push_back(n ? sum / static_cast<double>(n) : kNaN);
  }
  return out;
}

}  // namespace codedmec
