// include/codedmec/model.hpp
//
// Domain types for the cache-and-compute downlink: the scenario (tasks,
// devices, channels, timing), request states drawn from per-device
// popularities, and binary or relaxed local-compute decisions. Also the
// elementary physics: local compute time, expected energy and spectral
// efficiency.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

namespace codedmec {

using DeviceIndex = std::size_t;
using TaskIndex = std::size_t;

/// Immutable description of one experiment replication.
struct Scenario {
  std::size_t num_devices = 0;  // K
  std::size_t num_tasks = 0;    // F
  double input_bits = 0.0;      // I, bits per task input
  double output_bits = 0.0;     // O, bits per task output
  double cache_bits = 0.0;      // C, storage per device
  double slot_seconds = 0.0;    // tau, latency deadline
  double energy_coeff = 0.0;    // alpha, J s^2 / cycle^3

  std::vector<double> workload;       // w_f, cycles/bit, length F
  std::vector<double> cpu_freq;       // g_k, cycles/s, length K
  std::vector<double> energy_budget;  // E_k, joules, length K
  Eigen::MatrixXd popularity;         // p_{k,f}, K x F, rows sum to 1
  std::vector<double> snr_linear;     // per device, > 0

  std::uint64_t rng_seed = 0;

  /// Uniform p_{k,f} = 1/F.
  static Eigen::MatrixXd uniform_popularity(std::size_t devices, std::size_t tasks);
};

/// Checks every scenario invariant. Popularity rows within 1e-9 of one are
/// accepted as given, rows within 1e-6 are renormalized, anything else is
/// rejected. Throws ValidationError naming the first violated field.
Scenario validate_scenario(Scenario s);

/// One joint demand: device k requests exactly one task, `demand[k]`.
/// The one-hot row constraint of the K x F demand matrix holds by construction.
struct RequestState {
  std::vector<TaskIndex> demand;

  std::size_t num_devices() const { return demand.size(); }
  bool requests(DeviceIndex k, TaskIndex f) const { return demand[k] == f; }

  bool operator==(const RequestState&) const = default;
};

struct SampleSet {
  std::vector<RequestState> states;
  std::uint64_t seed = 0;

  std::size_t size() const { return states.size(); }
  bool operator==(const SampleSet&) const = default;
};

/// Draws `count` independent request states. Device rows are independent and
/// row k follows p_{k,.}. Identical inputs give identical samples.
SampleSet sample_requests(const Scenario& s, std::size_t count, std::uint64_t seed);

/// Product over devices of the probability of each device's demand.
double state_probability(const Scenario& s, const RequestState& q);

/// Visits all F^K request states in lexicographic order.
void for_each_state(std::size_t devices, std::size_t tasks, const std::function<void(const RequestState&)>& visit);

/// Binary local-compute decision x_{k,f}: 1 = device k computes task f itself,
/// 0 = the edge server computes it.
class ComputeDecision {
 public:
  ComputeDecision() = default;
  ComputeDecision(std::size_t devices, std::size_t tasks, bool value = false)
      : devices_(devices), tasks_(tasks), bits_(devices * tasks, value ? 1 : 0) {}

  std::size_t num_devices() const { return devices_; }
  std::size_t num_tasks() const { return tasks_; }

  bool operator()(DeviceIndex k, TaskIndex f) const { return bits_[k * tasks_ + f] != 0; }
  void set(DeviceIndex k, TaskIndex f, bool value) { bits_[k * tasks_ + f] = value ? 1 : 0; }

  std::size_t count() const;
  Eigen::MatrixXd relaxed() const;

  bool operator==(const ComputeDecision&) const = default;

 private:
  std::size_t devices_ = 0;
  std::size_t tasks_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// log2(1 + snr_k), bits/s/Hz.
double spectral_efficiency(const Scenario& s, DeviceIndex k);

/// 1 / log2(1 + snr_k): Hz needed per bit/s for device k.
double channel_cost(const Scenario& s, DeviceIndex k);

/// I w_f / g_k, seconds.
double local_compute_time(const Scenario& s, DeviceIndex k, TaskIndex f);

/// tau - I w_f / g_k: time left to download the input before the deadline.
double download_window(const Scenario& s, DeviceIndex k, TaskIndex f);

/// Local compute can meet the deadline only with a strictly positive download window.
bool deadline_feasible(const Scenario& s, DeviceIndex k, TaskIndex f);

/// p_{k,f} alpha g_k^2 I w_f: expected joules if device k takes task f locally.
double task_energy(const Scenario& s, DeviceIndex k, TaskIndex f);

double expected_energy(const Scenario& s, const ComputeDecision& x, DeviceIndex k);
double expected_energy(const Scenario& s, const Eigen::MatrixXd& x, DeviceIndex k);

/// Expected energy within budget for every device, with 1e-12 relative slack.
bool check_energy_feasible(const Scenario& s, const ComputeDecision& x);

/// Copy of x with every deadline-infeasible entry forced to zero.
ComputeDecision apply_deadline_clamp(const Scenario& s, ComputeDecision x);

}  // namespace codedmec
