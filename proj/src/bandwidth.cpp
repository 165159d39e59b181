// src/bandwidth.cpp
#include "codedmec/bandwidth.hpp"

#include "codedmec/errors.hpp"

#include <boost/rational.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace codedmec {

namespace {

constexpr double kMaxExactStates = 16777216.0;  // 2^24

bool served_by_coded(const CacheDecision& cd, bool local, TaskIndex f) {
  if (!cd.is_cached(f)) return false;
  return cd.type == DataType::Input ? local : !local;
}

DeliveryCase classify(const CacheDecision& cd, bool local, TaskIndex f) {
  const bool cached = cd.is_cached(f);
  if (cd.type == DataType::Input) {
    if (!local) return DeliveryCase::Output;
    return cached ? DeliveryCase::CodedInput : DeliveryCase::WholeInput;
  }
  if (local) return DeliveryCase::Input;
  return cached ? DeliveryCase::CodedOutput : DeliveryCase::WholeOutput;
}

struct Group {
  TaskIndex task;
  double rate;
  double channel;
};

// Tiny fixed-capacity group table; K <= 60 so at most 64 groups per kind.
struct GroupTable {
  std::array<Group, 64> groups;
  std::size_t size = 0;

  void add(TaskIndex f, double rate, double channel) {
    for (std::size_t i = 0; i < size; ++i) {
      if (groups[i].task == f) {
        groups[i].rate = std::max(groups[i].rate, rate);
        groups[i].channel = std::max(groups[i].channel, channel);
        return;
      }
    }
    groups[size++] = {f, rate, channel};
  }

  void sort_by_task() {
    std::sort(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(size),
              [](const Group& a, const Group& b) { return a.task < b.task; });
  }
};

}  // namespace

CaseBreakdown case_rates(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x, const RequestState& q) {
  const std::size_t K = s.num_devices;
  const std::size_t F = s.num_tasks;
  CaseBreakdown out;
  out.type = cd.type;
  out.input_rate.assign(F, 0.0);
  out.input_channel.assign(F, 0.0);
  out.output_rate.assign(F, 0.0);
  out.output_channel.assign(F, 0.0);
  out.device_case.resize(K);

  const double output_rate = s.output_bits / s.slot_seconds;
  double coded_member_rate = 0.0;  // max over members of size_d / window
  for (DeviceIndex k = 0; k < K; ++k) {
    const TaskIndex f = q.demand[k];
    const bool local = x(k, f);
    const double h = channel_cost(s, k);
    double input_rate = 0.0;
    if (local) {
      const double window = download_window(s, k, f);
      if (!(window > 0.0)) throw DeadlineError(k, f);
      input_rate = s.input_bits / window;
    }
    out.device_case[k] = classify(cd, local, f);
    if (served_by_coded(cd, local, f)) {
      ++out.coded_served;
      coded_member_rate = std::max(coded_member_rate, local ? input_rate : output_rate);
      out.coded_channel = std::max(out.coded_channel, h);
    } else if (local) {
      out.input_rate[f] = std::max(out.input_rate[f], input_rate);
      out.input_channel[f] = std::max(out.input_channel[f], h);
    } else {
      out.output_rate[f] = std::max(out.output_rate[f], output_rate);
      out.output_channel[f] = std::max(out.output_channel[f], h);
    }
  }
  if (out.coded_served > 0) {
    out.coded_load = boost::rational_cast<double>(coded_rate(K, cd.t, out.coded_served));
    out.coded_rate = out.coded_load * coded_member_rate;
  }
  return out;
}

StateBandwidth state_bandwidth(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                               const RequestState& q) {
  StateBandwidth out;
  out.breakdown = case_rates(s, cd, x, q);
  const auto& b = out.breakdown;
  double v = b.coded_rate * b.coded_channel;
  for (TaskIndex f = 0; f < s.num_tasks; ++f) {
    if (b.input_channel[f] > 0.0) v += b.input_rate[f] * b.input_channel[f];
  }
  for (TaskIndex f = 0; f < s.num_tasks; ++f) {
    if (b.output_channel[f] > 0.0) v += b.output_rate[f] * b.output_channel[f];
  }
  out.value = v;
  return out;
}

BandwidthKernel::BandwidthKernel(const Scenario& s, const CacheDecision& cd) : s_(&s), cd_(&cd) {
  const std::size_t K = s.num_devices;
  const std::size_t F = s.num_tasks;
  channel_.resize(K);
  for (DeviceIndex k = 0; k < K; ++k) channel_[k] = channel_cost(s, k);
  input_rate_.resize(K * F);
  for (DeviceIndex k = 0; k < K; ++k) {
    for (TaskIndex f = 0; f < F; ++f) {
      const double window = download_window(s, k, f);
      input_rate_[k * F + f] = window > 0.0 ? s.input_bits / window : -1.0;
    }
  }
  load_.assign(K + 1, 0.0);
  if (cd.num_cached > 0) {
    for (std::size_t m = 1; m <= K; ++m) load_[m] = boost::rational_cast<double>(coded_rate(K, cd.t, m));
  }
  output_rate_ = s.output_bits / s.slot_seconds;
}

double BandwidthKernel::state_value(const ComputeDecision& x, const RequestState& q) const {
  const std::size_t K = s_->num_devices;
  const std::size_t F = s_->num_tasks;
  GroupTable inputs;
  GroupTable outputs;
  std::size_t served = 0;
  double coded_member_rate = 0.0;
  double coded_channel = 0.0;
  for (DeviceIndex k = 0; k < K; ++k) {
    const TaskIndex f = q.demand[k];
    const bool local = x(k, f);
    const double h = channel_[k];
    double input_rate = 0.0;
    if (local) {
      input_rate = input_rate_[k * F + f];
      if (input_rate < 0.0) throw DeadlineError(k, f);
    }
    if (served_by_coded(*cd_, local, f)) {
      ++served;
      coded_member_rate = std::max(coded_member_rate, local ? input_rate : output_rate_);
      coded_channel = std::max(coded_channel, h);
    } else if (local) {
      inputs.add(f, input_rate, h);
    } else {
      outputs.add(f, output_rate_, h);
    }
  }
  double v = served > 0 ? (load_[served] * coded_member_rate) * coded_channel : 0.0;
  inputs.sort_by_task();
  outputs.sort_by_task();
  for (std::size_t i = 0; i < inputs.size; ++i) v += inputs.groups[i].rate * inputs.groups[i].channel;
  for (std::size_t i = 0; i < outputs.size; ++i) v += outputs.groups[i].rate * outputs.groups[i].channel;
  return v;
}

double average_bandwidth(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                         const SampleSet& samples) {
  const BandwidthKernel kernel(s, cd);
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::vector<double> values(samples.size());
  bool failed = false;
  std::size_t bad_k = 0;
  std::size_t bad_f = 0;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      values[static_cast<std::size_t>(i)] = kernel.state_value(x, samples.states[static_cast<std::size_t>(i)]);
    } catch (const DeadlineError& e) {
#pragma omp critical(codedmec_bandwidth_error)
      {
        failed = true;
        bad_k = e.device();
        bad_f = e.task();
      }
    }
  }
  if (failed) throw DeadlineError(bad_k, bad_f);
  double total = 0.0;
  for (double v : values) total += v;
  return samples.size() ? total / static_cast<double>(samples.size()) : 0.0;
}

double average_bandwidth_serial(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                                const SampleSet& samples) {
  const BandwidthKernel kernel(s, cd);
  double total = 0.0;
  for (const auto& q : samples.states) total += kernel.state_value(x, q);
  return samples.size() ? total / static_cast<double>(samples.size()) : 0.0;
}

double expected_bandwidth_exact(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x) {
  if (std::pow(static_cast<double>(s.num_tasks), static_cast<double>(s.num_devices)) > kMaxExactStates) {
    throw SizeGuardError("exact expectation enumerates at most 2^24 request states");
  }
  const BandwidthKernel kernel(s, cd);
  double total = 0.0;
  for_each_state(s.num_devices, s.num_tasks, [&](const RequestState& q) {
    const double p = state_probability(s, q);
    if (p > 0.0) total += p * kernel.state_value(x, q);
  });
  return total;
}

void write_breakdown_csv(std::ostream& os, const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                         const SampleSet& samples) {
  os << "state,case1,case2,case3,case4,case5,case6,coded_load,coded_rate_bps,coded_channel,"
        "input_term_hz,output_term_hz,value_hz\n";
  const auto old_precision = os.precision(12);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto sb = state_bandwidth(s, cd, x, samples.states[n]);
    const auto& b = sb.breakdown;
    std::array<std::size_t, 7> counts{};
    for (auto c : b.device_case) ++counts[static_cast<std::size_t>(c)];
    double input_term = 0.0;
    double output_term = 0.0;
    for (TaskIndex f = 0; f < s.num_tasks; ++f) {
      input_term += b.input_rate[f] * b.input_channel[f];
      output_term += b.output_rate[f] * b.output_channel[f];
    }
    os << n;
    for (std::size_t c = 1; c <= 6; ++c) os << ',' << counts[c];
    os << ',' << b.coded_load << ',' << b.coded_rate << ',' << b.coded_channel << ',' << input_term << ','
       << output_term << ',' << sb.value << '\n';
  }
  os.precision(old_precision);
}

}  // namespace codedmec
