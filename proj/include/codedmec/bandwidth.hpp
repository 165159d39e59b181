// include/codedmec/bandwidth.hpp
//
// Per-state multicast bandwidth. Every request lands in one of three cases
// for the active data type: the coded multicast, a whole-input multicast
// (local compute) or a whole-output multicast (server compute). Each group
// runs at its tightest member rate over its worst member channel.
#pragma once

#include "codedmec/coded_delivery.hpp"
#include "codedmec/model.hpp"

#include <iosfwd>
#include <vector>

namespace codedmec {

/// Which of the six cases served a device.
enum class DeliveryCase : std::uint8_t {
  CodedInput = 1,   // d=1, x=1, c=1
  WholeInput = 2,   // d=1, x=1, c=0
  Output = 3,       // d=1, x=0
  CodedOutput = 4,  // d=0, x=0, c=1
  WholeOutput = 5,  // d=0, x=0, c=0
  Input = 6,        // d=0, x=1
};

struct CaseBreakdown {
  DataType type = DataType::Input;

  std::size_t coded_served = 0;  // M^q
  double coded_load = 0.0;       // b^q, file units
  double coded_rate = 0.0;       // R^1 or R^4, bit/s
  double coded_channel = 0.0;    // H^1 or H^4, Hz per bit/s

  // Per task. "input" is case 2 (d=1) or 6 (d=0); "output" is case 3 or 5.
  std::vector<double> input_rate;
  std::vector<double> input_channel;
  std::vector<double> output_rate;
  std::vector<double> output_channel;

  std::vector<DeliveryCase> device_case;  // per device
};

struct StateBandwidth {
  double value = 0.0;  // Hz
  CaseBreakdown breakdown;
};

/// Throws DeadlineError if a device computes locally with no download window left.
CaseBreakdown case_rates(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x, const RequestState& q);

StateBandwidth state_bandwidth(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                               const RequestState& q);

/// Precomputed per-(scenario, cache) data for evaluating many states quickly.
/// Same value as state_bandwidth, no allocation per state.
class BandwidthKernel {
 public:
  BandwidthKernel(const Scenario& s, const CacheDecision& cd);

  double state_value(const ComputeDecision& x, const RequestState& q) const;

 private:
  const Scenario* s_;
  const CacheDecision* cd_;
  std::vector<double> channel_;     // per device
  std::vector<double> input_rate_;  // K x F, I / window, negative when infeasible
  std::vector<double> load_;        // b for M = 0..K
  double output_rate_ = 0.0;
};

/// Sample mean of state_bandwidth. Samples are evaluated in parallel and summed
/// in index order, so the result is bit-identical to the serial version.
double average_bandwidth(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                         const SampleSet& samples);
double average_bandwidth_serial(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                                const SampleSet& samples);

/// Probability-weighted sum over all F^K states. Throws SizeGuardError past 2^24 states.
double expected_bandwidth_exact(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x);

/// CSV, one row per sample: index, case populations, coded and group terms, value.
void write_breakdown_csv(std::ostream& os, const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                         const SampleSet& samples);

}  // namespace codedmec
