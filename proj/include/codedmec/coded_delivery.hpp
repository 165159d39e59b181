// include/codedmec/coded_delivery.hpp
//
// Centralized coded caching over K devices: placement splits each cached
// task into C(K,t) equal subfiles W_{n,T} (|T| = t) and device k stores every
// subfile whose label set contains k. In delivery, each (t+1)-subset V that
// touches a served device gets one XOR message of W_{d_m, V\{m}} over the
// served m in V. Subfiles are symbolic labels, so decoding is checked over
// the XOR algebra of labels rather than payload bytes.
#pragma once

#include "codedmec/model.hpp"

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace codedmec {

using Rational = boost::rational<std::int64_t>;

/// Bitmask over devices, bit k set when device k is in the set.
using DeviceSet = std::uint64_t;

/// d: which side of the computation the devices cache.
enum class DataType : std::uint8_t { Output = 0, Input = 1 };

/// Coded cache decision (c, d) together with the derived placement
/// parameter t and cached-task count N. Build it with derive_t.
struct CacheDecision {
  std::vector<std::uint8_t> cached;  // c_f
  DataType type = DataType::Input;   // d
  std::size_t t = 0;
  std::size_t num_cached = 0;  // N
  double item_bits = 0.0;      // I when caching inputs, O when caching outputs

  bool is_cached(TaskIndex f) const { return cached[f] != 0; }
};

/// Applies t = min(K, floor(C K / (N size_d))); when that gives t = 0 the
/// decision is reset to caching nothing.
CacheDecision derive_t(std::span<const std::uint8_t> c, DataType d, const Scenario& s);

/// t for N cached tasks of type d without building the decision; 0 when N = 0.
std::size_t placement_parameter(const Scenario& s, DataType d, std::size_t num_cached);

/// The all-zero decision of the given data type.
CacheDecision no_cache(const Scenario& s, DataType d = DataType::Input);

/// Exact binomial coefficient; 0 when k > n. Throws std::overflow_error past int64.
std::int64_t binomial(std::size_t n, std::size_t k);

/// Coded multicast load b (in file units) when M devices are served from a
/// t-placement over K devices.
Rational coded_rate(std::size_t K, std::size_t t, std::size_t M);

/// Counts the (t+1)-subsets of K devices that intersect a fixed M-set and
/// divides by C(K,t). Exhaustive; K <= 12.
Rational coded_rate_oracle(std::size_t K, std::size_t t, std::size_t M);

struct SubfileLabel {
  TaskIndex task = 0;
  DeviceSet subset = 0;

  auto operator<=>(const SubfileLabel&) const = default;
};

struct Placement {
  std::size_t num_devices = 0;
  std::size_t t = 0;
  std::size_t subfiles_per_task = 0;  // C(K,t)
  double subfile_bits = 0.0;
  std::vector<std::vector<SubfileLabel>> device_cache;  // sorted per device

  bool holds(DeviceIndex k, const SubfileLabel& label) const;
  double device_bits(DeviceIndex k) const { return subfile_bits * static_cast<double>(device_cache[k].size()); }
};

/// Subfile assignment for a decision with t >= 1; empty placement when t = 0.
Placement place(const CacheDecision& cd, const Scenario& s);

struct ServedRequest {
  DeviceIndex device = 0;
  TaskIndex task = 0;
};

struct CodedMessage {
  DeviceSet subset = 0;               // V, |V| = t + 1
  std::vector<SubfileLabel> payload;  // XORed labels, one per served device in V
  double bits = 0.0;
};

/// One XOR message per (t+1)-subset that intersects the served set, in
/// increasing bitmask order. Every served device must demand a cached task.
std::vector<CodedMessage> build_messages(const CacheDecision& cd, std::span<const ServedRequest> served,
                                         std::size_t num_devices);

/// XOR peeling at device k: cached subfiles of `demand` plus one unknown
/// recovered from each message whose subset contains k. Returns the sorted
/// subfile labels of the task; throws DecodeError if any cannot be cancelled
/// or the file is incomplete.
std::vector<SubfileLabel> decode(DeviceIndex k, TaskIndex demand, const Placement& placement,
                                 std::span<const CodedMessage> messages);

/// Devices served by the coded multicast in state q: cached task computed
/// locally when d = 1, cached task computed at the server when d = 0.
std::vector<ServedRequest> served_requests(const CacheDecision& cd, const ComputeDecision& x, const RequestState& q);

/// M^q, the size of served_requests.
std::size_t count_served(const CacheDecision& cd, const ComputeDecision& x, const RequestState& q);

/// Whole-file multicast of one task's input or output to every device that needs it.
struct WholeFileTransmission {
  TaskIndex task = 0;
  DataType type = DataType::Output;
  std::vector<DeviceIndex> devices;
  double bits = 0.0;
};

struct DeliverySchedule {
  DataType cache_type = DataType::Input;
  std::vector<CodedMessage> coded;
  std::vector<WholeFileTransmission> whole;
};

/// Everything the server sends in state q: the coded messages plus one
/// whole-file multicast per (task, data type) for the remaining requests.
DeliverySchedule delivery_schedule(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                                   const RequestState& q);

/// "I(B_3)" style label: data type, task letter (or T<n> past 26 tasks),
/// 1-based device subscript.
std::string format_label(const SubfileLabel& label, DataType type, std::size_t num_tasks);

/// One line per device: "MD1: I(A_1) I(B_1) I(C_1)".
void write_placement(std::ostream& os, const Placement& placement, DataType type, std::size_t num_tasks);

/// One line per transmission:
///   "CODED V={2,3} I(B_3)^I(C_2) bits=1000000"
///   "WHOLE O(A) to={1} bits=6000000"
void write_schedule(std::ostream& os, const DeliverySchedule& schedule, std::size_t num_tasks);

}  // namespace codedmec
