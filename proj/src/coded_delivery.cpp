// src/coded_delivery.cpp
#include "codedmec/coded_delivery.hpp"

#include "codedmec/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace codedmec {

namespace {

__extension__ typedef __int128 i128;
__extension__ typedef unsigned __int128 u128;

constexpr std::size_t kOracleMaxDevices = 12;
constexpr std::size_t kMaxPlacementLabels = 1u << 22;

bool is_whole(double v) { return v >= 0.0 && v <= 9007199254740992.0 && v == std::floor(v); }

/// floor(C K / (N size)) without floating round-off when the sizes are whole bits.
std::size_t placement_floor(double cache_bits, std::size_t K, std::size_t N, double item_bits) {
  if (item_bits <= 0.0) return K;
  if (is_whole(cache_bits) && is_whole(item_bits)) {
    const u128 num = static_cast<u128>(static_cast<std::uint64_t>(cache_bits)) * K;
    const u128 den = static_cast<u128>(static_cast<std::uint64_t>(item_bits)) * N;
    const u128 q = num / den;
    return q > K ? K : static_cast<std::size_t>(q);
  }
  const long double ratio = static_cast<long double>(cache_bits) * K / (static_cast<long double>(item_bits) * N);
  const long double q = std::floor(ratio);
  return q > static_cast<long double>(K) ? K : static_cast<std::size_t>(q);
}

DeviceSet full_set(std::size_t K) { return K >= 64 ? ~DeviceSet{0} : ((DeviceSet{1} << K) - 1); }

/// Calls visit(mask) for every r-subset of K devices in increasing mask order.
template <class Visit>
void for_each_subset(std::size_t K, std::size_t r, Visit&& visit) {
  if (r > K) return;
  if (r == 0) {
    visit(DeviceSet{0});
    return;
  }
  DeviceSet mask = (r >= 64) ? ~DeviceSet{0} : ((DeviceSet{1} << r) - 1);
  const DeviceSet limit = full_set(K);
  while (true) {
    visit(mask);
    if (mask == (limit & ~((DeviceSet{1} << (K - r)) - 1))) return;  // top r bits set
    // Gosper's hack: next mask with the same popcount.
    const DeviceSet low = mask & (~mask + 1);
    const DeviceSet ripple = mask + low;
    mask = (((ripple ^ mask) >> 2) / low) | ripple;
  }
}

char data_letter(DataType type) { return type == DataType::Input ? 'I' : 'O'; }

std::string task_name(TaskIndex f, std::size_t num_tasks) {
  if (num_tasks <= 26) return std::string(1, static_cast<char>('A' + f));
  return "T" + std::to_string(f + 1);
}

std::string device_list(DeviceSet set) {
  std::string out;
  for (std::size_t k = 0; k < 64; ++k) {
    if (!(set >> k & 1)) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(k + 1);
  }
  return out;
}

}  // namespace

std::int64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  i128 result = 1;
  for (std::size_t i = 0; i < k; ++i) {
    result = result * static_cast<i128>(n - i) / static_cast<i128>(i + 1);
    if (result > static_cast<i128>(INT64_MAX)) throw std::overflow_error("binomial coefficient exceeds int64");
  }
  return static_cast<std::int64_t>(result);
}

CacheDecision derive_t(std::span<const std::uint8_t> c, DataType d, const Scenario& s) {
  if (c.size() != s.num_tasks) throw std::invalid_argument("cache vector length must equal the number of tasks");
  CacheDecision cd;
  cd.type = d;
  cd.item_bits = d == DataType::Input ? s.input_bits : s.output_bits;
  cd.cached.assign(c.begin(), c.end());
  for (auto& v : cd.cached) v = v ? 1 : 0;
  cd.num_cached = static_cast<std::size_t>(std::count(cd.cached.begin(), cd.cached.end(), 1));
  if (cd.num_cached == 0) return cd;

  cd.t = placement_floor(s.cache_bits, s.num_devices, cd.num_cached, cd.item_bits);
  if (cd.t == 0) {
    std::fill(cd.cached.begin(), cd.cached.end(), 0);
    cd.num_cached = 0;
  }
  return cd;
}

std::size_t placement_parameter(const Scenario& s, DataType d, std::size_t num_cached) {
  if (num_cached == 0) return 0;
  return placement_floor(s.cache_bits, s.num_devices, num_cached, d == DataType::Input ? s.input_bits : s.output_bits);
}

CacheDecision no_cache(const Scenario& s, DataType d) {
  const std::vector<std::uint8_t> zeros(s.num_tasks, 0);
  return derive_t(zeros, d, s);
}

Rational coded_rate(std::size_t K, std::size_t t, std::size_t M) {
  if (t > K || M > K) throw std::invalid_argument("coded_rate requires t <= K and M <= K");
  if (t == K || M == 0) return Rational(0);
  if (M >= K - t) return Rational(static_cast<std::int64_t>(K - t), static_cast<std::int64_t>(1 + t));
  std::int64_t subsets = 0;
  for (std::size_t i = 1; i <= M; ++i) subsets += binomial(K - i, t);
  return Rational(subsets, binomial(K, t));
}

Rational coded_rate_oracle(std::size_t K, std::size_t t, std::size_t M) {
  if (K > kOracleMaxDevices) throw SizeGuardError("coded_rate_oracle enumerates subsets only up to K = 12");
  if (t > K || M > K) throw std::invalid_argument("coded_rate_oracle requires t <= K and M <= K");
  const DeviceSet served = (DeviceSet{1} << M) - 1;
  std::int64_t hits = 0;
  for (DeviceSet v = 0; v <= full_set(K); ++v) {
    if (static_cast<std::size_t>(std::popcount(v)) == t + 1 && (v & served) != 0) ++hits;
  }
  return Rational(hits, binomial(K, t));
}

bool Placement::holds(DeviceIndex k, const SubfileLabel& label) const {
  const auto& cache = device_cache[k];
  return std::binary_search(cache.begin(), cache.end(), label);
}

Placement place(const CacheDecision& cd, const Scenario& s) {
  const std::size_t K = s.num_devices;
  Placement p;
  p.num_devices = K;
  p.t = cd.t;
  p.device_cache.assign(K, {});
  if (cd.t == 0 || cd.num_cached == 0) return p;

  p.subfiles_per_task = static_cast<std::size_t>(binomial(K, cd.t));
  if (p.subfiles_per_task * cd.num_cached > kMaxPlacementLabels) {
    throw SizeGuardError("placement would enumerate more than 2^22 subfile labels");
  }
  p.subfile_bits = cd.item_bits / static_cast<double>(p.subfiles_per_task);
  for (TaskIndex f = 0; f < cd.cached.size(); ++f) {
    if (!cd.is_cached(f)) continue;
    for_each_subset(K, cd.t, [&](DeviceSet subset) {
      for (std::size_t k = 0; k < K; ++k) {
        if (subset >> k & 1) p.device_cache[k].push_back({f, subset});
      }
    });
  }
  for (auto& cache : p.device_cache) std::sort(cache.begin(), cache.end());
  return p;
}

std::vector<CodedMessage> build_messages(const CacheDecision& cd, std::span<const ServedRequest> served,
                                         std::size_t num_devices) {
  std::vector<CodedMessage> out;
  if (served.empty()) return out;
  if (cd.t == 0) throw std::invalid_argument("coded delivery needs a placement with t >= 1");
  if (cd.t >= num_devices) return out;

  std::vector<long> demand(num_devices, -1);
  DeviceSet served_set = 0;
  for (const auto& r : served) {
    if (r.device >= num_devices) throw std::invalid_argument("served device out of range");
    if (served_set >> r.device & 1) throw std::invalid_argument("device served twice");
    if (r.task >= cd.cached.size() || !cd.is_cached(r.task)) {
      throw std::invalid_argument("served device " + std::to_string(r.device) + " demands an uncached task");
    }
    served_set |= DeviceSet{1} << r.device;
    demand[r.device] = static_cast<long>(r.task);
  }

  const double bits = cd.item_bits / static_cast<double>(binomial(num_devices, cd.t));
  for_each_subset(num_devices, cd.t + 1, [&](DeviceSet v) {
    if ((v & served_set) == 0) return;
    CodedMessage msg;
    msg.subset = v;
    msg.bits = bits;
    for (std::size_t m = 0; m < num_devices; ++m) {
      if ((v >> m & 1) && demand[m] >= 0) {
        msg.payload.push_back({static_cast<TaskIndex>(demand[m]), v & ~(DeviceSet{1} << m)});
      }
    }
    out.push_back(std::move(msg));
  });
  return out;
}

std::vector<SubfileLabel> decode(DeviceIndex k, TaskIndex demand, const Placement& placement,
                                 std::span<const CodedMessage> messages) {
  std::vector<SubfileLabel> recovered;
  for (const auto& label : placement.device_cache.at(k)) {
    if (label.task == demand) recovered.push_back(label);
  }
  for (const auto& msg : messages) {
    if (!(msg.subset >> k & 1)) continue;
    const SubfileLabel* unknown = nullptr;
    for (const auto& term : msg.payload) {
      if (placement.holds(k, term)) continue;
      if (unknown != nullptr) {
        throw DecodeError("device " + std::to_string(k) + " cannot cancel two unknown subfiles in one message");
      }
      unknown = &term;
    }
    if (unknown != nullptr && unknown->task == demand) recovered.push_back(*unknown);
  }
  std::sort(recovered.begin(), recovered.end());
  recovered.erase(std::unique(recovered.begin(), recovered.end()), recovered.end());
  if (recovered.size() != placement.subfiles_per_task) {
    throw DecodeError("device " + std::to_string(k) + " is missing " +
                      std::to_string(placement.subfiles_per_task - recovered.size()) + " subfile(s) of task " +
                      std::to_string(demand));
  }
  return recovered;
}

std::vector<ServedRequest> served_requests(const CacheDecision& cd, const ComputeDecision& x, const RequestState& q) {
  std::vector<ServedRequest> out;
  const bool wants_local = cd.type == DataType::Input;
  for (DeviceIndex k = 0; k < q.num_devices(); ++k) {
    const TaskIndex f = q.demand[k];
    if (cd.is_cached(f) && x(k, f) == wants_local) out.push_back({k, f});
  }
  return out;
}

std::size_t count_served(const CacheDecision& cd, const ComputeDecision& x, const RequestState& q) {
  std::size_t m = 0;
  const bool wants_local = cd.type == DataType::Input;
  for (DeviceIndex k = 0; k < q.num_devices(); ++k) {
    const TaskIndex f = q.demand[k];
    if (cd.is_cached(f) && x(k, f) == wants_local) ++m;
  }
  return m;
}

DeliverySchedule delivery_schedule(const Scenario& s, const CacheDecision& cd, const ComputeDecision& x,
                                   const RequestState& q) {
  DeliverySchedule out;
  out.cache_type = cd.type;
  const auto served = served_requests(cd, x, q);
  out.coded = build_messages(cd, served, s.num_devices);

  DeviceSet served_set = 0;
  for (const auto& r : served) served_set |= DeviceSet{1} << r.device;

  // (task, type) -> receivers, ordered by task then input before output.
  std::map<std::pair<TaskIndex, int>, std::vector<DeviceIndex>> groups;
  for (DeviceIndex k = 0; k < q.num_devices(); ++k) {
    if (served_set >> k & 1) continue;
    const TaskIndex f = q.demand[k];
    const int input_first = x(k, f) ? 0 : 1;
    groups[{f, input_first}].push_back(k);
  }
  for (auto& [key, devices] : groups) {
    WholeFileTransmission w;
    w.task = key.first;
    w.type = key.second == 0 ? DataType::Input : DataType::Output;
    w.devices = std::move(devices);
    w.bits = w.type == DataType::Input ? s.input_bits : s.output_bits;
    out.whole.push_back(std::move(w));
  }
  return out;
}

std::string format_label(const SubfileLabel& label, DataType type, std::size_t num_tasks) {
  std::string out;
  out += data_letter(type);
  out += '(';
  out += task_name(label.task, num_tasks);
  out += '_';
  if (std::popcount(label.subset) == 1) {
    out += device_list(label.subset);
  } else {
    out += '{' + device_list(label.subset) + '}';
  }
  out += ')';
  return out;
}

void write_placement(std::ostream& os, const Placement& placement, DataType type, std::size_t num_tasks) {
  for (DeviceIndex k = 0; k < placement.num_devices; ++k) {
    os << "MD" << (k + 1) << ':';
    for (const auto& label : placement.device_cache[k]) os << ' ' << format_label(label, type, num_tasks);
    os << '\n';
  }
}

void write_schedule(std::ostream& os, const DeliverySchedule& schedule, std::size_t num_tasks) {
  for (const auto& msg : schedule.coded) {
    os << "CODED V={" << device_list(msg.subset) << "} ";
    for (std::size_t i = 0; i < msg.payload.size(); ++i) {
      if (i) os << '^';
      os << format_label(msg.payload[i], schedule.cache_type, num_tasks);
    }
    os << " bits=" << static_cast<long long>(std::llround(msg.bits)) << '\n';
  }
  for (const auto& w : schedule.whole) {
    os << "WHOLE " << data_letter(w.type) << '(' << task_name(w.task, num_tasks) << ") to={";
    for (std::size_t i = 0; i < w.devices.size(); ++i) {
      if (i) os << ',';
      os << (w.devices[i] + 1);
    }
    os << "} bits=" << static_cast<long long>(std::llround(w.bits)) << '\n';
  }
}

}  // namespace codedmec
