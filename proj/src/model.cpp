// src/model.cpp
#include "codedmec/model.hpp"

#include "codedmec/errors.hpp"
#include "codedmec/random.hpp"

#include <cmath>
#include <sstream>

namespace codedmec {

namespace {

constexpr double kExactRowTolerance = 1e-9;
constexpr double kRenormalizeTolerance = 1e-6;
constexpr std::size_t kMaxDevices = 60;

std::string describe(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ValidationError(field, message);
}

void require_nonnegative(double value, const char* field) {
  require(std::isfinite(value) && value >= 0.0, field, "must be finite and non-negative, got " + describe(value));
}

}  // namespace

Eigen::MatrixXd Scenario::uniform_popularity(std::size_t devices, std::size_t tasks) {
  return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(devices), static_cast<Eigen::Index>(tasks),
                                   1.0 / static_cast<double>(tasks));
}

Scenario validate_scenario(Scenario s) {
  require(s.num_devices >= 1, "num_devices", "must be positive");
  require(s.num_devices <= kMaxDevices, "num_devices",
          "at most " + std::to_string(kMaxDevices) + " devices supported, got " + std::to_string(s.num_devices));
  require(s.num_tasks >= 1, "num_tasks", "must be positive");

  require_nonnegative(s.input_bits, "input_bits");
  require_nonnegative(s.output_bits, "output_bits");
  require_nonnegative(s.cache_bits, "cache_bits");
  require(std::isfinite(s.slot_seconds) && s.slot_seconds > 0.0, "slot_seconds",
          "slot_seconds must be positive, got " + describe(s.slot_seconds));
  require_nonnegative(s.energy_coeff, "energy_coeff");

  const auto K = s.num_devices;
  const auto F = s.num_tasks;
  require(s.workload.size() == F, "workload", "expected " + std::to_string(F) + " entries");
  for (std::size_t f = 0; f < F; ++f) {
    require(std::isfinite(s.workload[f]) && s.workload[f] > 0.0, "workload",
            "task " + std::to_string(f) + " workload must be positive, got " + describe(s.workload[f]));
  }
  require(s.cpu_freq.size() == K, "cpu_freq", "expected " + std::to_string(K) + " entries");
  require(s.energy_budget.size() == K, "energy_budget", "expected " + std::to_string(K) + " entries");
  require(s.snr_linear.size() == K, "snr_linear", "expected " + std::to_string(K) + " entries");
  for (std::size_t k = 0; k < K; ++k) {
    require(std::isfinite(s.cpu_freq[k]) && s.cpu_freq[k] > 0.0, "cpu_freq",
            "device " + std::to_string(k) + " frequency must be positive, got " + describe(s.cpu_freq[k]));
    require(std::isfinite(s.energy_budget[k]) && s.energy_budget[k] >= 0.0, "energy_budget",
            "device " + std::to_string(k) + " budget must be non-negative, got " + describe(s.energy_budget[k]));
    require(std::isfinite(s.snr_linear[k]) && s.snr_linear[k] > 0.0, "snr_linear",
            "device " + std::to_string(k) + " snr must be positive, got " + describe(s.snr_linear[k]));
  }

  require(static_cast<std::size_t>(s.popularity.rows()) == K && static_cast<std::size_t>(s.popularity.cols()) == F,
          "popularity", "expected a " + std::to_string(K) + "x" + std::to_string(F) + " matrix");
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = s.popularity.row(static_cast<Eigen::Index>(k));
    for (Eigen::Index f = 0; f < row.size(); ++f) {
      require(std::isfinite(row(f)) && row(f) >= 0.0, "popularity",
              "entry (" + std::to_string(k) + "," + std::to_string(f) + ") must be a probability");
    }
    const double sum = row.sum();
    const double gap = std::abs(sum - 1.0);
    if (gap <= kExactRowTolerance) continue;
    require(gap <= kRenormalizeTolerance, "popularity",
            "popularity row sum != 1 (row " + std::to_string(k) + " sums to " + describe(sum) + ")");
    s.popularity.row(static_cast<Eigen::Index>(k)) /= sum;
  }
  return s;
}

SampleSet sample_requests(const Scenario& s, std::size_t count, std::uint64_t seed) {
  SampleSet out;
  out.seed = seed;
  out.states.reserve(count);
  Rng rng(seed);
  std::vector<double> row(s.num_tasks);
  for (std::size_t n = 0; n < count; ++n) {
    RequestState q;
    q.demand.resize(s.num_devices);
    for (std::size_t k = 0; k < s.num_devices; ++k) {
      for (std::size_t f = 0; f < s.num_tasks; ++f) {
        row[f] = s.popularity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
      }
      q.demand[k] = rng.categorical(row);
    }
    out.states.push_back(std::move(q));
  }
  return out;
}

double state_probability(const Scenario& s, const RequestState& q) {
  double p = 1.0;
  for (std::size_t k = 0; k < q.num_devices(); ++k) {
    p *= s.popularity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q.demand[k]));
  }
  return p;
}

void for_each_state(std::size_t devices, std::size_t tasks, const std::function<void(const RequestState&)>& visit) {
  RequestState q;
  q.demand.assign(devices, 0);
  if (tasks == 0) return;
  while (true) {
    visit(q);
    // Odometer increment, last device fastest.
    std::size_t k = devices;
    while (k > 0) {
      --k;
      if (++q.demand[k] < tasks) break;
      q.demand[k] = 0;
      if (k == 0) return;
    }
    if (devices == 0) return;
  }
}

std::size_t ComputeDecision::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

Eigen::MatrixXd ComputeDecision::relaxed() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(devices_), static_cast<Eigen::Index>(tasks_));
  for (std::size_t k = 0; k < devices_; ++k) {
    for (std::size_t f = 0; f < tasks_; ++f) {
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = (*this)(k, f) ? 1.0 : 0.0;
    }
  }
  return m;
}

double spectral_efficiency(const Scenario& s, DeviceIndex k) { return std::log2(1.0 + s.snr_linear[k]); }

double channel_cost(const Scenario& s, DeviceIndex k) { return 1.0 / spectral_efficiency(s, k); }

double local_compute_time(const Scenario& s, DeviceIndex k, TaskIndex f) {
  return s.input_bits * s.workload[f] / s.cpu_freq[k];
}

double download_window(const Scenario& s, DeviceIndex k, TaskIndex f) {
  return s.slot_seconds - local_compute_time(s, k, f);
}

bool deadline_feasible(const Scenario& s, DeviceIndex k, TaskIndex f) { return download_window(s, k, f) > 0.0; }

double task_energy(const Scenario& s, DeviceIndex k, TaskIndex f) {
  const double g = s.cpu_freq[k];
  return s.popularity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) * s.energy_coeff * g * g *
         s.input_bits * s.workload[f];
}

double expected_energy(const Scenario& s, const ComputeDecision& x, DeviceIndex k) {
  double total = 0.0;
  for (std::size_t f = 0; f < s.num_tasks; ++f) {
    if (x(k, f)) total += task_energy(s, k, f);
  }
  return total;
}

double expected_energy(const Scenario& s, const Eigen::MatrixXd& x, DeviceIndex k) {
  double total = 0.0;
  for (std::size_t f = 0; f < s.num_tasks; ++f) {
    total += task_energy(s, k, f) * x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
  }
  return total;
}

bool check_energy_feasible(const Scenario& s, const ComputeDecision& x) {
  for (std::size_t k = 0; k < s.num_devices; ++k) {
    const double budget = s.energy_budget[k];
    if (expected_energy(s, x, k) > budget + 1e-12 * std::max(1.0, budget)) return false;
  }
  return true;
}

ComputeDecision apply_deadline_clamp(const Scenario& s, ComputeDecision x) {
  for (std::size_t k = 0; k < s.num_devices; ++k) {
    for (std::size_t f = 0; f < s.num_tasks; ++f) {
      if (x(k, f) && !deadline_feasible(s, k, f)) x.set(k, f, false);
    }
  }
  return x;
}

}  // namespace codedmec
