// include/codedmec/config.hpp
//
// Scenario configuration files. A config is a JSON object:
//
//   {
//     "K": 6, "F": 12, "N_s": 200, "seed": 2024,
//     "I_bits": 3e6, "O_bits": 6e6, "C_bits": 6e6,
//     "tau_s": 0.02, "alpha": 1e-24,
//     "w":      {"uniform": [5, 10]},       // per task
//     "g":      3e9,                        // per device
//     "E":      {"uniform": [0, 150]},      // per device
//     "snr_db": {"uniform": [10, 20]},      // per device, average SNR
//     "fading": "rayleigh",                 // or "none"
//     "popularity": {"model": "uniform"},   // or zipf / explicit
//     "admm": {"beta": 100, "tolerance": 1}
//   }
//
// Per-item fields take a number (same value everywhere), an array (one value
// per item) or {"uniform": [lo, hi]}. Range samplers expand from named
// substreams of the master seed, indexed by replication, so one axis can be
// changed without re-randomizing the others.
#pragma once

#include "codedmec/model.hpp"
#include "codedmec/solver_params.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace codedmec {

struct ValueSampler {
  enum class Kind { Constant, List, Uniform };

  Kind kind = Kind::Constant;
  double constant = 0.0;
  std::vector<double> values;
  double lo = 0.0;
  double hi = 0.0;

  static ValueSampler fixed(double v) { return {Kind::Constant, v, {}, 0.0, 0.0}; }
  static ValueSampler uniform(double lo, double hi) { return {Kind::Uniform, 0.0, {}, lo, hi}; }
  static ValueSampler list(std::vector<double> v) { return {Kind::List, 0.0, std::move(v), 0.0, 0.0}; }

  /// `count` values; uniform draws come from `seed`.
  std::vector<double> expand(std::size_t count, std::uint64_t seed, const char* field) const;
};

enum class PopularityModel { Uniform, Zipf, Explicit };
enum class Fading { Rayleigh, None };

struct PopularityConfig {
  PopularityModel model = PopularityModel::Uniform;
  double exponent = 0.8;                        // zipf
  std::vector<std::vector<double>> rows;        // explicit, K x F
};

struct ScenarioConfig {
  std::size_t num_devices = 6;
  std::size_t num_tasks = 12;
  std::size_t num_samples = 200;
  std::uint64_t seed = 2024;

  double input_bits = 3e6;
  double output_bits = 6e6;
  double cache_bits = 6e6;
  double slot_seconds = 0.02;
  double energy_coeff = 1e-24;

  ValueSampler workload = ValueSampler::uniform(5.0, 10.0);
  ValueSampler cpu_freq = ValueSampler::fixed(3e9);
  ValueSampler energy_budget = ValueSampler::uniform(0.0, 150.0);
  ValueSampler snr_db = ValueSampler::uniform(10.0, 20.0);
  Fading fading = Fading::Rayleigh;
  PopularityConfig popularity;

  SolverParams admm;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Concrete, validated scenario for one replication.
Scenario build_scenario(const ScenarioConfig& cfg, std::size_t replication = 0);

/// Request samples for one replication (N_s states from the "requests" substream).
SampleSet build_samples(const ScenarioConfig& cfg, const Scenario& s, std::size_t replication = 0);

/// Human-readable summary; notes when the popularity marginal is the assumed uniform one.
std::string describe(const ScenarioConfig& cfg, const Scenario& s);

}  // namespace codedmec
