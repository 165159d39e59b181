// src/config.cpp
#include "codedmec/config.hpp"

#include "codedmec/errors.hpp"
#include "codedmec/random.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace codedmec {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {"K",     "F",  "N_s", "seed",   "I_bits", "O_bits",     "C_bits", "tau_s",
                                          "alpha", "w",  "g",   "E",      "snr_db", "fading",     "popularity",
                                          "admm",  "name"};

double number(const json& j, const char* field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ValidationError(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0) throw ValidationError(field, "must be non-negative");
  return static_cast<std::size_t>(v);
}

ValueSampler sampler(const json& j, const char* field) {
  if (j.is_number()) return ValueSampler::fixed(j.get<double>());
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& e : j) v.push_back(number(e, field));
    return ValueSampler::list(std::move(v));
  }
  if (j.is_object() && j.contains("uniform")) {
    const auto& r = j.at("uniform");
    if (!r.is_array() || r.size() != 2) throw ValidationError(field, "uniform range needs [lo, hi]");
    const double lo = number(r[0], field);
    const double hi = number(r[1], field);
    if (!(lo <= hi)) throw ValidationError(field, "uniform range needs lo <= hi");
    return ValueSampler::uniform(lo, hi);
  }
  throw ValidationError(field, "expected a number, an array or {\"uniform\": [lo, hi]}");
}

PopularityConfig popularity(const json& j) {
  PopularityConfig p;
  if (!j.is_object() || !j.contains("model")) throw ValidationError("popularity", "expected {\"model\": ...}");
  const auto model = j.at("model").get<std::string>();
  if (model == "uniform") {
    p.model = PopularityModel::Uniform;
  } else if (model == "zipf") {
    p.model = PopularityModel::Zipf;
    if (j.contains("exponent")) p.exponent = number(j.at("exponent"), "popularity.exponent");
    if (!(p.exponent >= 0.0)) throw ValidationError("popularity.exponent", "must be non-negative");
  } else if (model == "explicit") {
    p.model = PopularityModel::Explicit;
    if (!j.contains("rows") || !j.at("rows").is_array()) throw ValidationError("popularity.rows", "expected rows");
    for (const auto& row : j.at("rows")) {
      std::vector<double> r;
      for (const auto& e : row) r.push_back(number(e, "popularity.rows"));
      p.rows.push_back(std::move(r));
    }
  } else {
    throw ValidationError("popularity.model", "unknown model '" + model + "'");
  }
  return p;
}

SolverParams admm_section(const json& j) {
  SolverParams p;
  if (!j.is_object()) throw ValidationError("admm", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "beta") {
      p.beta = number(value, "admm.beta");
    } else if (key == "rho") {
      if (value.is_string() && value.get<std::string>() == "auto") continue;
      if (!value.is_array() || value.size() != 5) throw ValidationError("admm.rho", "expected 5 numbers or \"auto\"");
      std::array<double, 5> rho{};
      for (std::size_t i = 0; i < 5; ++i) rho[i] = number(value[i], "admm.rho");
      p.rho = rho;
    } else if (key == "tolerance") {
      p.tolerance = number(value, "admm.tolerance");
    } else if (key == "min_iterations") {
      p.min_iterations = static_cast<int>(count(value, "admm.min_iterations"));
    } else if (key == "max_iterations") {
      p.max_iterations = static_cast<int>(count(value, "admm.max_iterations"));
    } else if (key == "cccp_max_iterations") {
      p.cccp_max_iterations = static_cast<int>(count(value, "admm.cccp_max_iterations"));
    } else if (key == "cccp_tolerance") {
      p.cccp_tolerance = number(value, "admm.cccp_tolerance");
    } else if (key == "qp_tolerance") {
      p.qp_tolerance = number(value, "admm.qp_tolerance");
    } else if (key == "init") {
      const std::string v = value.is_string() ? value.get<std::string>() : "";
      if (v == "linearized") {
        p.init = InitMode::Linearized;
      } else if (v == "half") {
        p.init = InitMode::Half;
      } else {
        throw ValidationError("admm.init", "expected \"linearized\" or \"half\"");
      }
    } else if (key == "rounding_threshold") {
      p.rounding_threshold = number(value, "admm.rounding_threshold");
    } else {
      throw ValidationError("admm." + key, "unknown key");
    }
  }
  try {
    validate_solver_params(p);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("admm", e.what());
  }
  return p;
}

Eigen::MatrixXd build_popularity(const PopularityConfig& p, std::size_t K, std::size_t F) {
  switch (p.model) {
    case PopularityModel::Uniform:
      return Scenario::uniform_popularity(K, F);
    case PopularityModel::Zipf: {
      Eigen::RowVectorXd row(static_cast<Eigen::Index>(F));
      for (std::size_t f = 0; f < F; ++f) row(static_cast<Eigen::Index>(f)) = std::pow(double(f + 1), -p.exponent);
      row /= row.sum();
      return row.replicate(static_cast<Eigen::Index>(K), 1);
    }
    case PopularityModel::Explicit: {
      if (p.rows.size() != K) throw ValidationError("popularity.rows", "expected " + std::to_string(K) + " rows");
      Eigen::MatrixXd m(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(F));
      for (std::size_t k = 0; k < K; ++k) {
        if (p.rows[k].size() != F) {
          throw ValidationError("popularity.rows", "row " + std::to_string(k) + " needs " + std::to_string(F) + " entries");
        }
        for (std::size_t f = 0; f < F; ++f) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = p.rows[k][f];
      }
      return m;
    }
  }
  return {};
}

}  // namespace

std::vector<double> ValueSampler::expand(std::size_t n, std::uint64_t seed, const char* field) const {
  switch (kind) {
    case Kind::Constant:
      return std::vector<double>(n, constant);
    case Kind::List:
      if (values.size() != n) {
        throw ValidationError(field, "expected " + std::to_string(n) + " values, got " + std::to_string(values.size()));
      }
      return values;
    case Kind::Uniform: {
      Rng rng(seed);
      std::vector<double> out(n);
      for (auto& v : out) v = rng.uniform(lo, hi);
      return out;
    }
  }
  return {};
}

ScenarioConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config", "top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.count(key)) throw ValidationError(key, "unknown configuration key");
  }

  ScenarioConfig cfg;
  try {
    if (j.contains("K")) cfg.num_devices = count(j["K"], "K");
    if (j.contains("F")) cfg.num_tasks = count(j["F"], "F");
    if (j.contains("N_s")) cfg.num_samples = count(j["N_s"], "N_s");
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("I_bits")) cfg.input_bits = number(j["I_bits"], "I_bits");
    if (j.contains("O_bits")) cfg.output_bits = number(j["O_bits"], "O_bits");
    if (j.contains("C_bits")) cfg.cache_bits = number(j["C_bits"], "C_bits");
    if (j.contains("tau_s")) cfg.slot_seconds = number(j["tau_s"], "tau_s");
    if (j.contains("alpha")) cfg.energy_coeff = number(j["alpha"], "alpha");
    if (j.contains("w")) cfg.workload = sampler(j["w"], "w");
    if (j.contains("g")) cfg.cpu_freq = sampler(j["g"], "g");
    if (j.contains("E")) cfg.energy_budget = sampler(j["E"], "E");
    if (j.contains("snr_db")) cfg.snr_db = sampler(j["snr_db"], "snr_db");
    if (j.contains("fading")) {
      const auto fading = j["fading"].get<std::string>();
      if (fading == "rayleigh") {
        cfg.fading = Fading::Rayleigh;
      } else if (fading == "none") {
        cfg.fading = Fading::None;
      } else {
        throw ValidationError("fading", "expected \"rayleigh\" or \"none\"");
      }
    }
    if (j.contains("popularity")) cfg.popularity = popularity(j["popularity"]);
    if (j.contains("admm")) cfg.admm = admm_section(j["admm"]);
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
  if (cfg.num_samples == 0) throw ValidationError("N_s", "must be positive");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Scenario build_scenario(const ScenarioConfig& cfg, std::size_t replication) {
  Scenario s;
  s.num_devices = cfg.num_devices;
  s.num_tasks = cfg.num_tasks;
  s.input_bits = cfg.input_bits;
  s.output_bits = cfg.output_bits;
  s.cache_bits = cfg.cache_bits;
  s.slot_seconds = cfg.slot_seconds;
  s.energy_coeff = cfg.energy_coeff;

  const auto K = cfg.num_devices;
  const auto F = cfg.num_tasks;
  s.workload = cfg.workload.expand(F, derive_seed(cfg.seed, "workload", replication), "w");
  s.cpu_freq = cfg.cpu_freq.expand(K, derive_seed(cfg.seed, "cpu_freq", replication), "g");
  s.energy_budget = cfg.energy_budget.expand(K, derive_seed(cfg.seed, "energy", replication), "E");

  const auto snr_db = cfg.snr_db.expand(K, derive_seed(cfg.seed, "snr_db", replication), "snr_db");
  Rng fading(derive_seed(cfg.seed, "fading", replication));
  s.snr_linear.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double mean = std::pow(10.0, snr_db[k] / 10.0);
    // Rayleigh amplitude: |h|^2 ~ Exp(1), so the average SNR stays at `mean`.
    s.snr_linear[k] = cfg.fading == Fading::Rayleigh ? mean * fading.exponential() : mean;
  }

  if (K >= 1 && F >= 1) s.popularity = build_popularity(cfg.popularity, K, F);
  s.rng_seed = derive_seed(cfg.seed, "requests", replication);
  return validate_scenario(std::move(s));
}

SampleSet build_samples(const ScenarioConfig& cfg, const Scenario& s, std::size_t replication) {
  (void)replication;  // the scenario already carries the replication's request seed
  return sample_requests(s, cfg.num_samples, s.rng_seed);
}

std::string describe(const ScenarioConfig& cfg, const Scenario& s) {
  std::ostringstream os;
  os << "devices K=" << s.num_devices << ", tasks F=" << s.num_tasks << ", samples N_s=" << cfg.num_samples
     << ", seed=" << cfg.seed << "\n";
  os << "input I=" << s.input_bits << " bits, output O=" << s.output_bits << " bits, cache C=" << s.cache_bits
     << " bits, slot tau=" << s.slot_seconds << " s, alpha=" << s.energy_coeff << "\n";
  os << "fading: " << (cfg.fading == Fading::Rayleigh ? "rayleigh" : "none") << "\n";
  switch (cfg.popularity.model) {
    case PopularityModel::Uniform:
      os << "popularity: uniform (assumed marginal for identical independent requests)\n";
      break;
    case PopularityModel::Zipf:
      os << "popularity: zipf, exponent " << cfg.popularity.exponent << "\n";
      break;
    case PopularityModel::Explicit:
      os << "popularity: explicit rows\n";
      break;
  }
  for (std::size_t k = 0; k < s.num_devices; ++k) {
    os << "  device " << k << ": g=" << s.cpu_freq[k] << " Hz, E=" << s.energy_budget[k]
       << " J, snr=" << s.snr_linear[k] << " (" << spectral_efficiency(s, k) << " bit/s/Hz)\n";
  }
  return os.str();
}

}  // namespace codedmec
