// tools/codedmec.cpp
//
//   codedmec validate <config>
//   codedmec evaluate <config> [--cache c.json] [--compute x.json] [--breakdown out.csv]
//   codedmec optimize <config> [--trace trace.csv] [--exhaustive-prefix] [--out result.json]
//   codedmec oracle <config>
//   codedmec sweep <config> --axis cache_bits --points 0,3e6,6e6 --reps 10 [--out sweep.csv] [--no-timing]
//
// Exit codes: 0 ok, 2 invalid input, 3 instance too large for an exhaustive
// routine, 1 anything else.
#include "codedmec/bandwidth.hpp"
#include "codedmec/config.hpp"
#include "codedmec/errors.hpp"
#include "codedmec/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace codedmec;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("malformed JSON: ") + e.what());
  }
}

DataType parse_type(const json& j, const std::string& field) {
  const auto v = j.get<std::string>();
  if (v == "input") return DataType::Input;
  if (v == "output") return DataType::Output;
  throw ValidationError(field, "expected \"input\" or \"output\"");
}

std::string type_name(DataType d) { return d == DataType::Input ? "input" : "output"; }

// {"type": "input", "cached": [0, 1, 0, ...]}
CacheDecision load_cache(const std::string& path, const Scenario& s) {
  const json j = read_json(path);
  try {
    const DataType d = parse_type(j.at("type"), "cache.type");
    const auto c = j.at("cached").get<std::vector<int>>();
    if (c.size() != s.num_tasks) throw ValidationError("cache.cached", "needs one entry per task");
    std::vector<std::uint8_t> bits;
    for (int v : c) {
      if (v != 0 && v != 1) throw ValidationError("cache.cached", "entries must be 0 or 1");
      bits.push_back(static_cast<std::uint8_t>(v));
    }
    return derive_t(bits, d, s);
  } catch (const json::exception& e) {
    throw ValidationError("cache", e.what());
  }
}

// {"x": [[0, 1, ...], ...]}  K rows of F entries
ComputeDecision load_compute(const std::string& path, const Scenario& s) {
  const json j = read_json(path);
  try {
    const auto rows = j.at("x").get<std::vector<std::vector<int>>>();
    if (rows.size() != s.num_devices) throw ValidationError("x", "needs one row per device");
    ComputeDecision x(s.num_devices, s.num_tasks);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != s.num_tasks) throw ValidationError("x", "row " + std::to_string(k) + " needs F entries");
      for (std::size_t f = 0; f < rows[k].size(); ++f) {
        if (rows[k][f] != 0 && rows[k][f] != 1) throw ValidationError("x", "entries must be 0 or 1");
        x.set(k, f, rows[k][f] == 1);
      }
    }
    return x;
  } catch (const json::exception& e) {
    throw ValidationError("x", e.what());
  }
}

json to_json(const ComputeDecision& x) {
  json rows = json::array();
  for (std::size_t k = 0; k < x.num_devices(); ++k) {
    json row = json::array();
    for (std::size_t f = 0; f < x.num_tasks(); ++f) row.push_back(x(k, f) ? 1 : 0);
    rows.push_back(row);
  }
  return rows;
}

json to_json(const CacheDecision& cd) {
  json c = json::array();
  for (auto v : cd.cached) c.push_back(int(v));
  return {{"type", type_name(cd.type)}, {"cached", c}, {"t", cd.t}, {"num_cached", cd.num_cached}};
}

json to_json(const CacheSearchResult& r) {
  json log = json::array();
  for (const auto& step : r.log) {
    json row = {{"num", step.num}, {"t", step.t}, {"evaluated", step.evaluated}};
    row["bandwidth_hz"] = step.evaluated ? json(step.bandwidth) : json(nullptr);
    log.push_back(row);
  }
  return {{"order", r.order}, {"bandwidth_hz", r.bandwidth}, {"cache", to_json(r.cache)}, {"log", log}};
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write " + out);
  os << j.dump(2) << "\n";
}

struct Loaded {
  ScenarioConfig cfg;
  Scenario s;
  SampleSet samples;
};

Loaded load(const std::string& path, std::size_t replication) {
  Loaded l;
  l.cfg = load_config(path);
  l.s = build_scenario(l.cfg, replication);
  l.samples = build_samples(l.cfg, l.s, replication);
  return l;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded caching with device computing: bandwidth evaluation and optimization"};
  app.require_subcommand(1);

  std::string config;
  std::size_t replication = 0;

  auto* validate = app.add_subcommand("validate", "Check a config and print the scenario it builds");
  validate->add_option("config", config, "Scenario config (JSON)")->required();
  validate->add_option("--replication", replication, "Replication index");

  std::string cache_path, compute_path, breakdown_path;
  auto* evaluate = app.add_subcommand("evaluate", "Average bandwidth of a given cache and compute decision");
  evaluate->add_option("config", config, "Scenario config (JSON)")->required();
  evaluate->add_option("--cache", cache_path, "Cache decision JSON (default: no cache)");
  evaluate->add_option("--compute", compute_path, "Compute decision JSON (default: all at the server)");
  evaluate->add_option("--breakdown", breakdown_path, "Write per-sample case breakdown CSV");
  evaluate->add_option("--replication", replication, "Replication index");

  std::string trace_path, out_path;
  bool exhaustive_prefix = false;
  auto* optimize = app.add_subcommand("optimize", "Compute decision by ADMM, then the cache search");
  optimize->add_option("config", config, "Scenario config (JSON)")->required();
  optimize->add_option("--trace", trace_path, "Write the ADMM trace CSV");
  optimize->add_flag("--exhaustive-prefix", exhaustive_prefix, "Evaluate every cache prefix");
  optimize->add_option("--out", out_path, "Write the result JSON here instead of stdout");
  optimize->add_option("--replication", replication, "Replication index");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive joint optimum for tiny instances");
  oracle->add_option("config", config, "Scenario config (JSON)")->required();
  oracle->add_option("--out", out_path, "Write the result JSON here instead of stdout");
  oracle->add_option("--replication", replication, "Replication index");

  std::string axis;
  std::vector<double> points;
  std::size_t reps = 1;
  bool no_timing = false;
  auto* sweep = app.add_subcommand("sweep", "Evaluate every policy along one parameter axis");
  sweep->add_option("config", config, "Scenario config (JSON)")->required();
  sweep->add_option("--axis", axis, "cache_bits, cpu_freq or num_devices")->required();
  sweep->add_option("--points", points, "Axis values")->required()->delimiter(',');
  sweep->add_option("--reps", reps, "Replications per point")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "CSV path (default stdout)");
  sweep->add_flag("--no-timing", no_timing, "Write 0 wall times for byte-identical reruns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const auto l = load(config, replication);
      std::cout << describe(l.cfg, l.s);
      std::cout << "ok\n";
      return 0;
    }

    if (*evaluate) {
      const auto l = load(config, replication);
      const CacheDecision cd = cache_path.empty() ? no_cache(l.s) : load_cache(cache_path, l.s);
      const ComputeDecision x =
          compute_path.empty() ? ComputeDecision(l.s.num_devices, l.s.num_tasks) : load_compute(compute_path, l.s);
      const double b = average_bandwidth(l.s, cd, x, l.samples);
      json report = {{"bandwidth_hz", b},
                     {"cache", to_json(cd)},
                     {"energy_feasible", check_energy_feasible(l.s, x)},
                     {"samples", l.samples.size()}};
      if (!breakdown_path.empty()) {
        std::ofstream os(breakdown_path);
        if (!os) throw std::runtime_error("cannot write " + breakdown_path);
        write_breakdown_csv(os, l.s, cd, x, l.samples);
      }
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    if (*optimize) {
      const auto l = load(config, replication);
      PipelineOptions opts;
      opts.cache.exhaustive_prefix = exhaustive_prefix;
      const auto r = run_pipeline(l.s, l.samples, l.cfg.admm, opts);
      if (!trace_path.empty()) {
        std::ofstream os(trace_path);
        if (!os) throw std::runtime_error("cannot write " + trace_path);
        write_trace_csv(os, r.p2.trace);
      }
      json j = {{"bandwidth_hz", r.bandwidth},
                {"cache", to_json(r.cache)},
                {"x", to_json(r.x)},
                {"compute_source", r.zero_compute ? "all_server" : "admm"},
                {"traditional_hz", baseline_traditional(l.s, l.samples)},
                {"admm",
                 {{"bandwidth_hz", r.p2.bandwidth},
                  {"iterations", r.p2.iterations},
                  {"converged", r.p2.converged},
                  {"best_iteration", r.p2.best_iteration},
                  {"x", to_json(r.p2.x)}}},
                {"search", {{"input", to_json(r.plan.input)}, {"output", to_json(r.plan.output)}}}};
      emit(j, out_path);
      return 0;
    }

    if (*oracle) {
      const auto l = load(config, replication);
      const auto r = brute_force_joint(l.s, l.samples);
      json j = {{"bandwidth_hz", r.bandwidth},
                {"cache", to_json(r.cache)},
                {"x", to_json(r.x)},
                {"feasible_x", r.feasible_x},
                {"cache_options", r.cache_options}};
      emit(j, out_path);
      return 0;
    }

    if (*sweep) {
      const auto cfg = load_config(config);
      const SweepAxis a = parse_axis(axis);
      SweepOptions opts;
      opts.timing = !no_timing;
      const auto rows = run_sweep(cfg, a, points, reps, opts);
      if (out_path.empty()) {
        write_sweep_csv(std::cout, rows);
      } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot write " + out_path);
        write_sweep_csv(os, rows);
        json meta = {{"config", config},
                     {"axis", axis_name(a)},
                     {"points", points},
                     {"replications", reps},
                     {"seed", cfg.seed},
                     {"policies", sweep_policies()},
                     {"uncoded_placement", "same most-requested whole files at every device"}};
        std::ofstream ms(out_path + ".meta.json");
        ms << meta.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const SizeGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DeadlineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
