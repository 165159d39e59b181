#include "doctest.h"
#include "reference.hpp"

#include "codedmec/config.hpp"
#include "codedmec/errors.hpp"
#include "codedmec/model.hpp"

#include <cmath>
#include <map>

using namespace codedmec;

TEST_CASE("scenario validation") {
  Scenario s = ref::flat_scenario(3, 4, 3e6);
  CHECK_NOTHROW(validate_scenario(s));

  Scenario bad_row = s;
  bad_row.popularity.row(1) *= 0.9;
  CHECK_THROWS_AS(validate_scenario(bad_row), ValidationError);

  Scenario tau0 = s;
  tau0.slot_seconds = 0.0;
  try {
    validate_scenario(tau0);
    FAIL("tau = 0 accepted");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "slot_seconds");
  }

  Scenario nearly = s;
  nearly.popularity(0, 0) += 5e-7;
  const Scenario fixed = validate_scenario(nearly);
  CHECK(std::abs(fixed.popularity.row(0).sum() - 1.0) < 1e-12);
}

TEST_CASE("state probability") {
  const Scenario s = ref::flat_scenario(3, 3, 0.0);
  CHECK(state_probability(s, RequestState{{0, 2, 1}}) == doctest::Approx(1.0 / 27.0));

  Scenario two = ref::flat_scenario(2, 2, 0.0);
  two.popularity << 0.2, 0.8, 0.5, 0.5;
  CHECK(state_probability(two, RequestState{{1, 0}}) == doctest::Approx(0.4));

  Scenario skew = ref::flat_scenario(3, 4, 0.0);
  skew.popularity << 0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.25, 0.25, 0.7, 0.1, 0.1, 0.1;
  double total = 0.0;
  for_each_state(3, 4, [&](const RequestState& q) { total += state_probability(skew, q); });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("request sampling") {
  Scenario one = ref::flat_scenario(4, 1, 0.0);
  for (const auto& q : sample_requests(one, 50, 3).states) {
    for (auto f : q.demand) CHECK(f == 0);
  }

  const Scenario s = ref::flat_scenario(2, 2, 0.0);
  const auto a = sample_requests(s, 100000, 42);
  CHECK(a == sample_requests(s, 100000, 42));
  std::map<std::pair<std::size_t, std::size_t>, int> freq;
  for (const auto& q : a.states) ++freq[{q.demand[0], q.demand[1]}];
  REQUIRE(freq.size() == 4);
  for (const auto& [state, n] : freq) CHECK(std::abs(n / 1e5 - 0.25) < 0.01);
}

TEST_CASE("spectral efficiency and compute time") {
  Scenario s = ref::flat_scenario(3, 2, 0.0);
  s.snr_linear = {1.0, std::pow(10.0, 1.5), 10.0};
  CHECK(spectral_efficiency(s, 0) == doctest::Approx(1.0));
  CHECK(std::abs(spectral_efficiency(s, 1) - 5.0279) < 1e-3);
  CHECK(std::abs(spectral_efficiency(s, 2) - 3.4594) < 1e-3);
  CHECK(channel_cost(s, 0) == doctest::Approx(1.0));

  CHECK(local_compute_time(s, 0, 0) == doctest::Approx(0.005));
  s.workload = {10.0, 0.0};
  s.cpu_freq[2] = 1.5e9;
  CHECK(local_compute_time(s, 2, 0) == doctest::Approx(0.02));
  CHECK(local_compute_time(s, 2, 1) == 0.0);
  // a window of exactly zero cannot carry the input
  CHECK_FALSE(deadline_feasible(s, 2, 0));
  CHECK(deadline_feasible(s, 0, 0));
  const auto clamped = apply_deadline_clamp(s, ComputeDecision(3, 2, true));
  CHECK_FALSE(clamped(2, 0));
  CHECK(clamped(2, 1));
  CHECK(clamped(0, 0));
}

TEST_CASE("expected energy") {
  Scenario s = ref::flat_scenario(1, 100, 0.0);
  ComputeDecision x(1, 100);
  CHECK(expected_energy(s, x, 0) == 0.0);
  x.set(0, 7, true);
  CHECK(expected_energy(s, x, 0) == doctest::Approx(1.35));
  CHECK(task_energy(s, 0, 7) == doctest::Approx(1.35));
  ComputeDecision all(1, 100, true);
  CHECK(expected_energy(s, all, 0) == doctest::Approx(135.0));
  CHECK(check_energy_feasible(s, all));
  s.energy_budget[0] = 134.0;
  CHECK_FALSE(check_energy_feasible(s, all));

  // linear over disjoint supports
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 100), b = a;
  a(0, 3) = 0.4;
  b(0, 9) = 0.7;
  CHECK(expected_energy(s, Eigen::MatrixXd(a + b), 0) ==
        doctest::Approx(expected_energy(s, a, 0) + expected_energy(s, b, 0)));
}

TEST_CASE("config round trip and substreams") {
  const auto cfg = parse_config(R"({"K": 4, "F": 5, "N_s": 30, "seed": 9, "C_bits": 1e6,
                                   "E": [10, 20, 30, 40], "admm": {"beta": 50}})");
  CHECK(cfg.num_devices == 4);
  CHECK(cfg.admm.beta == 50.0);
  const Scenario s = build_scenario(cfg, 0);
  CHECK(s.energy_budget[2] == 30.0);
  CHECK(build_samples(cfg, s, 0) == build_samples(cfg, build_scenario(cfg, 0), 0));
  CHECK_FALSE(build_scenario(cfg, 1).snr_linear == s.snr_linear);

  // changing g leaves channels and requests alone
  auto other = cfg;
  other.cpu_freq = ValueSampler::fixed(1e9);
  const Scenario s2 = build_scenario(other, 0);
  CHECK(s2.snr_linear == s.snr_linear);
  CHECK(build_samples(other, s2, 0) == build_samples(cfg, s, 0));

  CHECK_THROWS_AS(parse_config(R"({"K": 3, "bogus": 1})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"K": -3})"), ValidationError);
  CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
  CHECK_THROWS_AS(build_scenario(parse_config(R"({"K": 3, "E": [1, 2]})")), ValidationError);
}
