#include "doctest.h"
#include "reference.hpp"

#include "codedmec/coded_delivery.hpp"
#include "codedmec/errors.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <random>
#include <sstream>

using namespace codedmec;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> mask(std::initializer_list<int> bits) { return {bits.begin(), bits.end()}; }

}  // namespace

TEST_CASE("binomial") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(6, 0) == 1);
  CHECK(binomial(3, 4) == 0);
  CHECK(binomial(60, 30) == 118264581564861424LL);
  CHECK_THROWS_AS(binomial(70, 35), std::overflow_error);
}

TEST_CASE("coded rate against subset counting") {
  for (std::size_t K = 1; K <= 8; ++K) {
    for (std::size_t t = 0; t <= K; ++t) {
      for (std::size_t M = 0; M <= K; ++M) {
        const Rational r = coded_rate(K, t, M);
        CHECK(r == coded_rate_oracle(K, t, M));
        CHECK(boost::rational_cast<double>(r) == doctest::Approx(ref::coded_load(K, t, M)));
      }
    }
  }
  // everybody served: (K - t) / (t + 1)
  CHECK(coded_rate(6, 2, 6) == Rational(4, 3));
  CHECK(coded_rate(4, 4, 3) == Rational(0));
  CHECK(coded_rate(5, 1, 0) == Rational(0));
}

TEST_CASE("placement parameter") {
  const Scenario s = ref::flat_scenario(3, 3, 3e6);
  const auto one = derive_t(mask({1, 1, 1}), DataType::Input, s);
  CHECK(one.t == 1);
  CHECK(one.num_cached == 3);
  CHECK(one.item_bits == 3e6);

  // output files are twice as large: floor(3 * 3e6 / (3 * 6e6)) = 0
  const auto none = derive_t(mask({1, 1, 1}), DataType::Output, s);
  CHECK(none.t == 0);
  CHECK(none.num_cached == 0);
  CHECK(std::count(none.cached.begin(), none.cached.end(), 1) == 0);

  const auto two = derive_t(mask({1, 0, 1}), DataType::Input, s);
  CHECK(two.t == 1);
  const auto single = derive_t(mask({0, 1, 0}), DataType::Input, s);
  CHECK(single.t == 3);

  const Scenario big = ref::flat_scenario(3, 3, 1e9);
  CHECK(derive_t(mask({1, 1, 1}), DataType::Output, big).t == 3);
  CHECK(placement_parameter(big, DataType::Output, 0) == 0);
  CHECK(placement_parameter(s, DataType::Input, 2) == 1);

  const Scenario empty = ref::flat_scenario(3, 3, 0.0);
  CHECK(derive_t(mask({1, 1, 1}), DataType::Input, empty).t == 0);
}

TEST_CASE("placement respects the cache size") {
  for (std::size_t K = 2; K <= 6; ++K) {
    for (double C : {3e6, 7e6, 2e7}) {
      const Scenario s = ref::flat_scenario(K, 4, C);
      const auto cd = derive_t(mask({1, 1, 0, 1}), DataType::Input, s);
      if (cd.t == 0) continue;
      const Placement p = place(cd, s);
      CHECK(p.subfiles_per_task == static_cast<std::size_t>(binomial(K, cd.t)));
      for (DeviceIndex k = 0; k < K; ++k) {
        CHECK(p.device_cache[k].size() == 3 * static_cast<std::size_t>(binomial(K - 1, cd.t - 1)));
        CHECK(p.device_bits(k) <= C * (1 + 1e-12));
        for (const auto& label : p.device_cache[k]) {
          CHECK(std::popcount(label.subset) == static_cast<int>(cd.t));
          CHECK(((label.subset >> k) & 1u) == 1u);
          CHECK(label.task != 2);
        }
      }
    }
  }
}

TEST_CASE("example with three devices") {
  const Scenario s = ref::flat_scenario(3, 3, 3e6);
  const auto cd = derive_t(mask({1, 1, 1}), DataType::Input, s);
  REQUIRE(cd.t == 1);
  ComputeDecision x(3, 3);
  x.set(1, 1, true);
  x.set(2, 2, true);
  const RequestState q{{0, 1, 2}};

  const Placement p = place(cd, s);
  std::ostringstream placement;
  write_placement(placement, p, DataType::Input, 3);
  CHECK(placement.str() == slurp(std::string(CODEDMEC_GOLDEN_DIR) + "/example1_placement.txt"));

  const DeliverySchedule sched = delivery_schedule(s, cd, x, q);
  std::ostringstream trace;
  write_schedule(trace, sched, 3);
  CHECK(trace.str() == slurp(std::string(CODEDMEC_GOLDEN_DIR) + "/example1_schedule.txt"));

  for (DeviceIndex k : {1u, 2u}) {
    const auto got = decode(k, q.demand[k], p, sched.coded);
    REQUIRE(got.size() == 3);
    for (const auto& label : got) CHECK(label.task == q.demand[k]);
  }
}

TEST_CASE("served requests follow the data type") {
  const Scenario s = ref::flat_scenario(4, 3, 6e6);
  ComputeDecision x(4, 3);
  x.set(0, 0, true);
  x.set(2, 1, true);
  const RequestState q{{0, 0, 1, 2}};

  const auto in = derive_t(mask({1, 1, 0}), DataType::Input, s);
  const auto served_in = served_requests(in, x, q);
  REQUIRE(served_in.size() == 2);
  CHECK(served_in[0].device == 0);
  CHECK(served_in[1].device == 2);

  const auto out = derive_t(mask({1, 1, 0}), DataType::Output, s);
  REQUIRE(out.t > 0);
  const auto served_out = served_requests(out, x, q);
  REQUIRE(served_out.size() == 1);
  CHECK(served_out[0].device == 1);
  CHECK(count_served(out, x, q) == 1);
}

TEST_CASE("random delivery always decodes") {
  std::mt19937_64 rng(5);
  int draws = 0;
  for (int i = 0; i < 400; ++i) {
    const std::size_t K = 1 + rng() % 6;
    const std::size_t F = 1 + rng() % 5;
    const std::size_t t = 1 + rng() % K;
    Scenario s = ref::flat_scenario(K, F, 0.0);
    // cache every task with exactly this t
    s.cache_bits = (1 + 1e-9) * static_cast<double>(t) * static_cast<double>(F) * s.input_bits / static_cast<double>(K);
    const auto cd = derive_t(std::vector<std::uint8_t>(F, 1), DataType::Input, s);
    REQUIRE(cd.t == t);
    const Placement p = place(cd, s);

    std::vector<ServedRequest> served;
    for (DeviceIndex k = 0; k < K; ++k) {
      if (rng() % 3 != 0) served.push_back({k, static_cast<TaskIndex>(rng() % F)});
    }
    const auto msgs = build_messages(cd, served, K);
    const auto expected = binomial(K, t + 1) - binomial(K - served.size(), t + 1);
    CHECK(static_cast<std::int64_t>(msgs.size()) == expected);
    double bits = 0.0;
    for (const auto& m : msgs) bits += m.bits;
    CHECK(bits == doctest::Approx(ref::coded_load(K, t, served.size()) * s.input_bits));

    for (const auto& r : served) {
      const auto got = decode(r.device, r.task, p, msgs);
      CHECK(got.size() == p.subfiles_per_task);
    }
    ++draws;
  }
  CHECK(draws == 400);
}

TEST_CASE("decode fails without the messages") {
  const Scenario s = ref::flat_scenario(3, 3, 3e6);
  const auto cd = derive_t(mask({1, 1, 1}), DataType::Input, s);
  const Placement p = place(cd, s);
  const std::vector<ServedRequest> served{{0, 1}, {1, 2}};
  auto msgs = build_messages(cd, served, 3);
  REQUIRE(!msgs.empty());
  msgs.pop_back();
  bool failed = false;
  for (const auto& r : served) {
    try {
      decode(r.device, r.task, p, msgs);
    } catch (const DecodeError&) {
      failed = true;
    }
  }
  CHECK(failed);
}

TEST_CASE("labels") {
  CHECK(format_label({1, 0b100}, DataType::Input, 3) == "I(B_3)");
  CHECK(format_label({0, 0b011}, DataType::Output, 3) == "O(A_{1,2})");
  CHECK(format_label({27, 0b1}, DataType::Input, 40) == "I(T28_1)");
}
