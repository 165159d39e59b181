#include "doctest.h"
#include "reference.hpp"

#include "codedmec/bandwidth.hpp"
#include "codedmec/config.hpp"
#include "codedmec/errors.hpp"
#include "codedmec/opt_compute.hpp"

#include <random>

using namespace codedmec;

namespace {

struct Fixture {
  Scenario s;
  SampleSet samples;
  P2Data data;
};

Fixture fixture(std::uint64_t seed, std::size_t K = 3, std::size_t F = 4, std::size_t N = 30) {
  std::mt19937_64 rng(seed);
  Fixture fx;
  fx.s = ref::random_scenario(K, F, 0.0, rng);
  fx.samples = sample_requests(fx.s, N, rng());
  fx.data = make_p2_data(fx.s, fx.samples);
  return fx;
}

// A state away from the start: random primal and dual values everywhere.
AdmmState random_state(const P2Data& data, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AdmmState st = initial_state(data, SolverParams{});
  auto fill = [&](Eigen::MatrixXd& m, double lo, double hi) {
    m = m.unaryExpr([&](double) { return lo + (hi - lo) * u(rng); });
  };
  fill(st.x, 0.0, 1.0);
  for (Eigen::Index k = 0; k < st.x.rows(); ++k) {
    std::vector<std::uint8_t> free(static_cast<std::size_t>(st.x.cols()));
    for (Eigen::Index f = 0; f < st.x.cols(); ++f) free[static_cast<std::size_t>(f)] = data.free(k, f);
    st.x.row(k) = solve_device_step(st.x.row(k).transpose(), data.energy.row(k).transpose(),
                                    data.budget[static_cast<std::size_t>(k)], free)
                      .transpose();
  }
  for (auto& y : st.y) fill(y, 0.0, 1.0);
  for (auto& l : st.lambda) fill(l, -0.2, 0.2);
  for (auto* p : {&st.pi, &st.pi_hat}) {
    fill(p->out_rate, 0.0, 1.5);
    fill(p->in_rate, 0.0, 1.5);
    fill(p->out_channel, 0.0, 0.5);
    fill(p->in_channel, 0.0, 0.5);
  }
  fill(st.z.out_rate, -0.1, 0.1);
  fill(st.z.in_rate, -0.1, 0.1);
  fill(st.z.out_channel, -0.1, 0.1);
  fill(st.z.in_channel, -0.1, 0.1);
  return st;
}

double central(AdmmState& st, const P2Data& data, double& slot) {
  const double h = 1e-6 * std::max(1.0, std::abs(slot));
  const double keep = slot;
  slot = keep + h;
  const double up = lagrangian_value(st, data);
  slot = keep - h;
  const double down = lagrangian_value(st, data);
  slot = keep;
  return (up - down) / (2 * h);
}

void check_close(double analytic, double numeric) {
  const double scale = std::max(1.0, std::abs(analytic));
  CHECK(std::abs(analytic - numeric) / scale < 1e-5);
}

}  // namespace

TEST_CASE("objective equals the bandwidth with no cache") {
  const Fixture fx = fixture(1);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    ComputeDecision x(fx.s.num_devices, fx.s.num_tasks);
    for (DeviceIndex k = 0; k < fx.s.num_devices; ++k) {
      for (TaskIndex f = 0; f < fx.s.num_tasks; ++f) {
        if (rng() % 2 && deadline_feasible(fx.s, k, f)) x.set(k, f, true);
      }
    }
    CHECK(p2_objective(fx.data, x) ==
          doctest::Approx(average_bandwidth(fx.s, no_cache(fx.s), x, fx.samples)).epsilon(1e-12));
  }
}

TEST_CASE("lagrangian gradient against central differences") {
  const Fixture fx = fixture(3);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    AdmmState st = random_state(fx.data, rng);
    const AdmmGradient g = lagrangian_gradient(st, fx.data);
    for (Eigen::Index k = 0; k < st.x.rows(); ++k) {
      for (Eigen::Index f = 0; f < st.x.cols(); ++f) {
        check_close(g.x(k, f), central(st, fx.data, st.x(k, f)));
        check_close(g.y[3](k, f), central(st, fx.data, st.y[3](k, f)));
      }
    }
    for (Eigen::Index f = 0; f < st.pi.out_rate.rows(); ++f) {
      for (Eigen::Index n : {0, 7, 29}) {
        check_close(g.pi.out_rate(f, n), central(st, fx.data, st.pi.out_rate(f, n)));
        check_close(g.pi.in_rate(f, n), central(st, fx.data, st.pi.in_rate(f, n)));
        check_close(g.pi.out_channel(f, n), central(st, fx.data, st.pi.out_channel(f, n)));
        check_close(g.pi.in_channel(f, n), central(st, fx.data, st.pi.in_channel(f, n)));
        check_close(g.pi_hat.out_rate(f, n), central(st, fx.data, st.pi_hat.out_rate(f, n)));
        check_close(g.pi_hat.in_channel(f, n), central(st, fx.data, st.pi_hat.in_channel(f, n)));
      }
    }
  }
}

TEST_CASE("device step is the projection onto box and budget") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const int F = 2 + static_cast<int>(rng() % 6);
    const Eigen::VectorXd center = Eigen::VectorXd::NullaryExpr(F, [&] { return 2.0 * u(rng) - 0.5; });
    const Eigen::VectorXd energy = Eigen::VectorXd::NullaryExpr(F, [&] { return 0.1 + 5.0 * u(rng); });
    const double budget = 4.0 * u(rng);
    std::vector<std::uint8_t> free(static_cast<std::size_t>(F), 1);
    free[0] = rng() % 4 ? 1 : 0;

    QpProblem p;
    p.Q = Eigen::MatrixXd::Identity(F, F);
    p.c = -center;
    p.lower = Eigen::VectorXd::Zero(F);
    p.upper = Eigen::VectorXd::Ones(F);
    if (!free[0]) p.upper(0) = 0.0;
    p.A = energy.transpose();
    p.b = Eigen::VectorXd::Constant(1, budget);

    const Eigen::VectorXd got = solve_device_step(center, energy, budget, free);
    CHECK((got - ref::qp_dual_gradient(p)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(energy.dot(got) <= budget * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("copy step solves each subproblem") {
  const Fixture fx = fixture(6);
  std::mt19937_64 rng(7);
  AdmmState st = random_state(fx.data, rng);
  std::vector<std::vector<Eigen::VectorXd>> want(fx.data.num_samples);
  std::vector<std::vector<std::vector<DeviceIndex>>> members(fx.data.num_samples);
  for (std::size_t n = 0; n < fx.data.num_samples; ++n) {
    for (TaskIndex f = 0; f < fx.data.num_tasks; ++f) {
      std::vector<DeviceIndex> m;
      const QpProblem p = copy_subproblem(st, fx.data, f, n, &m);
      want[n].push_back(ref::qp_dual_gradient(p));
      members[n].push_back(m);
    }
  }
  SolverParams params;
  update_copies_serial(st, fx.data, params);
  for (std::size_t n = 0; n < fx.data.num_samples; ++n) {
    for (TaskIndex f = 0; f < fx.data.num_tasks; ++f) {
      const auto& sol = want[n][f];
      const auto m = static_cast<Eigen::Index>(members[n][f].size());
      const auto row = static_cast<Eigen::Index>(f);
      const auto col = static_cast<Eigen::Index>(n);
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto k = static_cast<Eigen::Index>(members[n][f][static_cast<std::size_t>(j)]);
        CHECK(st.y[n](k, row) == doctest::Approx(sol(j)).epsilon(1e-6));
      }
      CHECK(st.pi_hat.out_rate(row, col) == doctest::Approx(sol(m)).epsilon(1e-6));
      CHECK(st.pi_hat.in_rate(row, col) == doctest::Approx(sol(m + 1)).epsilon(1e-6));
      CHECK(st.pi_hat.out_channel(row, col) == doctest::Approx(sol(m + 2)).epsilon(1e-6));
      CHECK(st.pi_hat.in_channel(row, col) == doctest::Approx(sol(m + 3)).epsilon(1e-6));
    }
  }
}

TEST_CASE("parallel copy step equals the serial one") {
  const Fixture fx = fixture(8, 4, 5, 60);
  std::mt19937_64 rng(9);
  AdmmState a = random_state(fx.data, rng);
  AdmmState b = a;
  update_copies(a, fx.data, SolverParams{});
  update_copies_serial(b, fx.data, SolverParams{});
  for (std::size_t n = 0; n < a.y.size(); ++n) CHECK(a.y[n] == b.y[n]);
  CHECK(a.pi_hat.out_rate == b.pi_hat.out_rate);
  CHECK(a.pi_hat.in_channel == b.pi_hat.in_channel);
}

TEST_CASE("global step never increases the surrogate") {
  const Fixture fx = fixture(10);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    AdmmState st = random_state(fx.data, rng);
    const double before = lagrangian_value(st, fx.data);
    const CccpReport rep = update_globals(st, fx.data, SolverParams{});
    CHECK(rep.monotone);
    CHECK(rep.surrogate.back() <= before + 1e-9 * std::max(1.0, std::abs(before)));
    for (DeviceIndex k = 0; k < fx.s.num_devices; ++k) {
      CHECK(expected_energy(fx.s, st.x, k) <= fx.s.energy_budget[k] * (1 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("no energy means no local computing") {
  std::mt19937_64 rng(12);
  Scenario s = ref::random_scenario(3, 4, 0.0, rng);
  for (auto& e : s.energy_budget) e = 0.0;
  const SampleSet samples = sample_requests(s, 40, 1);
  SolverParams params;
  params.min_iterations = 5;
  const P2Result r = solve_p2(s, samples, params);
  CHECK(r.x.count() == 0);
  CHECK(r.bandwidth == doctest::Approx(average_bandwidth(s, no_cache(s), r.x, samples)));
}

TEST_CASE("solver output is feasible, never above x = 0, and deterministic") {
  SolverParams params;
  params.min_iterations = 30;
  params.max_iterations = 40;
  for (std::uint64_t seed : {13, 14, 15, 16}) {
    const Fixture fx = fixture(seed, 3, 4, 60);
    const P2Result a = solve_p2(fx.s, fx.samples, params);
    CHECK(check_energy_feasible(fx.s, a.x));
    for (DeviceIndex k = 0; k < fx.s.num_devices; ++k) {
      for (TaskIndex f = 0; f < fx.s.num_tasks; ++f) {
        if (a.x(k, f)) CHECK(deadline_feasible(fx.s, k, f));
      }
    }
    const ComputeDecision zero(fx.s.num_devices, fx.s.num_tasks);
    CHECK(a.bandwidth <= p2_objective(fx.data, zero));
    CHECK(a.bandwidth == doctest::Approx(p2_objective(fx.data, a.x)));
    CHECK(static_cast<int>(a.trace.size()) == a.iterations);

    const P2Result b = solve_p2(fx.s, fx.samples, params);
    CHECK(a.x == b.x);
    CHECK(a.bandwidth == b.bandwidth);
    CHECK(a.relaxed == b.relaxed);
  }
}

TEST_CASE("starting points are budget feasible") {
  for (std::uint64_t seed : {21, 22, 23}) {
    const Fixture fx = fixture(seed);
    for (InitMode mode : {InitMode::Linearized, InitMode::Half}) {
      SolverParams params;
      params.init = mode;
      const AdmmState st = initial_state(fx.data, params);
      for (DeviceIndex k = 0; k < fx.s.num_devices; ++k) {
        CHECK(expected_energy(fx.s, st.x, k) <= fx.s.energy_budget[k] * (1 + 1e-9) + 1e-12);
        for (TaskIndex f = 0; f < fx.s.num_tasks; ++f) {
          const double v = st.x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          if (!fx.data.free(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f))) CHECK(v == 0.0);
        }
      }
    }
  }
}

TEST_CASE("rounding repairs the budget") {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 20; ++i) {
    const Scenario s = ref::random_scenario(4, 5, 0.0, rng);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 5);
    const ComputeDecision x = round_and_repair(ones, s);
    CHECK(check_energy_feasible(s, x));
    CHECK(round_and_repair(Eigen::MatrixXd::Constant(4, 5, 0.49), s).count() == 0);
  }
}

TEST_CASE("parameter checks") {
  SolverParams p;
  p.rounding_threshold = 1.0;
  CHECK_THROWS_AS(validate_solver_params(p), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"admm": {"init": "random"}})"), ValidationError);
  CHECK(parse_config(R"({"admm": {"init": "half"}})").admm.init == InitMode::Half);
}
