// Prints one PASS/FAIL line per acceptance criterion. Exits 0 once every
// check has run; --strict exits 1 when any line is FAIL.
#include "reference.hpp"

#include "codedmec/bandwidth.hpp"
#include "codedmec/coded_delivery.hpp"
#include "codedmec/config.hpp"
#include "codedmec/harness.hpp"
#include "codedmec/opt_compute.hpp"
#include "codedmec/qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace codedmec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// (t+1)-subsets of K devices meeting the first M, counted one bitmask at a time
Rational count_rate(std::size_t K, std::size_t t, std::size_t M) {
  if (t >= K) return Rational(0);
  const std::uint64_t first = (std::uint64_t{1} << M) - 1;
  std::int64_t hits = 0, placements = 0;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << K); ++v) {
    const auto bits = static_cast<std::size_t>(std::popcount(v));
    if (bits == t) ++placements;
    if (bits == t + 1 && (v & first)) ++hits;
  }
  return Rational(hits, placements);
}

void ac1() {
  const auto t0 = Clock::now();
  int cases = 0, bad = 0;
  for (std::size_t K = 1; K <= 8; ++K) {
    for (std::size_t t = 0; t <= K; ++t) {
      for (std::size_t M = 0; M <= K; ++M) {
        ++cases;
        if (coded_rate(K, t, M) != count_rate(K, t, M)) ++bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  report("AC1", bad == 0 && secs < 10.0, fmt("%d (K,t,M) cases, %d mismatches, %.3f s", cases, bad, secs));
}

void ac2() {
  const Scenario s = ref::flat_scenario(3, 3, 3e6);
  const auto cd = derive_t(std::vector<std::uint8_t>{1, 1, 1}, DataType::Input, s);
  ComputeDecision x(3, 3);
  x.set(1, 1, true);
  x.set(2, 2, true);
  const RequestState q{{0, 1, 2}};
  const Placement p = place(cd, s);
  const DeliverySchedule sched = delivery_schedule(s, cd, x, q);

  std::ostringstream placement, trace;
  write_placement(placement, p, DataType::Input, 3);
  write_schedule(trace, sched, 3);
  const std::string golden = CODEDMEC_GOLDEN_DIR;
  bool ok = cd.t == 1 && sched.coded.size() == 3 && sched.whole.size() == 1;
  ok = ok && placement.str() == slurp(golden + "/example1_placement.txt");
  ok = ok && trace.str() == slurp(golden + "/example1_schedule.txt");

  int decoded = 0;
  for (DeviceIndex k : {1u, 2u}) {
    try {
      const auto got = decode(k, q.demand[k], p, sched.coded);
      if (got.size() == 3 && std::all_of(got.begin(), got.end(), [&](auto& l) { return l.task == q.demand[k]; }))
        ++decoded;
    } catch (const std::exception&) {
    }
  }
  ok = ok && decoded == 2;
  report("AC2", ok, fmt("t=%zu, %zu coded + %zu whole, traces match golden: %s, devices decoded %d/2", cd.t,
                        sched.coded.size(), sched.whole.size(), ok ? "yes" : "no", decoded));
}

void ac3() {
  std::mt19937_64 rng(20261016);
  int draws = 0, fails = 0;
  while (draws < 2000) {
    const std::size_t K = 2 + rng() % 7;
    const std::size_t F = 1 + rng() % 5;
    const std::size_t t = 1 + rng() % K;
    Scenario s = ref::flat_scenario(K, F, 0.0);
    s.cache_bits = (1 + 1e-9) * static_cast<double>(t) * static_cast<double>(F) * s.input_bits / static_cast<double>(K);
    const auto cd = derive_t(std::vector<std::uint8_t>(F, 1), DataType::Input, s);
    const Placement p = place(cd, s);
    std::vector<ServedRequest> served;
    for (DeviceIndex k = 0; k < K; ++k) {
      if (rng() % 3) served.push_back({k, static_cast<TaskIndex>(rng() % F)});
    }
    const auto msgs = build_messages(cd, served, K);
    for (const auto& r : served) {
      ++draws;
      try {
        const auto got = decode(r.device, r.task, p, msgs);
        if (got.size() != p.subfiles_per_task) ++fails;
      } catch (const std::exception&) {
        ++fails;
      }
    }
  }
  report("AC3", fails == 0, fmt("%d served requests decoded, %d failures", draws, fails));
}

void ac4() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(44);
  Scenario s = ref::random_scenario(3, 3, 6e6, rng);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index f = 0; f < 3; ++f) s.popularity(k, f) = u(rng);
    s.popularity.row(k) /= s.popularity.row(k).sum();
  }
  s = validate_scenario(s);
  ComputeDecision x(3, 3);
  x.set(0, 0, true);
  x.set(1, 2, true);
  x = apply_deadline_clamp(s, x);
  double worst = 0.0;
  for (DataType d : {DataType::Input, DataType::Output}) {
    const auto cd = derive_t(std::vector<std::uint8_t>{1, 0, 1}, d, s);
    const std::vector<int> mask(cd.cached.begin(), cd.cached.end());
    const double exact = ref::expected_bandwidth(s, mask, d, cd.t, x);
    const double sampled = average_bandwidth(s, cd, x, sample_requests(s, 100000, 7));
    worst = std::max(worst, std::abs(sampled - exact) / exact);
  }
  const double secs = seconds_since(t0);
  report("AC4", worst <= 0.02 && secs < 60.0,
         fmt("worst relative gap %.4f%% over both data types, %.2f s", 100 * worst, secs));
}

void ac5(const ScenarioConfig& cfg) {
  const Scenario s = build_scenario(cfg);
  const SampleSet samples = build_samples(cfg, s);
  const P2Result r = solve_p2(s, samples, cfg.admm);
  const double binary = (r.relaxed.array() * (1.0 - r.relaxed.array())).sum();

  const std::size_t n = r.trace.size();
  const std::size_t from = n - n / 4;
  int rises = 0;
  for (std::size_t i = from + 1; i < n; ++i) {
    const auto& a = r.trace[i - 1];
    const auto& b = r.trace[i];
    if (b.primal_residual > a.primal_residual * (1 + 1e-9) + 1e-12) ++rises;
    if (b.dual_residual > a.dual_residual * (1 + 1e-9) + 1e-12) ++rises;
  }
  const bool feasible = check_energy_feasible(s, r.x);
  report("AC5", binary < 1e-3 && rises == 0 && feasible,
         fmt("sum x(1-x) = %.3g, residual increases over last %zu iterations: %d, x* energy feasible: %s, "
             "B = %.4g MHz",
             binary, n - from, rises, feasible ? "yes" : "no", r.bandwidth / 1e6));
}

void ac6() {
  std::mt19937_64 rng(66);
  SolverParams params;
  std::vector<double> gaps;
  int order_bad = 0;
  for (int i = 0; i < 20; ++i) {
    const Scenario s = ref::random_scenario(3, 4, 3e6 * static_cast<double>(rng() % 7), rng);
    const SampleSet samples = sample_requests(s, 100, rng());
    const auto bf = brute_force_joint(s, samples);
    const auto pipe = run_pipeline(s, samples, params);
    const double best_baseline =
        std::min({baseline_traditional(s, samples), baseline_local_coded_cache(s, samples).bandwidth,
                  pipe.p2.bandwidth, baseline_uncoded(s, samples, params, &pipe.p2).bandwidth});
    const double eps = 1e-9;
    if (bf.bandwidth > pipe.bandwidth * (1 + eps) || pipe.bandwidth > best_baseline * (1 + eps)) ++order_bad;
    gaps.push_back(bf.bandwidth > 0 ? (pipe.bandwidth - bf.bandwidth) / bf.bandwidth
                                    : (pipe.bandwidth > 0 ? 1.0 : 0.0));
  }
  std::sort(gaps.begin(), gaps.end());
  const double median = 0.5 * (gaps[9] + gaps[10]);
  report("AC6", order_bad == 0 && median <= 0.15,
         fmt("20 instances, ordering violations %d, median gap %.2f%%, max gap %.2f%%", order_bad, 100 * median,
             100 * gaps.back()));
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] * (1 + 1e-9)) return false;
  }
  return true;
}

std::string series(const std::vector<double>& v) {
  std::string out;
  for (double b : v) out += fmt("%s%.1f", out.empty() ? "" : " ", b / 1e6);
  return out;
}

void ac7(const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  const std::vector<double> c_points{0.0, 9e6, 18e6, 27e6, 36e6};
  const std::vector<double> g_points{2e9, 2.5e9, 3e9, 3.5e9, 4e9};
  const auto c_rows = run_sweep(cfg, SweepAxis::CacheBits, c_points, 10, {.timing = false});
  const auto g_rows = run_sweep(cfg, SweepAxis::CpuFreq, g_points, 10, {.timing = false});

  auto mean = [](const std::vector<SweepRow>& rows, std::span<const double> pts, const char* policy) {
    return sweep_means(rows, pts, policy);
  };
  const auto c_prop = mean(c_rows, c_points, "proposed");
  const auto g_prop = mean(g_rows, g_points, "proposed");
  std::vector<std::string> failed;
  if (!non_increasing(c_prop)) failed.push_back("proposed not non-increasing in C");
  if (!non_increasing(g_prop)) failed.push_back("proposed not non-increasing in g");
  for (const auto* which : {"C", "g"}) {
    const bool is_c = which[0] == 'C';
    const auto& rows = is_c ? c_rows : g_rows;
    const auto& pts = is_c ? c_points : g_points;
    const std::size_t mid = 2;
    const double prop = mean(rows, pts, "proposed")[mid];
    const double lcc = mean(rows, pts, "local_coded_cache")[mid];
    const double lc = mean(rows, pts, "local_computing")[mid];
    const double trad = mean(rows, pts, "traditional")[mid];
    if (!(prop < lcc)) failed.push_back(fmt("proposed >= local_coded_cache at mid %s", which));
    if (!(lc < trad)) failed.push_back(fmt("local_computing >= traditional at mid %s", which));
    if (is_c && !(prop < mean(rows, pts, "uncoded")[mid])) failed.push_back("proposed >= uncoded at mid C");
  }
  std::string why;
  for (const auto& f : failed) why += (why.empty() ? "" : "; ") + f;
  report("AC7", failed.empty(),
         fmt("proposed MHz over C {%s}, over g {%s}, %.1f s%s%s", series(c_prop).c_str(), series(g_prop).c_str(),
             seconds_since(t0), why.empty() ? "" : "; ", why.c_str()));
}

QpProblem random_qp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 2 + static_cast<int>(rng() % 9);
  const int rows = static_cast<int>(rng() % 5);
  QpProblem p;
  p.Q = ref::random_spd(n, 0.1, 10.0, rng);
  p.c = Eigen::VectorXd::NullaryExpr(n, [&] { return 5.0 * u(rng); });
  p.lower = Eigen::VectorXd::Constant(n, -1.0);
  p.upper = Eigen::VectorXd::Constant(n, 1.0);
  p.A = Eigen::MatrixXd::NullaryExpr(rows, n, [&] { return u(rng); });
  const Eigen::VectorXd inside = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 * u(rng); });
  p.b = p.A * inside + Eigen::VectorXd::NullaryExpr(rows, [&] { return 0.3 * (u(rng) + 1.0); });
  return p;
}

AdmmState random_state(const P2Data& data, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AdmmState st = initial_state(data, SolverParams{});
  auto fill = [&](Eigen::MatrixXd& m, double lo, double hi) {
    m = m.unaryExpr([&](double) { return lo + (hi - lo) * u(rng); });
  };
  fill(st.x, 0.0, 1.0);
  for (auto& y : st.y) fill(y, 0.0, 1.0);
  for (auto& l : st.lambda) fill(l, -0.2, 0.2);
  for (auto* p : {&st.pi, &st.pi_hat, &st.z}) {
    const double lo = p == &st.z ? -0.1 : 0.0;
    fill(p->out_rate, lo, 1.5);
    fill(p->in_rate, lo, 1.5);
    fill(p->out_channel, lo, 0.5);
    fill(p->in_channel, lo, 0.5);
  }
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

void ac8() {
  std::mt19937_64 rng(88);
  double qp_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const QpProblem p = random_qp(rng);
    qp_worst = std::max(qp_worst, (qp_solve(p).x - ref::qp_dual_gradient(p)).cwiseAbs().maxCoeff());
  }

  double grad_worst = 0.0;
  int checked = 0;
  auto check = [&](double analytic, double numeric) {
    grad_worst = std::max(grad_worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));
    ++checked;
  };
  for (int trial = 0; trial < 4; ++trial) {
    const Scenario s = ref::random_scenario(3, 4, 0.0, rng);
    const P2Data data = make_p2_data(s, sample_requests(s, 12, rng()));
    AdmmState st = random_state(data, rng);
    const AdmmGradient g = lagrangian_gradient(st, data);
    for (Eigen::Index k = 0; k < st.x.rows(); ++k) {
      for (Eigen::Index f = 0; f < st.x.cols(); ++f) {
        check(g.x(k, f), central(st, data, st.x(k, f)));
        for (std::size_t n = 0; n < st.y.size(); n += 5) check(g.y[n](k, f), central(st, data, st.y[n](k, f)));
      }
    }
    for (Eigen::Index f = 0; f < st.pi.out_rate.rows(); ++f) {
      for (Eigen::Index n = 0; n < st.pi.out_rate.cols(); n += 3) {
        for (auto block : {&PiBlock::out_rate, &PiBlock::in_rate, &PiBlock::out_channel, &PiBlock::in_channel}) {
          check((g.pi.*block)(f, n), central(st, data, (st.pi.*block)(f, n)));
          check((g.pi_hat.*block)(f, n), central(st, data, (st.pi_hat.*block)(f, n)));
        }
      }
    }
  }
  report("AC8", qp_worst <= 1e-6 && grad_worst <= 1e-5,
         fmt("100 QPs, worst |x - reference| %.2e; %d gradient entries, worst relative error %.2e", qp_worst, checked,
             grad_worst));
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const ScenarioConfig desk = load_config(std::string(CODEDMEC_CONFIG_DIR) + "/desk.json");
  ac1();
  ac2();
  ac3();
  ac4();
  ac5(desk);
  ac6();
  ac7(desk);
  ac8();
  std::printf("%d of 8 criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}
