// src/opt_compute.cpp
#include "codedmec/opt_compute.hpp"

#include "codedmec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace codedmec {

namespace {

double energy_slack(double budget) { return 1e-12 * std::max(1.0, budget); }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }


double sum_x_one_minus_x(const Eigen::MatrixXd& x) { return (x.array() * (1.0 - x.array())).sum(); }

}  // namespace

void validate_solver_params(const SolverParams& p) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("admm." + what); };
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) fail("beta must be a finite non-negative number");
  if (p.rho) {
    for (double r : *p.rho) {
      if (!(r > 0.0) || !std::isfinite(r)) fail("rho entries must be positive");
    }
  }
  if (!(p.tolerance > 0.0)) fail("tolerance must be positive");
  if (p.min_iterations < 0) fail("min_iterations must be non-negative");
  if (p.max_iterations < 1) fail("max_iterations must be at least 1");
  if (p.cccp_max_iterations < 1) fail("cccp_max_iterations must be at least 1");
  if (!(p.cccp_tolerance > 0.0)) fail("cccp_tolerance must be positive");
  if (!(p.qp_tolerance > 0.0)) fail("qp_tolerance must be positive");
  if (!(p.rounding_threshold > 0.0 && p.rounding_threshold < 1.0)) fail("rounding_threshold must lie in (0,1)");
}

P2Data make_p2_data(const Scenario& s, const SampleSet& samples) {
  const std::size_t K = s.num_devices;
  const std::size_t F = s.num_tasks;
  P2Data d;
  d.num_devices = K;
  d.num_tasks = F;
  d.num_samples = samples.size();
  const double out_bps = s.output_bits / s.slot_seconds;
  const double in_bps = s.input_bits / s.slot_seconds;
  d.rate_unit = out_bps > 0.0 ? out_bps : (in_bps > 0.0 ? in_bps : 1.0);
  d.output_coef = out_bps / d.rate_unit;

  d.input_rate = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(F));
  d.energy = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(F));
  d.deadline_ok.setZero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(F));
  d.free.setZero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(F));
  d.channel.resize(K);
  d.budget = s.energy_budget;
  for (DeviceIndex k = 0; k < K; ++k) {
    d.channel[k] = channel_cost(s, k);
    for (TaskIndex f = 0; f < F; ++f) {
      const auto i = static_cast<Eigen::Index>(k);
      const auto j = static_cast<Eigen::Index>(f);
      d.energy(i, j) = task_energy(s, k, f);
      if (!deadline_feasible(s, k, f)) continue;
      d.deadline_ok(i, j) = 1;
      d.input_rate(i, j) = s.input_bits / download_window(s, k, f) / d.rate_unit;
      const bool affordable = d.energy(i, j) <= s.energy_budget[k] + energy_slack(s.energy_budget[k]);
      d.free(i, j) = affordable ? 1 : 0;
    }
  }

  d.requesters.assign(samples.size(), std::vector<std::vector<DeviceIndex>>(F));
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto& q = samples.states[n];
    for (DeviceIndex k = 0; k < K; ++k) {
      const TaskIndex f = q.demand[k];
      d.requesters[n][f].push_back(k);
    }
  }
  return d;
}

double p2_objective(const P2Data& data, const ComputeDecision& x) {
  double total = 0.0;
  for (std::size_t n = 0; n < data.num_samples; ++n) {
    for (TaskIndex f = 0; f < data.num_tasks; ++f) {
      double out_rate = 0.0, out_h = 0.0, in_rate = 0.0, in_h = 0.0;
      for (DeviceIndex k : data.requesters[n][f]) {
        const auto i = static_cast<Eigen::Index>(k);
        const auto j = static_cast<Eigen::Index>(f);
        if (x(k, f)) {
          if (!data.deadline_ok(i, j)) throw DeadlineError(k, f);
          in_rate = std::max(in_rate, data.input_rate(i, j));
          in_h = std::max(in_h, data.channel[k]);
        } else {
          out_rate = data.output_coef;
          out_h = std::max(out_h, data.channel[k]);
        }
      }
      total += out_rate * out_h + in_rate * in_h;
    }
  }
  return data.num_samples ? data.rate_unit * total / static_cast<double>(data.num_samples) : 0.0;
}

PiBlock PiBlock::zeros(std::size_t tasks, std::size_t samples) {
  const auto F = static_cast<Eigen::Index>(tasks);
  const auto N = static_cast<Eigen::Index>(samples);
  return {Eigen::MatrixXd::Zero(F, N), Eigen::MatrixXd::Zero(F, N), Eigen::MatrixXd::Zero(F, N),
          Eigen::MatrixXd::Zero(F, N)};
}

double PiBlock::squared_norm() const {
  return out_rate.squaredNorm() + in_rate.squaredNorm() + out_channel.squaredNorm() + in_channel.squaredNorm();
}

PiBlock PiBlock::operator-(const PiBlock& o) const {
  return {out_rate - o.out_rate, in_rate - o.in_rate, out_channel - o.out_channel, in_channel - o.in_channel};
}

std::array<double, 5> resolve_rho(const SolverParams& params, const P2Data& data) {
  if (params.rho) return *params.rho;
  const double a = data.input_rate.size() ? data.input_rate.maxCoeff() : 0.0;
  double h = 0.0;
  for (double v : data.channel) h = std::max(h, v);
  auto scaled = [](double coef) { return 10.0 * (coef > 0.0 ? coef : 1.0); };
  return {10.0, scaled(data.output_coef), scaled(a), scaled(h), scaled(h)};
}

PiBlock tight_pi(const P2Data& data, const Eigen::MatrixXd& x) {
  PiBlock pi = PiBlock::zeros(data.num_tasks, data.num_samples);
  for (std::size_t n = 0; n < data.num_samples; ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    for (TaskIndex f = 0; f < data.num_tasks; ++f) {
      const auto row = static_cast<Eigen::Index>(f);
      for (DeviceIndex k : data.requesters[n][f]) {
        const double xv = x(static_cast<Eigen::Index>(k), row);
        const double h = data.channel[k];
        pi.out_rate(row, col) = std::max(pi.out_rate(row, col), data.output_coef * (1.0 - xv));
        pi.in_rate(row, col) =
            std::max(pi.in_rate(row, col), data.input_rate(static_cast<Eigen::Index>(k), row) * xv);
        pi.out_channel(row, col) = std::max(pi.out_channel(row, col), h * (1.0 - xv));
        pi.in_channel(row, col) = std::max(pi.in_channel(row, col), h * xv);
      }
    }
  }
  return pi;
}

namespace {

// Minimizer of the objective's first-order model at x = 0 over the relaxed
// budget set: per device, take entries by saving per joule until E runs out.
Eigen::MatrixXd linearized_start(const P2Data& data) {
  const auto K = static_cast<Eigen::Index>(data.num_devices);
  const auto F = static_cast<Eigen::Index>(data.num_tasks);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, F);
  ComputeDecision probe(data.num_devices, data.num_tasks);
  const double base = p2_objective(data, probe);
  for (Eigen::Index k = 0; k < K; ++k) {
    std::vector<std::pair<double, Eigen::Index>> gain;  // (saving per joule, f)
    for (Eigen::Index f = 0; f < F; ++f) {
      if (!data.free(k, f)) continue;
      probe.set(static_cast<std::size_t>(k), static_cast<std::size_t>(f), true);
      const double saving = base - p2_objective(data, probe);
      probe.set(static_cast<std::size_t>(k), static_cast<std::size_t>(f), false);
      if (saving <= 0.0) continue;
      const double e = data.energy(k, f);
      gain.emplace_back(e > 0.0 ? saving / e : std::numeric_limits<double>::infinity(), f);
    }
    std::stable_sort(gain.begin(), gain.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double left = data.budget[static_cast<std::size_t>(k)];
    for (const auto& [ratio, f] : gain) {
      const double e = data.energy(k, f);
      if (e <= left) {
        x(k, f) = 1.0;
        left -= e;
      } else {
        x(k, f) = left / e;
        break;
      }
    }
  }
  return x;
}

}  // namespace

AdmmState initial_state(const P2Data& data, const SolverParams& params) {
  AdmmState st;
  const auto K = static_cast<Eigen::Index>(data.num_devices);
  const auto F = static_cast<Eigen::Index>(data.num_tasks);
  if (params.init == InitMode::Linearized) {
    st.x = linearized_start(data);
  } else {
    st.x = Eigen::MatrixXd::Zero(K, F);
    std::vector<std::uint8_t> free_row(static_cast<std::size_t>(F));
    for (Eigen::Index k = 0; k < K; ++k) {
      for (Eigen::Index f = 0; f < F; ++f) free_row[static_cast<std::size_t>(f)] = data.free(k, f);
      st.x.row(k) = solve_device_step(Eigen::VectorXd::Constant(F, 0.5), data.energy.row(k).transpose(),
                                      data.budget[static_cast<std::size_t>(k)], free_row)
                        .transpose();
    }
  }
  st.y.assign(data.num_samples, st.x);
  st.lambda.assign(data.num_samples, Eigen::MatrixXd::Zero(K, F));
  st.pi = tight_pi(data, st.x);
  st.pi_hat = st.pi;
  st.z = PiBlock::zeros(data.num_tasks, data.num_samples);
  st.rho = resolve_rho(params, data);
  st.beta = params.beta;
  return st;
}

QpProblem copy_subproblem(const AdmmState& st, const P2Data& data, TaskIndex f, std::size_t n,
                          std::vector<DeviceIndex>* free_requesters) {
  const auto row = static_cast<Eigen::Index>(f);
  const auto col = static_cast<Eigen::Index>(n);
  std::vector<DeviceIndex> members;
  double out_rate_floor = 0.0;
  double out_channel_floor = 0.0;
  for (DeviceIndex k : data.requesters[n][f]) {
    if (data.free(static_cast<Eigen::Index>(k), row)) {
      members.push_back(k);
    } else {
      out_rate_floor = data.output_coef;
      out_channel_floor = std::max(out_channel_floor, data.channel[k]);
    }
  }

  const auto m = static_cast<Eigen::Index>(members.size());
  const Eigen::Index nv = m + 4;
  const Eigen::Index ro = m, ri = m + 1, ho = m + 2, hi = m + 3;
  const auto& rho = st.rho;

  QpProblem p;
  p.Q = Eigen::MatrixXd::Zero(nv, nv);
  p.c = Eigen::VectorXd::Zero(nv);
  p.lower = Eigen::VectorXd::Zero(nv);
  p.upper = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto k = static_cast<Eigen::Index>(members[static_cast<std::size_t>(j)]);
    p.Q(j, j) = rho[0];
    p.c(j) = -rho[0] * (st.x(k, row) + st.lambda[n](k, row));
    p.upper(j) = 1.0;
  }
  p.Q(ro, ro) = rho[1];
  p.Q(ri, ri) = rho[2];
  p.Q(ho, ho) = rho[3];
  p.Q(hi, hi) = rho[4];
  p.c(ro) = -rho[1] * (st.pi.out_rate(row, col) - st.z.out_rate(row, col));
  p.c(ri) = -rho[2] * (st.pi.in_rate(row, col) - st.z.in_rate(row, col));
  p.c(ho) = -rho[3] * (st.pi.out_channel(row, col) - st.z.out_channel(row, col));
  p.c(hi) = -rho[4] * (st.pi.in_channel(row, col) - st.z.in_channel(row, col));
  p.lower(ro) = out_rate_floor;
  p.lower(ho) = out_channel_floor;

  p.A = Eigen::MatrixXd::Zero(4 * m, nv);
  p.b = Eigen::VectorXd::Zero(4 * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const DeviceIndex k = members[static_cast<std::size_t>(j)];
    const double a = data.input_rate(static_cast<Eigen::Index>(k), row);
    const double h = data.channel[k];
    // out_rate >= coef (1 - y)
    p.A(4 * j, j) = -data.output_coef;
    p.A(4 * j, ro) = -1.0;
    p.b(4 * j) = -data.output_coef;
    // in_rate >= a y
    p.A(4 * j + 1, j) = a;
    p.A(4 * j + 1, ri) = -1.0;
    // out_channel >= h (1 - y)
    p.A(4 * j + 2, j) = -h;
    p.A(4 * j + 2, ho) = -1.0;
    p.b(4 * j + 2) = -h;
    // in_channel >= h y
    p.A(4 * j + 3, j) = h;
    p.A(4 * j + 3, hi) = -1.0;
  }
  if (free_requesters) *free_requesters = std::move(members);
  return p;
}

namespace {

// Copy step for one sample; touches only y[n] and column n of pi_hat.
void update_sample(AdmmState& st, const P2Data& data, const SolverParams& params, std::size_t n) {
  const auto K = static_cast<Eigen::Index>(data.num_devices);
  const auto F = static_cast<Eigen::Index>(data.num_tasks);
  const auto col = static_cast<Eigen::Index>(n);
  auto& y = st.y[n];
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index f = 0; f < F; ++f) {
      y(k, f) = data.free(k, f) ? clamp01(st.x(k, f) + st.lambda[n](k, f)) : 0.0;
    }
  }
  QpOptions opts;
  opts.tolerance = params.qp_tolerance;
  for (TaskIndex f = 0; f < data.num_tasks; ++f) {
    const auto row = static_cast<Eigen::Index>(f);
    std::vector<DeviceIndex> members;
    const QpProblem p = copy_subproblem(st, data, f, n, &members);
    Eigen::VectorXd sol;
    if (members.empty()) {
      // Separable: project each hat onto its lower bound.
      sol = (-p.c.array() / p.Q.diagonal().array()).max(p.lower.array()).matrix();
    } else {
      try {
        sol = qp_solve(p, opts).x;
      } catch (const QpError& e) {
        throw QpError("copy subproblem (task " + std::to_string(f) + ", sample " + std::to_string(n) +
                      "): " + e.what());
      }
    }
    const auto m = static_cast<Eigen::Index>(members.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      y(static_cast<Eigen::Index>(members[static_cast<std::size_t>(j)]), row) = clamp01(sol(j));
    }
    st.pi_hat.out_rate(row, col) = sol(m);
    st.pi_hat.in_rate(row, col) = sol(m + 1);
    st.pi_hat.out_channel(row, col) = sol(m + 2);
    st.pi_hat.in_channel(row, col) = sol(m + 3);
  }
}

}  // namespace

void update_copies(AdmmState& st, const P2Data& data, const SolverParams& params) {
  const auto N = static_cast<std::ptrdiff_t>(data.num_samples);
  std::string error;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t n = 0; n < N; ++n) {
    try {
      update_sample(st, data, params, static_cast<std::size_t>(n));
    } catch (const std::exception& e) {
#pragma omp critical(codedmec_copy_error)
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw QpError(error);
}

void update_copies_serial(AdmmState& st, const P2Data& data, const SolverParams& params) {
  for (std::size_t n = 0; n < data.num_samples; ++n) update_sample(st, data, params, n);
}

Eigen::VectorXd solve_device_step(const Eigen::VectorXd& center, const Eigen::VectorXd& energy, double budget,
                                  std::span<const std::uint8_t> free) {
  const Eigen::Index F = center.size();
  auto at = [&](double nu) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(F);
    for (Eigen::Index f = 0; f < F; ++f) {
      if (free[static_cast<std::size_t>(f)]) x(f) = clamp01(center(f) - nu * energy(f));
    }
    return x;
  };
  Eigen::VectorXd x = at(0.0);
  if (energy.dot(x) <= budget) return x;

  double lo = 0.0;
  double hi = 0.0;
  for (Eigen::Index f = 0; f < F; ++f) {
    if (free[static_cast<std::size_t>(f)] && energy(f) > 0.0) hi = std::max(hi, center(f) / energy(f));
  }
  hi = hi * (1.0 + 1e-12) + std::numeric_limits<double>::min();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (energy.dot(at(mid)) <= budget) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return at(hi);
}

double lagrangian_value(const AdmmState& st, const P2Data& data) {
  const double N = static_cast<double>(std::max<std::size_t>(1, data.num_samples));
  const auto& r = st.rho;
  double v = ((st.pi.out_rate.array() * st.pi.out_channel.array()).sum() +
              (st.pi.in_rate.array() * st.pi.in_channel.array()).sum()) /
             N;
  v += st.beta * sum_x_one_minus_x(st.x);
  double consensus = 0.0;
  for (std::size_t n = 0; n < st.y.size(); ++n) consensus += (st.x - st.y[n] + st.lambda[n]).squaredNorm();
  v += 0.5 * r[0] * consensus;
  v += 0.5 * r[1] * (st.pi_hat.out_rate - st.pi.out_rate + st.z.out_rate).squaredNorm();
  v += 0.5 * r[2] * (st.pi_hat.in_rate - st.pi.in_rate + st.z.in_rate).squaredNorm();
  v += 0.5 * r[3] * (st.pi_hat.out_channel - st.pi.out_channel + st.z.out_channel).squaredNorm();
  v += 0.5 * r[4] * (st.pi_hat.in_channel - st.pi.in_channel + st.z.in_channel).squaredNorm();
  return v;
}

AdmmGradient lagrangian_gradient(const AdmmState& st, const P2Data& data) {
  const double N = static_cast<double>(std::max<std::size_t>(1, data.num_samples));
  const auto& r = st.rho;
  AdmmGradient g;
  g.x = (st.beta * (1.0 - 2.0 * st.x.array())).matrix();
  g.y.resize(st.y.size());
  for (std::size_t n = 0; n < st.y.size(); ++n) {
    const Eigen::MatrixXd res = st.x - st.y[n] + st.lambda[n];
    g.x += r[0] * res;
    g.y[n] = -r[0] * res;
  }
  const Eigen::MatrixXd e1 = st.pi_hat.out_rate - st.pi.out_rate + st.z.out_rate;
  const Eigen::MatrixXd e2 = st.pi_hat.in_rate - st.pi.in_rate + st.z.in_rate;
  const Eigen::MatrixXd e3 = st.pi_hat.out_channel - st.pi.out_channel + st.z.out_channel;
  const Eigen::MatrixXd e4 = st.pi_hat.in_channel - st.pi.in_channel + st.z.in_channel;
  g.pi.out_rate = st.pi.out_channel / N - r[1] * e1;
  g.pi.in_rate = st.pi.in_channel / N - r[2] * e2;
  g.pi.out_channel = st.pi.out_rate / N - r[3] * e3;
  g.pi.in_channel = st.pi.in_rate / N - r[4] * e4;
  g.pi_hat.out_rate = r[1] * e1;
  g.pi_hat.in_rate = r[2] * e2;
  g.pi_hat.out_channel = r[3] * e3;
  g.pi_hat.in_channel = r[4] * e4;
  return g;
}

CccpReport update_globals(AdmmState& st, const P2Data& data, const SolverParams& params) {
  const auto K = static_cast<Eigen::Index>(data.num_devices);
  const auto F = static_cast<Eigen::Index>(data.num_tasks);
  const double N = static_cast<double>(std::max<std::size_t>(1, data.num_samples));
  const auto& r = st.rho;
  const double D = r[0] * N;

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(K, F);
  for (std::size_t n = 0; n < st.y.size(); ++n) v += st.y[n] - st.lambda[n];
  v /= N;

  const Eigen::MatrixXd t1 = st.pi_hat.out_rate + st.z.out_rate;
  const Eigen::MatrixXd t2 = st.pi_hat.in_rate + st.z.in_rate;
  const Eigen::MatrixXd t3 = st.pi_hat.out_channel + st.z.out_channel;
  const Eigen::MatrixXd t4 = st.pi_hat.in_channel + st.z.in_channel;

  CccpReport rep;
  double prev = lagrangian_value(st, data);
  rep.surrogate.push_back(prev);
  std::vector<std::uint8_t> free_row(static_cast<std::size_t>(F));
  for (int i = 0; i < params.cccp_max_iterations; ++i) {
    const Eigen::MatrixXd xi = st.x;
    const PiBlock pii = st.pi;
    for (Eigen::Index k = 0; k < K; ++k) {
      Eigen::VectorXd center(F);
      for (Eigen::Index f = 0; f < F; ++f) {
        center(f) = v(k, f) - st.beta * (1.0 - 2.0 * xi(k, f)) / D;
        free_row[static_cast<std::size_t>(f)] = data.free(k, f);
      }
      st.x.row(k) = solve_device_step(center, data.energy.row(k).transpose(),
                                      data.budget[static_cast<std::size_t>(k)], free_row)
                        .transpose();
    }
    st.pi.out_rate = (t1 - pii.out_channel / (N * r[1])).cwiseMax(0.0);
    st.pi.out_channel = (t3 - pii.out_rate / (N * r[3])).cwiseMax(0.0);
    st.pi.in_rate = (t2 - pii.in_channel / (N * r[2])).cwiseMax(0.0);
    st.pi.in_channel = (t4 - pii.in_rate / (N * r[4])).cwiseMax(0.0);

    const double cur = lagrangian_value(st, data);
    rep.surrogate.push_back(cur);
    ++rep.iterations;
    const double scale = std::max(1.0, std::abs(prev));
    if (cur > prev + 1e-9 * scale) rep.monotone = false;
    const bool done = std::abs(prev - cur) <= params.cccp_tolerance * scale;
    prev = cur;
    if (done) break;
  }
  return rep;
}

void update_duals(AdmmState& st) {
  for (std::size_t n = 0; n < st.y.size(); ++n) st.lambda[n] += st.x - st.y[n];
  st.z.out_rate += st.pi_hat.out_rate - st.pi.out_rate;
  st.z.in_rate += st.pi_hat.in_rate - st.pi.in_rate;
  st.z.out_channel += st.pi_hat.out_channel - st.pi.out_channel;
  st.z.in_channel += st.pi_hat.in_channel - st.pi.in_channel;
  ++st.iteration;
}

double primal_residual(const AdmmState& st) {
  double sq = (st.pi_hat - st.pi).squared_norm();
  for (const auto& y : st.y) sq += (st.x - y).squaredNorm();
  return std::sqrt(sq);
}

ComputeDecision round_and_repair(const Eigen::MatrixXd& x, const Scenario& s, double threshold) {
  const std::size_t K = s.num_devices;
  const std::size_t F = s.num_tasks;
  ComputeDecision out(K, F);
  for (DeviceIndex k = 0; k < K; ++k) {
    for (TaskIndex f = 0; f < F; ++f) {
      if (x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) >= threshold && deadline_feasible(s, k, f)) {
        out.set(k, f, true);
      }
    }
  }
  const double out_bps = s.output_bits / s.slot_seconds;
  for (DeviceIndex k = 0; k < K; ++k) {
    const double budget = s.energy_budget[k];
    double used = expected_energy(s, out, k);
    while (used > budget + energy_slack(budget)) {
      TaskIndex pick = F;
      double pick_ratio = std::numeric_limits<double>::infinity();
      for (TaskIndex f = 0; f < F; ++f) {
        if (!out(k, f)) continue;
        const double joules = task_energy(s, k, f);
        if (joules <= 0.0) continue;
        const double saving =
            s.popularity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) * channel_cost(s, k) *
            (out_bps - s.input_bits / download_window(s, k, f));
        const double ratio = saving / joules;
        if (ratio < pick_ratio) {
          pick_ratio = ratio;
          pick = f;
        }
      }
      if (pick == F) break;
      out.set(k, pick, false);
      used = expected_energy(s, out, k);
    }
  }
  return out;
}

P2Result solve_p2(const Scenario& s, const SampleSet& samples, const SolverParams& params) {
  validate_solver_params(params);
  if (samples.size() == 0) throw std::invalid_argument("solve_p2 needs at least one sample");
  const P2Data data = make_p2_data(s, samples);
  AdmmState st = initial_state(data, params);
  const double N = static_cast<double>(data.num_samples);
  const auto& r = st.rho;
  if (!(r[1] * r[3] * N * N > 1.0) || !(r[2] * r[4] * N * N > 1.0)) {
    throw std::invalid_argument("admm.rho: need rho1 rho3 N^2 > 1 and rho2 rho4 N^2 > 1");
  }

  P2Result res;
  res.x = ComputeDecision(s.num_devices, s.num_tasks);
  res.bandwidth = p2_objective(data, res.x);

  for (int t = 1; t <= params.max_iterations; ++t) {
    const Eigen::MatrixXd x_prev = st.x;
    const PiBlock pi_prev = st.pi;
    update_copies(st, data, params);
    const CccpReport rep = update_globals(st, data, params);
    update_duals(st);

    AdmmTraceRow row;
    row.iteration = t;
    row.lagrangian = lagrangian_value(st, data);
    row.primal_residual = primal_residual(st);
    const PiBlock dpi = st.pi - pi_prev;
    const double dx = (st.x - x_prev).norm();
    row.dual_residual =
        std::sqrt(r[0] * r[0] * N * dx * dx + r[1] * r[1] * dpi.out_rate.squaredNorm() +
                  r[2] * r[2] * dpi.in_rate.squaredNorm() + r[3] * r[3] * dpi.out_channel.squaredNorm() +
                  r[4] * r[4] * dpi.in_channel.squaredNorm());
    row.dx_norm = dx;
    row.binary_violation = sum_x_one_minus_x(st.x);
    row.cccp_iterations = rep.iterations;
    row.cccp_monotone = rep.monotone;

    const ComputeDecision cand = round_and_repair(st.x, s, params.rounding_threshold);
    row.candidate_bandwidth = p2_objective(data, cand);
    if (row.candidate_bandwidth < res.bandwidth) {
      res.bandwidth = row.candidate_bandwidth;
      res.x = cand;
      res.best_iteration = t;
    }
    res.trace.push_back(row);
    res.iterations = t;
    if (t >= params.min_iterations && dx <= params.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.relaxed = st.x;
  return res;
}

void write_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& trace) {
  os << "iteration,lagrangian,primal_residual,dual_residual,dx_norm,binary_violation,candidate_bandwidth_hz,"
        "cccp_iterations,cccp_monotone\n";
  const auto old = os.precision(12);
  for (const auto& r : trace) {
    os << r.iteration << ',' << r.lagrangian << ',' << r.primal_residual << ',' << r.dual_residual << ','
       << r.dx_norm << ',' << r.binary_violation << ',' << r.candidate_bandwidth << ',' << r.cccp_iterations << ','
       << (r.cccp_monotone ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace codedmec
