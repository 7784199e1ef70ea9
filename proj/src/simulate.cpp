#include "pdmp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pdmp/parallel.hpp"

namespace pdmp {

double sample_holding(const ModelSpec& model, const StatePoint& x, Rng& rng,
                      HoldingMethod method) {
  if (method == HoldingMethod::thinning) return model.hazard().sample_thinning(x, rng);
  return model.hazard().sample_inversion(x, uniform_open(rng));
}

ExtendedState step_chain_with_holding(const ModelSpec& model,
                                      const ExtendedState& state, double holding,
                                      Rng& rng) {
  const StatePoint& x = state.x;
  const StatePoint pre_jump{model.flow()(x.regime, holding, x.y), x.regime};
  return {model.post_jump().sample(pre_jump, rng), state.clock + holding};
}

ExtendedState step_chain(const ModelSpec& model, const ExtendedState& state, Rng& rng,
                         HoldingMethod method) {
  const double holding = sample_holding(model, state.x, rng, method);
  return step_chain_with_holding(model, state, holding, rng);
}

JumpTrajectory::JumpTrajectory(const ExtendedState& initial) {
  if (!(initial.clock >= 0.0) || !std::isfinite(initial.clock)) {
    throw std::invalid_argument("JumpTrajectory: initial clock must be finite and >= 0");
  }
  push(initial);
}

void JumpTrajectory::push(const ExtendedState& s) {
  y_.push_back(s.x.y);
  regime_.push_back(s.x.regime);
  tau_.push_back(s.clock);
}

void JumpTrajectory::reserve(std::size_t n) {
  y_.reserve(n);
  regime_.reserve(n);
  tau_.reserve(n);
}

std::vector<double> JumpTrajectory::holding_times() const {
  std::vector<double> out(steps());
  for (std::size_t n = 1; n < tau_.size(); ++n) out[n - 1] = tau_[n] - tau_[n - 1];
  return out;
}

JumpTrajectory run_chain(const ModelSpec& model, const ExtendedState& initial,
                         std::size_t n_steps, Rng& rng, HoldingMethod method) {
  if (initial.x.regime >= model.regimes()) {
    throw std::invalid_argument("run_chain: initial regime out of range");
  }
  JumpTrajectory trajectory(initial);
  trajectory.reserve(n_steps + 1);
  ExtendedState state = initial;
  for (std::size_t n = 0; n < n_steps; ++n) {
    state = step_chain(model, state, rng, method);
    trajectory.push(state);
  }
  return trajectory;
}

std::vector<JumpTrajectory> run_replicas(const ModelSpec& model,
                                         const ExtendedState& initial,
                                         std::size_t n_steps, std::uint64_t seed,
                                         std::size_t replicas, unsigned threads,
                                         HoldingMethod method) {
  std::vector<std::optional<JumpTrajectory>> slots(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    slots[r] = run_chain(model, initial, n_steps, rng, method);
  });
  std::vector<JumpTrajectory> out;
  out.reserve(replicas);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

PdmpPath::PdmpPath(std::shared_ptr<const Semiflow> flow, JumpTrajectory trajectory)
    : flow_(std::move(flow)), trajectory_(std::move(trajectory)) {
  if (!flow_) throw std::invalid_argument("PdmpPath: flow required");
}

StatePoint PdmpPath::operator()(double t) const {
  const auto& taus = trajectory_.taus();
  if (!(t >= taus.front() && t <= taus.back())) {
    std::ostringstream msg;
    msg << "pdmp_evaluate: t=" << t << " outside the covered horizon [" << taus.front()
        << ", " << taus.back() << "]";
    throw std::out_of_range(msg.str());
  }
  const auto it = std::upper_bound(taus.begin(), taus.end(), t);
  const auto n = static_cast<std::size_t>(it - taus.begin()) - 1;
  const StatePoint x = trajectory_.state(n);
  return {(*flow_)(x.regime, t - taus[n], x.y), x.regime};
}

StatePoint pdmp_evaluate(const PdmpPath& path, double t) { return path(t); }

std::size_t count_jumps(const JumpTrajectory& trajectory, double t) {
  const auto& taus = trajectory.taus();
  if (t < taus.front()) throw std::invalid_argument("count_jumps: t precedes tau_0");
  const auto it = std::upper_bound(taus.begin(), taus.end(), t);
  return static_cast<std::size_t>(it - taus.begin()) - 1;
}

WeightedMeasure occupation_measure(std::span<const PdmpPath> paths, double burn_in,
                                   double horizon, std::size_t samples_per_path,
                                   Rng& rng, std::vector<double>* times) {
  if (!(horizon > burn_in)) {
    throw std::invalid_argument("occupation_measure: horizon must exceed burn_in");
  }
  WeightedMeasure mu;
  mu.reserve(paths.size() * samples_per_path);
  const double width = (horizon - burn_in) / static_cast<double>(samples_per_path);
  for (const PdmpPath& path : paths) {
    if (path.horizon() < horizon || path.start() > burn_in) {
      throw std::invalid_argument(
          "occupation_measure: path does not cover the observation window");
    }
    for (std::size_t k = 0; k < samples_per_path; ++k) {
      const double t =
          std::min(horizon, burn_in + (static_cast<double>(k) + uniform_open(rng)) * width);
      mu.add(path(t), 1.0);
      if (times) times->push_back(t);
    }
  }
  return normalize(mu);
}

WeightedMeasure chain_measure(std::span<const JumpTrajectory> trajectories,
                              std::size_t burn_steps) {
  WeightedMeasure mu;
  std::size_t n = 0;
  for (const auto& tr : trajectories) n += tr.steps() > burn_steps ? tr.steps() - burn_steps : 0;
  mu.reserve(n);
  for (const auto& tr : trajectories) {
    for (std::size_t k = burn_steps + 1; k < tr.size(); ++k) mu.add(tr.state(k), 1.0);
  }
  return normalize(mu);
}

JumpCountStats jump_count_stats(const ModelSpec& model, const ExtendedState& initial,
                                std::vector<double> times, std::size_t max_n,
                                std::size_t replicas, std::uint64_t seed,
                                unsigned threads, HoldingMethod method) {
  if (times.empty() || replicas < 2) {
    throw std::invalid_argument("jump_count_stats: need observation times and >= 2 replicas");
  }
  std::sort(times.begin(), times.end());
  if (times.front() < initial.clock) {
    throw std::invalid_argument("jump_count_stats: observation time precedes tau_0");
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (replicas + kBlock - 1) / kBlock;
  const std::size_t nt = times.size(), nn = max_n + 1;
  const double lower = model.lambda_lower();
  // Per block: sums and sums of squares, laid out [k][n].
  struct Sums {
    std::vector<double> c, m, m2;
  };
  std::vector<Sums> parts(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, b);
    Sums& s = parts[b];
    s.c.assign(nt * nn, 0.0);
    s.m.assign(nt * nn, 0.0);
    s.m2.assign(nt * nn, 0.0);
    const std::size_t end = std::min(replicas, (b + 1) * kBlock);
    std::vector<double> tau;
    for (std::size_t r = b * kBlock; r < end; ++r) {
      tau.assign(1, initial.clock);
      ExtendedState state = initial;
      while (state.clock <= times.back() && tau.size() <= nn) {
        state = step_chain(model, state, rng, method);
        tau.push_back(state.clock);
      }
      for (std::size_t k = 0; k < nt; ++k) {
        const auto eta = static_cast<std::size_t>(
            std::upper_bound(tau.begin(), tau.end(), times[k]) - tau.begin() - 1);
        if (eta < nn) s.c[k * nn + eta] += 1.0;
        for (std::size_t n = 0; n < nn && n < tau.size(); ++n) {
          if (tau[n] <= times[k]) {
            const double v = std::exp(lower * (tau[n] - initial.clock));
            s.m[k * nn + n] += v;
            s.m2[k * nn + n] += v * v;
          }
        }
      }
    }
  });
  JumpCountStats out;
  out.times = times;
  out.max_n = max_n;
  out.replicas = replicas;
  const double R = static_cast<double>(replicas);
  for (auto* v : {&out.count, &out.count_se, &out.moment, &out.moment_se}) {
    v->assign(nt, std::vector<double>(nn, 0.0));
  }
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t n = 0; n < nn; ++n) {
      double c = 0.0, m = 0.0, m2 = 0.0;
      for (const Sums& s : parts) {
        c += s.c[k * nn + n];
        m += s.m[k * nn + n];
        m2 += s.m2[k * nn + n];
      }
      const double p = c / R;
      out.count[k][n] = p;
      out.count_se[k][n] = std::sqrt(p * (1.0 - p) / R);
      const double mean = m / R;
      out.moment[k][n] = mean;
      out.moment_se[k][n] = std::sqrt(std::max(0.0, m2 / R - mean * mean) / (R - 1.0));
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const JumpTrajectory& trajectory) {
  out << "n,tau,y,xi\n";
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    const JumpRecord r = trajectory[n];
    out << n << ',' << format_double(r.tau) << ',' << format_double(r.y) << ','
        << r.regime << '\n';
  }
}

}  // namespace pdmp
