// Copyright 2026 The StealthPath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stealthpath/sde_engine.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "stealthpath/error.h"
#include "stealthpath/parallel.h"

namespace stealthpath {

// ---------------------------------------------------------------------------
// ControlAffineDynamics

ControlAffineDynamics::ControlAffineDynamics(int state_dim, int control_dim,
                                             int noise_dim, DriftFn drift,
                                             GainFn control_gain,
                                             GainFn noise_gain,
                                             bool gains_state_independent)
    : state_dim_(state_dim),
      control_dim_(control_dim),
      noise_dim_(noise_dim),
      drift_(std::move(drift)),
      control_gain_(std::move(control_gain)),
      noise_gain_(std::move(noise_gain)),
      gains_state_independent_(gains_state_independent) {
  if (state_dim <= 0 || control_dim <= 0 || noise_dim <= 0) {
    throw InvalidArgument("ControlAffineDynamics: dimensions must be positive");
  }
  if (!drift_ || !control_gain_ || !noise_gain_) {
    throw InvalidArgument("ControlAffineDynamics: missing callback");
  }
}

Vec ControlAffineDynamics::drift(double t, const ConstVecRef& x) const {
  Vec out(state_dim_);
  drift_(t, x, out);
  return out;
}

Mat ControlAffineDynamics::control_gain(double t, const ConstVecRef& x) const {
  Mat out(state_dim_, control_dim_);
  control_gain_(t, x, out);
  return out;
}

Mat ControlAffineDynamics::noise_gain(double t, const ConstVecRef& x) const {
  Mat out(state_dim_, noise_dim_);
  noise_gain_(t, x, out);
  return out;
}

// ---------------------------------------------------------------------------
// CostModel

CostModel::CostModel(StateCostFn state_cost, Mat control_weight,
                     double horizon)
    : state_cost_(std::move(state_cost)),
      control_dim_(static_cast<int>(control_weight.rows())),
      constant_weight_(std::move(control_weight)),
      horizon_(horizon) {
  if (!state_cost_) throw InvalidArgument("CostModel: missing state cost");
  if (constant_weight_.rows() != constant_weight_.cols() || control_dim_ <= 0) {
    throw InvalidArgument("CostModel: control weight must be square");
  }
  if (!(horizon > 0.0)) throw InvalidArgument("CostModel: horizon must be > 0");
  if ((constant_weight_ - constant_weight_.transpose()).cwiseAbs().maxCoeff() >
      1e-10) {
    throw InvalidArgument("CostModel: control weight must be symmetric");
  }
}

CostModel::CostModel(StateCostFn state_cost, int control_dim,
                     WeightFn control_weight, double horizon)
    : state_cost_(std::move(state_cost)),
      control_dim_(control_dim),
      weight_fn_(std::move(control_weight)),
      horizon_(horizon) {
  if (!state_cost_ || !weight_fn_) {
    throw InvalidArgument("CostModel: missing callback");
  }
  if (control_dim <= 0) throw InvalidArgument("CostModel: control_dim <= 0");
  if (!(horizon > 0.0)) throw InvalidArgument("CostModel: horizon must be > 0");
}

void CostModel::control_weight(double t, const ConstVecRef& x,
                               MatRef out) const {
  if (weight_fn_) {
    weight_fn_(t, x, out);
  } else {
    out = constant_weight_;
  }
}

Mat CostModel::control_weight(double t, const ConstVecRef& x) const {
  Mat out(control_dim_, control_dim_);
  control_weight(t, x, out);
  return out;
}

double CostModel::running_cost(double t, const ConstVecRef& x,
                               const ConstVecRef& u, Mat& scratch) const {
  double c = state_cost_(t, x);
  if (u.size() == 0 || u.isZero(0.0)) return c;
  const Mat* r = &constant_weight_;
  if (weight_fn_) {
    weight_fn_(t, x, scratch);
    r = &scratch;
  }
  // Plain loops: the inputs are tiny and Eigen's dynamic kernels allocate.
  const Eigen::Index l = u.size();
  double quad = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    double row = 0.0;
    for (Eigen::Index i = 0; i < l; ++i) row += (*r)(i, j) * u(i);
    quad += row * u(j);
  }
  return c + 0.5 * quad;
}

CostModel CostModel::shifted(double offset) const {
  CostModel copy = *this;
  StateCostFn base = state_cost_;
  copy.state_cost_ = [base, offset](double t, const ConstVecRef& x) {
    return base(t, x) + offset;
  };
  return copy;
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid TimeGrid::covering(double t0, double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("TimeGrid: dt must be positive");
  }
  if (!(horizon > t0)) throw InvalidArgument("TimeGrid: horizon <= t0");
  const double span = horizon - t0;
  const double steps = std::round(span / dt);
  if (steps < 1.0 || std::abs(steps * dt - span) > 1e-9) {
    throw InvalidArgument("TimeGrid: dt does not tile the horizon");
  }
  return TimeGrid{t0, dt, static_cast<int>(steps)};
}

TimeGrid TimeGrid::tail(int k) const {
  if (k < 0 || k >= steps) throw InvalidArgument("TimeGrid::tail: bad index");
  return TimeGrid{time(k), dt, steps - k};
}

Vec TimeGrid::times() const {
  Vec out(steps + 1);
  for (int k = 0; k <= steps; ++k) out(k) = time(k);
  return out;
}

// ---------------------------------------------------------------------------
// FeedbackPolicy

FeedbackPolicy::FeedbackPolicy(int dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {
  if (dim <= 0) throw InvalidArgument("FeedbackPolicy: dim must be positive");
}

FeedbackPolicy FeedbackPolicy::zero(int dim) { return FeedbackPolicy(dim, {}); }

FeedbackPolicy FeedbackPolicy::constant(const Vec& value) {
  if (value.isZero(0.0)) return zero(static_cast<int>(value.size()));
  return FeedbackPolicy(static_cast<int>(value.size()),
                        [value](double, const ConstVecRef&, VecRef out) {
                          out = value;
                        });
}

const char* to_string(SamplingMeasure measure) {
  switch (measure) {
    case SamplingMeasure::kNominal:
      return "P_nominal";
    case SamplingMeasure::kBrownian:
      return "Q_brownian";
    case SamplingMeasure::kUncontrolled:
      return "Z_uncontrolled";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// TrajectoryEnsemble

Eigen::Map<const Vec> TrajectoryEnsemble::state(int i, int k) const {
  const std::size_t offset =
      (static_cast<std::size_t>(i) * (grid.steps + 1) + k) * state_dim;
  return Eigen::Map<const Vec>(states.data() + offset, state_dim);
}

Eigen::Map<const Vec> TrajectoryEnsemble::noise_increment(int i, int k) const {
  const std::size_t offset =
      (static_cast<std::size_t>(i) * recorded_steps + k) * noise_dim;
  return Eigen::Map<const Vec>(noise_increments.data() + offset, noise_dim);
}

Eigen::Map<const Vec> TrajectoryEnsemble::control(int i, int k) const {
  const std::size_t offset =
      (static_cast<std::size_t>(i) * recorded_steps + k) * control_dim;
  return Eigen::Map<const Vec>(controls.data() + offset, control_dim);
}

Eigen::Map<const Vec> TrajectoryEnsemble::bias(int i, int k) const {
  const std::size_t offset =
      (static_cast<std::size_t>(i) * recorded_steps + k) * noise_dim;
  return Eigen::Map<const Vec>(biases.data() + offset, noise_dim);
}

Mat TrajectoryEnsemble::path(int i) const {
  if (!states_recorded) throw InvalidArgument("ensemble has no recorded states");
  Mat out(grid.steps + 1, state_dim);
  for (int k = 0; k <= grid.steps; ++k) out.row(k) = state(i, k).transpose();
  return out;
}

Mat TrajectoryEnsemble::path_controls(int i) const {
  Mat out(recorded_steps, control_dim);
  for (int k = 0; k < recorded_steps; ++k) {
    out.row(k) = control(i, k).transpose();
  }
  return out;
}

Vec TrajectoryEnsemble::leading_increment(int i, int steps) const {
  if (steps < 1 || steps > recorded_steps) {
    throw InvalidArgument("leading_increment: window of " +
                          std::to_string(steps) + " steps exceeds the " +
                          std::to_string(recorded_steps) + " recorded steps");
  }
  Vec sum = Vec::Zero(noise_dim);
  for (int k = 0; k < steps; ++k) sum += noise_increment(i, k);
  return sum;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

struct StepWorkspace {
  StepWorkspace(const ControlAffineDynamics& dyn)
      : f(dyn.state_dim()),
        g(dyn.state_dim(), dyn.control_dim()),
        h(dyn.state_dim(), dyn.noise_dim()) {}

  Vec f;
  Mat g;
  Mat h;
};

// Writes the EM update into `next`; g and h must already hold the gains at
// (t, x) unless `evaluate_gains` is set.
void em_update(const ControlAffineDynamics& dyn, StepWorkspace& ws,
               bool evaluate_gains, double t, const Vec& x, const Vec& u,
               bool control_active, const Vec& theta, const Vec& dw, double dt,
               Vec& next) {
  dyn.drift(t, x, ws.f);
  if (evaluate_gains) {
    dyn.control_gain(t, x, ws.g);
    dyn.noise_gain(t, x, ws.h);
  }
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) next(i) = x(i) + dt * ws.f(i);
  if (control_active) {
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double uj = dt * u(j);
      if (uj == 0.0) continue;
      for (Eigen::Index i = 0; i < n; ++i) next(i) += ws.g(i, j) * uj;
    }
  }
  for (Eigen::Index j = 0; j < dw.size(); ++j) {
    const double nj = dt * theta(j) + dw(j);
    for (Eigen::Index i = 0; i < n; ++i) next(i) += ws.h(i, j) * nj;
  }
}

void check_shape(const char* what, Eigen::Index actual, int expected) {
  if (actual != expected) {
    throw InvalidArgument(std::string(what) + ": expected dimension " +
                          std::to_string(expected) + ", got " +
                          std::to_string(actual));
  }
}

}  // namespace

Vec em_step(const Vec& x, double t, const Vec& u, const Vec& theta,
            const Vec& dw, const ControlAffineDynamics& dyn, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("em_step: dt must be positive");
  check_shape("em_step state", x.size(), dyn.state_dim());
  check_shape("em_step control", u.size(), dyn.control_dim());
  check_shape("em_step bias", theta.size(), dyn.noise_dim());
  check_shape("em_step increment", dw.size(), dyn.noise_dim());
  if (!x.allFinite() || !u.allFinite() || !theta.allFinite() ||
      !dw.allFinite() || !std::isfinite(t)) {
    throw InvalidArgument("em_step: non-finite input");
  }
  StepWorkspace ws(dyn);
  Vec next(dyn.state_dim());
  em_update(dyn, ws, true, t, x, u, true, theta, dw, dt, next);
  if (!next.allFinite()) {
    throw IntegrationDiverged("em_step produced a non-finite state",
                              std::nullopt, std::nullopt);
  }
  return next;
}

TrajectoryEnsemble rollout_batch(const ControlAffineDynamics& dyn,
                                 const CostModel& cost, const TimeGrid& grid,
                                 const Vec& x0,
                                 const FeedbackPolicy& control_policy,
                                 const FeedbackPolicy& bias_policy, int count,
                                 const SeedSpec& seed,
                                 const RolloutRecording& recording) {
  if (count < 1) throw InvalidArgument("rollout_batch: N must be >= 1");
  if (grid.steps < 1 || !(grid.dt > 0.0)) {
    throw InvalidArgument("rollout_batch: empty time grid");
  }
  check_shape("rollout_batch x0", x0.size(), dyn.state_dim());
  check_shape("rollout_batch control policy", control_policy.dim(),
              dyn.control_dim());
  check_shape("rollout_batch bias policy", bias_policy.dim(), dyn.noise_dim());
  check_shape("rollout_batch cost model", cost.control_dim(),
              dyn.control_dim());

  const int n = dyn.state_dim();
  const int l = dyn.control_dim();
  const int m = dyn.noise_dim();
  const int steps = grid.steps;

  TrajectoryEnsemble ens;
  ens.count = count;
  ens.state_dim = n;
  ens.control_dim = l;
  ens.noise_dim = m;
  ens.grid = grid;
  if (bias_policy.is_zero()) {
    ens.measure = control_policy.is_zero() ? SamplingMeasure::kUncontrolled
                                           : SamplingMeasure::kBrownian;
  } else {
    ens.measure = SamplingMeasure::kNominal;
  }
  ens.states_recorded = recording.states;
  ens.recorded_steps = recording.leading_steps < 0
                           ? steps
                           : std::min(recording.leading_steps, steps);
  const std::size_t rec = static_cast<std::size_t>(ens.recorded_steps);
  const std::size_t big_n = static_cast<std::size_t>(count);
  if (ens.states_recorded) ens.states.resize(big_n * (steps + 1) * n);
  ens.noise_increments.resize(big_n * rec * m);
  ens.controls.resize(big_n * rec * l);
  ens.biases.resize(big_n * rec * m);
  ens.path_costs.resize(big_n);

  const CounterRng rng(seed.master_seed);
  const double sqrt_dt = std::sqrt(grid.dt);
  const bool control_active = !control_policy.is_zero();
  const bool constant_gains = dyn.gains_state_independent();

  parallel_chunks(big_n, [&](std::size_t begin, std::size_t end) {
    StepWorkspace ws(dyn);
    Vec x(n), next(n), u = Vec::Zero(l), theta = Vec::Zero(m), dw(m);
    Mat weight_scratch(l, l);
    std::vector<double> step_costs(steps);
    for (std::size_t i = begin; i < end; ++i) {
      x = x0;
      if (constant_gains) {
        dyn.control_gain(grid.t0, x, ws.g);
        dyn.noise_gain(grid.t0, x, ws.h);
      }
      for (int k = 0; k < steps; ++k) {
        const double t = grid.time(k);
        control_policy(t, x, u);
        bias_policy(t, x, theta);
        rng.normals(i, static_cast<std::uint32_t>(k),
                    std::span<double>(dw.data(), m));
        dw *= sqrt_dt;
        step_costs[k] = cost.running_cost(t, x, u, weight_scratch);
        if (ens.states_recorded) {
          std::copy(x.data(), x.data() + n,
                    ens.states.data() + (i * (steps + 1) + k) * n);
        }
        if (static_cast<std::size_t>(k) < rec) {
          std::copy(dw.data(), dw.data() + m,
                    ens.noise_increments.data() + (i * rec + k) * m);
          std::copy(u.data(), u.data() + l,
                    ens.controls.data() + (i * rec + k) * l);
          std::copy(theta.data(), theta.data() + m,
                    ens.biases.data() + (i * rec + k) * m);
        }
        em_update(dyn, ws, !constant_gains, t, x, u, control_active, theta, dw,
                  grid.dt, next);
        if (!next.allFinite() || !std::isfinite(step_costs[k])) {
          throw IntegrationDiverged("rollout produced a non-finite state",
                                    static_cast<std::int64_t>(i), k);
        }
        x.swap(next);
      }
      if (ens.states_recorded) {
        std::copy(x.data(), x.data() + n,
                  ens.states.data() + (i * (steps + 1) + steps) * n);
      }
      ens.path_costs[i] = grid.dt * pairwise_sum(step_costs);
    }
  });
  return ens;
}

double path_cost(const Mat& states, const Mat& controls, const CostModel& cost,
                 const TimeGrid& grid) {
  if (states.rows() != grid.steps + 1 || controls.rows() != grid.steps ||
      controls.cols() != cost.control_dim()) {
    throw InvalidArgument("path_cost: shapes inconsistent with the grid");
  }
  const int l = cost.control_dim();
  Mat scratch(l, l);
  Vec x(states.cols());
  Vec u(l);
  std::vector<double> step_costs(grid.steps);
  for (int k = 0; k < grid.steps; ++k) {
    x = states.row(k).transpose();
    u = controls.row(k).transpose();
    step_costs[k] = cost.running_cost(grid.time(k), x, u, scratch);
  }
  return grid.dt * pairwise_sum(step_costs);
}

PathRecord simulate_path(const ControlAffineDynamics& dyn,
                         const CostModel& cost, const TimeGrid& grid,
                         const Vec& x0, const StepPolicy& control,
                         const StepPolicy& bias, const SeedSpec& seed) {
  if (grid.steps < 1 || !(grid.dt > 0.0)) {
    throw InvalidArgument("simulate_path: empty time grid");
  }
  check_shape("simulate_path x0", x0.size(), dyn.state_dim());
  const int n = dyn.state_dim();
  const int l = dyn.control_dim();
  const int m = dyn.noise_dim();
  PathRecord rec;
  rec.grid = grid;
  rec.states.resize(grid.steps + 1, n);
  rec.controls.resize(grid.steps, l);
  rec.biases.resize(grid.steps, m);

  const CounterRng rng(seed.master_seed);
  const double sqrt_dt = std::sqrt(grid.dt);
  StepWorkspace ws(dyn);
  Vec x = x0, next(n), u = Vec::Zero(l), theta = Vec::Zero(m), dw(m);
  Mat weight_scratch(l, l);
  std::vector<double> step_costs(grid.steps);
  for (int k = 0; k < grid.steps; ++k) {
    const double t = grid.time(k);
    rec.states.row(k) = x.transpose();
    if (control) {
      control(k, t, x, u);
    } else {
      u.setZero();
    }
    if (bias) {
      bias(k, t, x, theta);
    } else {
      theta.setZero();
    }
    if (!u.allFinite() || !theta.allFinite()) {
      throw IntegrationDiverged("policy returned a non-finite input",
                                std::nullopt, k);
    }
    rng.normals(0, static_cast<std::uint32_t>(k),
                std::span<double>(dw.data(), m));
    dw *= sqrt_dt;
    step_costs[k] = cost.running_cost(t, x, u, weight_scratch);
    rec.controls.row(k) = u.transpose();
    rec.biases.row(k) = theta.transpose();
    em_update(dyn, ws, true, t, x, u, true, theta, dw, grid.dt, next);
    if (!next.allFinite() || !std::isfinite(step_costs[k])) {
      throw IntegrationDiverged("closed-loop path produced a non-finite state",
                                std::nullopt, k);
    }
    x.swap(next);
  }
  rec.states.row(grid.steps) = x.transpose();
  rec.cost = grid.dt * pairwise_sum(step_costs);
  return rec;
}

// ---------------------------------------------------------------------------
// Binary dump

namespace {

constexpr char kMagic[4] = {'S', 'P', 'E', '1'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ostream& out, double v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_column(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) put_f64(out, v);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw InvalidArgument("read_ensemble: truncated header");
  return to_little(v);
}

double get_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw InvalidArgument("read_ensemble: truncated data");
  return to_little(v);
}

void get_column(std::istream& in, std::vector<double>& values,
                std::size_t size) {
  values.resize(size);
  for (double& v : values) v = get_f64(in);
}

}  // namespace

void write_ensemble(std::ostream& out, const TrajectoryEnsemble& e) {
  out.write(kMagic, 4);
  put_u64(out, e.state_dim);
  put_u64(out, e.noise_dim);
  put_u64(out, e.control_dim);
  put_u64(out, e.count);
  put_u64(out, e.grid.steps);
  put_f64(out, e.grid.dt);
  put_f64(out, e.grid.t0);
  put_u64(out, static_cast<std::uint64_t>(e.measure));
  put_u64(out, e.states_recorded ? 1 : 0);
  put_u64(out, e.recorded_steps);
  put_column(out, e.states);
  put_column(out, e.noise_increments);
  put_column(out, e.controls);
  put_column(out, e.biases);
  put_column(out, e.path_costs);
}

TrajectoryEnsemble read_ensemble(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw InvalidArgument("read_ensemble: bad magic");
  }
  TrajectoryEnsemble e;
  e.state_dim = static_cast<int>(get_u64(in));
  e.noise_dim = static_cast<int>(get_u64(in));
  e.control_dim = static_cast<int>(get_u64(in));
  e.count = static_cast<int>(get_u64(in));
  e.grid.steps = static_cast<int>(get_u64(in));
  e.grid.dt = get_f64(in);
  e.grid.t0 = get_f64(in);
  const std::uint64_t measure = get_u64(in);
  if (measure > 2) throw InvalidArgument("read_ensemble: bad measure tag");
  e.measure = static_cast<SamplingMeasure>(measure);
  e.states_recorded = get_u64(in) != 0;
  e.recorded_steps = static_cast<int>(get_u64(in));
  const std::size_t big_n = e.count;
  const std::size_t rec = e.recorded_steps;
  get_column(in, e.states,
             e.states_recorded ? big_n * (e.grid.steps + 1) * e.state_dim : 0);
  get_column(in, e.noise_increments, big_n * rec * e.noise_dim);
  get_column(in, e.controls, big_n * rec * e.control_dim);
  get_column(in, e.biases, big_n * rec * e.noise_dim);
  get_column(in, e.path_costs, big_n);
  return e;
}

}  // namespace stealthpath
