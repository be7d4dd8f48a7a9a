#include "ncentre/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "ncentre/errors.hpp"

namespace ncentre {

namespace odeint = boost::numeric::odeint;

void IntegratorConfig::validate() const {
  if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0))
    throw Error(ErrorCode::invalid_argument, "integrator tolerances must be positive");
  if (max_step < 0.0) throw Error(ErrorCode::invalid_argument, "max_step must be non-negative");
  if (!(collision_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "collision_radius must be positive");
  if (!(min_step > 0.0)) throw Error(ErrorCode::invalid_argument, "min_step must be positive");
}

namespace {

using State = std::array<double, 6>;

Vec3 pos(const State& s) { return {s[0], s[1], s[2]}; }
Vec3 vel(const State& s) { return {s[3], s[4], s[5]}; }

double nearest_centre(const PotentialSpec& spec, const Vec3& q) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : spec.centres()) d = std::min(d, centre_distance(c, q));
  return d;
}

}  // namespace

IntegrationResult integrate(const PotentialSpec& spec, const PhaseState& start, double duration,
                            const IntegratorConfig& cfg, const std::vector<double>& sample_times) {
  cfg.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw Error(ErrorCode::invalid_argument, "duration must be finite and non-negative");
  if (nearest_centre(spec, start.position) <= 0.0)
    throw Error(ErrorCode::distance_zero, "initial position at a centre");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw Error(ErrorCode::invalid_argument, "sample times must be ascending");

  const bool planar = spec.mode() == Mode::planar;
  auto rhs = [&](const State& s, State& ds, double) {
    const Vec3 g = gradient(spec, pos(s));
    ds[0] = s[3];
    ds[1] = s[4];
    ds[2] = s[5];
    ds[3] = g.x();
    ds[4] = g.y();
    ds[5] = planar ? 0.0 : g.z();
  };
  auto energy = [&](const State& s) { return 0.5 * vel(s).squaredNorm() - evaluate(spec, pos(s)); };

  State x{start.position.x(), start.position.y(), start.position.z(),
          start.velocity.x(), start.velocity.y(), start.velocity.z()};
  const double e0 = energy(x);

  IntegrationResult out;
  auto record = [&](double t, const State& s) {
    out.times.push_back(t);
    out.positions.push_back(pos(s));
    out.velocities.push_back(vel(s));
    out.energy_drift = std::max(out.energy_drift, std::abs(energy(s) - e0) / std::max(1.0, std::abs(e0)));
  };

  using Stepper = odeint::runge_kutta_dopri5<State>;
  auto dense = cfg.max_step > 0.0
                   ? odeint::make_dense_output(cfg.absolute_tolerance, cfg.relative_tolerance, cfg.max_step, Stepper())
                   : odeint::make_dense_output(cfg.absolute_tolerance, cfg.relative_tolerance, Stepper());

  std::size_t next_sample = 0;
  auto emit_until = [&](double t_hi, bool inclusive) {
    while (next_sample < sample_times.size() &&
           (sample_times[next_sample] < t_hi || (inclusive && sample_times[next_sample] <= t_hi))) {
      State s;
      dense.calc_state(sample_times[next_sample], s);
      record(sample_times[next_sample], s);
      ++next_sample;
    }
  };

  if (duration == 0.0) {
    record(0.0, x);
    return out;
  }
  const double dt0 = std::min(duration, cfg.max_step > 0.0 ? cfg.max_step : duration) * 1e-3;
  dense.initialize(x, 0.0, dt0);
  if (sample_times.empty()) record(0.0, x);
  while (next_sample < sample_times.size() && sample_times[next_sample] <= 0.0) {
    record(sample_times[next_sample], x);
    ++next_sample;
  }

  while (dense.current_time() < duration) {
    std::pair<double, double> span;
    try {
      span = dense.do_step(rhs);
    } catch (const odeint::step_adjustment_error&) {
      throw Error(ErrorCode::step_underflow, "step size adjustment failed");
    }
    ++out.steps;
    const double t_new = span.second;
    if (span.second - span.first < cfg.min_step * std::max(1.0, std::abs(span.first)) && t_new < duration)
      throw Error(ErrorCode::step_underflow, "integrator step fell below the minimum");
    const State& s_new = dense.current_state();
    if (nearest_centre(spec, pos(s_new)) < cfg.collision_radius) {
      // Back off to the sampled times reached before the collision.
      emit_until(std::min(t_new, duration), false);
      out.collision_stop = true;
      out.stop_time = t_new;
      return out;
    }
    if (sample_times.empty()) {
      if (t_new <= duration) {
        record(t_new, s_new);
      } else {
        State s;
        dense.calc_state(duration, s);
        record(duration, s);
      }
    } else {
      emit_until(std::min(t_new, duration), true);
    }
  }
  out.stop_time = duration;
  return out;
}

VerificationReport verify_minimizer(const DiscretePath& path, double omega_sq, const PotentialSpec& spec, double h,
                                    const IntegratorConfig& cfg) {
  const Trajectory tr = reparametrize(path, omega_sq);
  const int n = path.segments();
  VerificationReport rep;
  rep.duration = tr.duration();
  rep.path_diameter = path.diameter();
  for (int i = 0; i < n; ++i) {
    const Vec3 mid = 0.5 * (path.node(i) + path.node(i + 1));
    rep.max_energy_residual =
        std::max(rep.max_energy_residual, std::abs(0.5 * tr.segment_velocities[i].squaredNorm() - evaluate(spec, mid) - h));
  }
  PhaseState s0{path.start(), tr.segment_velocities.front()};
  const auto orbit = integrate(spec, s0, rep.duration, cfg, tr.times);
  rep.collision_stop = orbit.collision_stop;
  for (std::size_t i = 0; i < orbit.times.size(); ++i) {
    rep.max_deviation = std::max(rep.max_deviation, (orbit.positions[i] - tr.positions[i]).norm());
    const double e = 0.5 * orbit.velocities[i].squaredNorm() - evaluate(spec, orbit.positions[i]) - h;
    rep.integrated_energy_residual = std::max(rep.integrated_energy_residual, std::abs(e));
  }
  if (orbit.collision_stop) rep.max_deviation = std::numeric_limits<double>::infinity();
  return rep;
}

nlohmann::json to_json(const VerificationReport& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"max_deviation", finite_or_null(r.max_deviation)},
          {"path_diameter", r.path_diameter},
          {"max_energy_residual", r.max_energy_residual},
          {"integrated_energy_residual", r.integrated_energy_residual},
          {"duration", r.duration},
          {"collision_stop", r.collision_stop}};
}

}  // namespace ncentre
