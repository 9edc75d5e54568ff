#include "berrybell/berry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace berrybell
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-run RK4 norm-loss budget and the coarsest w1*h we allow.
constexpr double kNormBudget = 1e-10;
constexpr double kMaxLarmorStep = 0.02;

Spinor2cd schrodinger_rhs(const FieldConfig& config, double t, const Spinor2cd& psi)
{
  return Complex<double>(0.0, -1.0) * (hamiltonian(config, t) * psi);
}

}  // namespace

FieldConfig::FieldConfig(double tilt, double rotation_frequency, double larmor_frequency,
                         FieldOrientation orientation)
  : tilt_(tilt), rotation_frequency_(rotation_frequency), larmor_frequency_(larmor_frequency), orientation_(orientation)
{
  if (!(tilt >= 0.0 && tilt <= kPi / 2.0))
  {
    throw std::invalid_argument("field tilt must lie in [0, pi/2]");
  }
  if (!(rotation_frequency > 0.0) || !std::isfinite(rotation_frequency))
  {
    throw std::invalid_argument("rotation frequency must be positive and finite");
  }
  if (!(larmor_frequency > 0.0) || !std::isfinite(larmor_frequency))
  {
    throw std::invalid_argument("Larmor frequency must be positive and finite");
  }
}

FieldConfig FieldConfig::from_ratio(double tilt, double ratio, FieldOrientation orientation)
{
  return FieldConfig(tilt, ratio, 1.0, orientation);
}

double FieldConfig::period() const { return kTwoPi / rotation_frequency_; }

FieldConfig FieldConfig::reversed() const
{
  return FieldConfig(tilt_, rotation_frequency_, larmor_frequency_,
                     orientation_ == FieldOrientation::Forward ? FieldOrientation::Reversed
                                                               : FieldOrientation::Forward);
}

Eigen::Vector3d field_direction(const FieldConfig& config, double t)
{
  const double phi = config.rotation_frequency() * t;
  const double st = std::sin(config.tilt());
  return config.orientation_sign() * Eigen::Vector3d(st * std::cos(phi), st * std::sin(phi), std::cos(config.tilt()));
}

Op2cd hamiltonian(const FieldConfig& config, double t)
{
  const Eigen::Vector3d n = field_direction(config, t);
  const double w1 = config.larmor_frequency();
  Op2cd h;
  h << w1 * n.z(), w1 * Complex<double>(n.x(), -n.y()), w1 * Complex<double>(n.x(), n.y()), -w1 * n.z();
  return h;
}

Eigenstates eigenstates(const FieldConfig& config, double t)
{
  const double c = std::cos(config.tilt() / 2.0);
  const double s = std::sin(config.tilt() / 2.0);
  const Complex<double> phase = std::polar(1.0, config.rotation_frequency() * t);
  return {SpinState(Spinor2cd(c, s * phase)), SpinState(Spinor2cd(-s, c * phase))};
}

double berry_phase_up(double tilt) { return -kPi * (1.0 - std::cos(tilt)); }

double berry_phase_down(double tilt) { return -kPi * (1.0 + std::cos(tilt)); }

EigenPhases analytic_phases(const FieldConfig& config)
{
  // theta_+ = -E_+ tau with E_+ = s w1 (hbar = 1); theta_- = -theta_+.
  const double dynamical_up = -config.orientation_sign() * kTwoPi * config.larmor_frequency() /
                              config.rotation_frequency();
  return {PhasePair{berry_phase_up(config.tilt()), dynamical_up},
          PhasePair{berry_phase_down(config.tilt()), -dynamical_up}};
}

double wrap_phase(double phase, double center)
{
  double r = std::remainder(phase - center, kTwoPi);  // [-pi, pi]
  if (r <= -kPi)
  {
    r += kTwoPi;
  }
  return center + r;
}

double angular_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

std::size_t recommended_steps(const FieldConfig& config, double duration)
{
  if (!(duration > 0.0))
  {
    throw std::invalid_argument("duration must be positive");
  }
  // RK4 on a Larmor rotation loses (w1 h)^6 / 72 of norm^2 per step.
  const double larmor_angle = config.larmor_frequency() * duration;
  const double step = std::min(kMaxLarmorStep, std::pow(72.0 * kNormBudget / larmor_angle, 0.2));
  const auto larmor_steps = static_cast<std::size_t>(std::ceil(larmor_angle / step));
  const auto floor_steps =
      static_cast<std::size_t>(std::ceil(kMinStepsPerPeriod * duration / config.period()));
  return std::max(larmor_steps, floor_steps);
}

std::size_t recommended_stride(const FieldConfig& config, double duration, std::size_t steps)
{
  const double larmor_step = config.larmor_frequency() * duration / static_cast<double>(steps);
  const double per_sample = kTwoPi / 200.0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(per_sample / larmor_step));
}

Trajectory evolve(const FieldConfig& config, const SpinState& initial, double duration, std::size_t steps,
                  std::size_t record_stride)
{
  if (!(duration > 0.0) || !std::isfinite(duration))
  {
    throw std::invalid_argument("evolve: duration must be positive and finite");
  }
  if (record_stride == 0)
  {
    throw std::invalid_argument("evolve: record stride must be >= 1");
  }
  const double periods = duration / config.period();
  if (static_cast<double>(steps) < static_cast<double>(kMinStepsPerPeriod) * periods || steps == 0)
  {
    throw std::invalid_argument("evolve: " + std::to_string(steps) + " steps over " + std::to_string(periods) +
                                " rotation periods is below the floor of " + std::to_string(kMinStepsPerPeriod) +
                                " steps per period");
  }

  const double h = duration / static_cast<double>(steps);
  Trajectory traj{{}, {}, config};
  const std::size_t samples = steps / record_stride + 2;
  traj.times.reserve(samples);
  traj.states.reserve(samples);

  Spinor2cd psi = initial.amplitudes();
  traj.times.push_back(0.0);
  traj.states.push_back(psi);
  for (std::size_t k = 0; k < steps; ++k)
  {
    const double t = h * static_cast<double>(k);
    const Spinor2cd k1 = schrodinger_rhs(config, t, psi);
    const Spinor2cd k2 = schrodinger_rhs(config, t + 0.5 * h, psi + 0.5 * h * k1);
    const Spinor2cd k3 = schrodinger_rhs(config, t + 0.5 * h, psi + 0.5 * h * k2);
    const Spinor2cd k4 = schrodinger_rhs(config, t + h, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % record_stride == 0 || k + 1 == steps)
    {
      traj.times.push_back(h * static_cast<double>(k + 1));
      traj.states.push_back(psi);
    }
  }
  return traj;
}

double dynamical_phase(const Trajectory& trajectory)
{
  const auto energy = [&](std::size_t i) {
    const Spinor2cd& psi = trajectory.states[i];
    const Complex<double> e = psi.dot(hamiltonian(trajectory.config, trajectory.times[i]) * psi);
    return e.real() / psi.squaredNorm();
  };
  double integral = 0.0;
  double previous = energy(0);
  for (std::size_t i = 1; i < trajectory.size(); ++i)
  {
    const double current = energy(i);
    integral += 0.5 * (trajectory.times[i] - trajectory.times[i - 1]) * (previous + current);
    previous = current;
  }
  return -integral;
}

PhasePair extract_phases(std::span<const Trajectory> segments, const SpinState& reference, double branch_hint)
{
  if (segments.empty() || segments.back().size() == 0)
  {
    throw std::invalid_argument("extract_phases: empty trajectory");
  }
  const Spinor2cd final_state = segments.back().final_state().normalized();
  const double distance = phase_insensitive_distance(final_state, reference.amplitudes());
  if (!(distance < kCyclicTolerance))
  {
    throw NonCyclicEvolution("extract_phases: evolution is not cyclic (distance " + std::to_string(distance) + ")");
  }
  const double total = std::arg(reference.amplitudes().dot(final_state));
  double dynamical = 0.0;
  for (const Trajectory& segment : segments)
  {
    dynamical += dynamical_phase(segment);
  }
  return PhasePair{wrap_phase(total - dynamical, branch_hint), dynamical};
}

PhasePair extract_phases(const Trajectory& trajectory, const SpinState& reference, double branch_hint)
{
  return extract_phases(std::span<const Trajectory>(&trajectory, 1), reference, branch_hint);
}

EigenPhases spin_echo(const FieldConfig& config, EchoMode mode)
{
  const FieldConfig first = config.orientation() == FieldOrientation::Forward ? config : config.reversed();
  const EigenPhases stage1 = analytic_phases(first);
  const EigenPhases stage2 = analytic_phases(first.reversed());
  const double fraction = mode == EchoMode::FullTwoPeriods ? 1.0 : 0.5;
  const auto combine = [fraction](const PhasePair& a, const PhasePair& b) {
    return PhasePair{fraction * (a.geometric + b.geometric), fraction * (a.dynamical + b.dynamical)};
  };
  return {combine(stage1.up, stage2.up), combine(stage1.down, stage2.down)};
}

namespace
{

double norm_defect(const Trajectory& trajectory)
{
  double worst = 0.0;
  for (const Spinor2cd& psi : trajectory.states)
  {
    worst = std::max(worst, std::abs(psi.norm() - 1.0));
  }
  return worst;
}

}  // namespace

std::optional<EchoOracle> spin_echo_oracle(const FieldConfig& config, EchoMode mode, std::size_t steps_per_stage)
{
  if (mode == EchoMode::TwoHalfPeriods)
  {
    return std::nullopt;
  }
  const FieldConfig first = config.orientation() == FieldOrientation::Forward ? config : config.reversed();
  const FieldConfig second = first.reversed();
  const double duration = first.period();
  const std::size_t steps = steps_per_stage == 0 ? recommended_steps(first, 2.0 * duration) : steps_per_stage;
  const std::size_t stride = recommended_stride(first, duration, steps);
  const EigenPhases expected = spin_echo(first, mode);
  const Eigenstates basis = eigenstates(first, 0.0);

  EchoOracle out;
  const auto run = [&](const SpinState& start, double hint) {
    Trajectory stage1 = evolve(first, start, duration, steps, stride);
    const SpinState middle = SpinState::normalized(stage1.final_state());
    Trajectory stage2 = evolve(second, middle, duration, steps, stride);
    // stage 2 continues from the unnormalized end of stage 1
    const double scale = stage1.final_state().norm();
    for (Spinor2cd& psi : stage2.states)
    {
      psi *= scale;
    }
    out.max_norm_defect = std::max({out.max_norm_defect, norm_defect(stage1), norm_defect(stage2)});
    const std::vector<Trajectory> segments{std::move(stage1), std::move(stage2)};
    return extract_phases(segments, start, hint);
  };
  out.phases.up = run(basis.up, expected.up.geometric);
  out.phases.down = run(basis.down, expected.down.geometric);
  return out;
}

EchoOracle single_period_oracle(const FieldConfig& config, std::size_t steps)
{
  const double duration = config.period();
  const std::size_t n = steps == 0 ? recommended_steps(config, duration) : steps;
  const std::size_t stride = recommended_stride(config, duration, n);
  const EigenPhases expected = analytic_phases(config);
  const Eigenstates basis = eigenstates(config, 0.0);
  EchoOracle out;
  const auto run = [&](const SpinState& start, double hint) {
    const Trajectory traj = evolve(config, start, duration, n, stride);
    out.max_norm_defect = std::max(out.max_norm_defect, norm_defect(traj));
    return extract_phases(traj, start, hint);
  };
  out.phases.up = run(basis.up, expected.up.geometric);
  out.phases.down = run(basis.down, expected.down.geometric);
  return out;
}

}  // namespace berrybell
