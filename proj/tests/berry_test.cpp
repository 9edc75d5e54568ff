#include <doctest.h>

#include "berrybell/berry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace berrybell;

namespace
{

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

// Closed-form solution for the rotating field. In the frame co-rotating with
// the field, psi = Uz(t) phi with Uz = exp(-i w0 t sz / 2) and phi evolving under
// the static K = s w1 n(0) . sigma - (w0/2) sz.
struct ExactPropagator
{
  FieldConfig config;

  Eigen::Vector3d k_vector() const
  {
    const double s = config.orientation_sign() * config.larmor_frequency();
    const double th = config.tilt();
    return {s * std::sin(th), 0.0, s * std::cos(th) - 0.5 * config.rotation_frequency()};
  }

  Spinor2cd apply(const Spinor2cd& psi0, double t) const
  {
    const Eigen::Vector3d a = k_vector();
    const double mag = a.norm();
    const Op2cd k_sigma = a(0) * pauli_x() + a(1) * pauli_y() + a(2) * pauli_z();
    const Op2cd rotating =
        std::cos(mag * t) * Op2cd::Identity() - Complex<double>(0.0, std::sin(mag * t) / mag) * k_sigma;
    const double half = 0.5 * config.rotation_frequency() * t;
    Op2cd uz = Op2cd::Zero();
    uz(0, 0) = std::polar(1.0, -half);
    uz(1, 1) = std::polar(1.0, half);
    return uz * (rotating * psi0);
  }

  // -integral_0^T <psi|H|psi> dt; <H> = s w1 m . r(t), r precessing about k at rate 2|k|.
  double dynamical_phase(const Spinor2cd& psi0, double T) const
  {
    const Eigen::Vector3d a = k_vector();
    const double mag = a.norm();
    const Eigen::Vector3d k = a / mag;
    const std::complex<double> cross = std::conj(psi0(0)) * psi0(1);
    const Eigen::Vector3d r(2.0 * cross.real(), 2.0 * cross.imag(), std::norm(psi0(0)) - std::norm(psi0(1)));
    const double w = 2.0 * mag;
    const Eigen::Vector3d along = r.dot(k) * k;
    const Eigen::Vector3d integral =
        along * T + std::sin(w * T) / w * (r - along) + (1.0 - std::cos(w * T)) / w * k.cross(r);
    const double s = config.orientation_sign() * config.larmor_frequency();
    const Eigen::Vector3d m(std::sin(config.tilt()), 0.0, std::cos(config.tilt()));
    return -s * m.dot(integral);
  }

  double geometric_phase(const Spinor2cd& psi0, double T) const
  {
    const Spinor2cd final_state = apply(psi0, T);
    const double total = std::arg(psi0.dot(final_state));
    return wrap_phase(total - dynamical_phase(psi0, T), -kPi);
  }
};

double norm_defect(const Spinor2cd& v) { return std::abs(v.norm() - 1.0); }

}  // namespace

TEST_CASE("field config validation")
{
  CHECK_THROWS_AS(FieldConfig(-0.1, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FieldConfig(kPi / 2 + 1e-9, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FieldConfig(0.3, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FieldConfig(0.3, 1.0, -1.0), std::invalid_argument);
  const FieldConfig c = FieldConfig::from_ratio(0.4, 0.25);
  CHECK(c.adiabaticity_ratio() == doctest::Approx(0.25));
  CHECK(c.adiabaticity_warning());
  CHECK_FALSE(FieldConfig::from_ratio(0.4, 0.05).adiabaticity_warning());
  CHECK(c.period() == doctest::Approx(2 * kPi / 0.25));
  CHECK(c.reversed().orientation_sign() == -1.0);
  CHECK(c.reversed().reversed().orientation_sign() == 1.0);
}

TEST_CASE("eigenstates")
{
  SUBCASE("untilted field")
  {
    const FieldConfig c = FieldConfig::from_ratio(0.0, 0.01);
    const Eigenstates e = eigenstates(c, 12.3);
    CHECK(phase_insensitive_distance(e.up, spin_up()) < 1e-15);
    CHECK(phase_insensitive_distance(e.down, spin_down()) < 1e-15);
  }
  SUBCASE("equatorial field at t = 0")
  {
    const Eigenstates e = eigenstates(FieldConfig::from_ratio(kPi / 2, 0.01), 0.0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK((e.up.amplitudes() - Spinor2cd(r, r)).norm() < 1e-15);
    CHECK((e.down.amplitudes() - Spinor2cd(-r, r)).norm() < 1e-15);
  }
  SUBCASE("eigenvalue equation at random (theta, t)")
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> tilt(0.0, kPi / 2), time(0.0, 5000.0), ratio(1e-3, 0.5);
    for (int i = 0; i < 100; ++i)
    {
      const FieldConfig forward = FieldConfig::from_ratio(tilt(rng), ratio(rng));
      for (const FieldConfig& c : {forward, forward.reversed()})
      {
        const double t = time(rng);
        const double w1 = c.orientation_sign() * c.larmor_frequency();
        const Eigenstates e = eigenstates(c, t);
        const Op2cd h = hamiltonian(c, t);
        CHECK((h * e.up.amplitudes() - w1 * e.up.amplitudes()).norm() < 1e-12);
        CHECK((h * e.down.amplitudes() + w1 * e.down.amplitudes()).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("field direction traces the cone")
{
  const FieldConfig c = FieldConfig::from_ratio(deg(30), 0.1);
  const Eigen::Vector3d n0 = field_direction(c, 0.0);
  const Eigen::Vector3d quarter = field_direction(c, c.period() / 4);
  CHECK(n0(0) == doctest::Approx(0.5));
  CHECK(n0(2) == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(quarter(1) == doctest::Approx(0.5));
  CHECK((field_direction(c.reversed(), 1.7) + field_direction(c, 1.7)).norm() < 1e-15);
}

TEST_CASE("analytic phases")
{
  CHECK(berry_phase_up(0.0) == 0.0);
  CHECK(berry_phase_up(deg(60)) == doctest::Approx(-kPi / 2));
  CHECK(berry_phase_up(deg(90)) == doctest::Approx(-kPi));
  // |gamma| = pi/4 at arccos(3/4) = 41.41 deg
  CHECK(berry_phase_up(std::acos(0.75)) == doctest::Approx(-kPi / 4));
  CHECK(std::acos(0.75) * 180.0 / kPi == doctest::Approx(41.4).epsilon(1e-3));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> tilt(0.0, kPi / 2), ratio(1e-4, 1.0);
  for (int i = 0; i < 200; ++i)
  {
    const FieldConfig c = FieldConfig::from_ratio(tilt(rng), ratio(rng));
    const EigenPhases p = analytic_phases(c);
    CHECK(p.up.geometric <= 0.0);
    CHECK(p.up.geometric >= -2 * kPi);
    CHECK(p.up.geometric + p.down.geometric == doctest::Approx(-2 * kPi));
    CHECK(p.up.dynamical == -p.down.dynamical);
    CHECK(p.up.dynamical == doctest::Approx(-2 * kPi / c.adiabaticity_ratio()));
  }
}

TEST_CASE("wrap_phase and angular_distance")
{
  CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(0.1, -kPi) == doctest::Approx(0.1 - 2 * kPi));
  CHECK(angular_distance(0.1, 0.1 + 4 * kPi) < 1e-14);
  CHECK(angular_distance(-kPi + 0.01, kPi - 0.01) == doctest::Approx(0.02));
}

TEST_CASE("evolve input validation")
{
  const FieldConfig c = FieldConfig::from_ratio(0.5, 0.01);
  const SpinState up = eigenstates(c, 0.0).up;
  CHECK_THROWS_AS(evolve(c, up, c.period(), 999), std::invalid_argument);
  CHECK_NOTHROW(evolve(c, up, c.period(), 1000));
  CHECK_THROWS_AS(evolve(c, up, 0.0, 5000), std::invalid_argument);
  CHECK_THROWS_AS(evolve(c, up, -1.0, 5000), std::invalid_argument);
  CHECK_THROWS_AS(evolve(c, up, c.period(), 5000, 0), std::invalid_argument);
}

TEST_CASE("evolve: static axis closed form")
{
  const FieldConfig c = FieldConfig::from_ratio(0.0, 1.0 / 200.0);
  const double tau = c.period();
  const Trajectory tr = evolve(c, spin_up(), tau, 800000, 4000);
  const Spinor2cd expected = std::polar(1.0, -c.larmor_frequency() * tau) * spin_up().amplitudes();
  CHECK((tr.final_state() - expected).norm() < 1e-9);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(tau));
}

TEST_CASE("evolve agrees with the exact rotating-frame solution")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tilt(0.0, kPi / 2), ratio(0.01, 0.3), re(-1.0, 1.0);
  for (int i = 0; i < 20; ++i)
  {
    const FieldConfig forward = FieldConfig::from_ratio(tilt(rng), ratio(rng));
    const FieldConfig c = i % 2 == 0 ? forward : forward.reversed();
    const SpinState psi0 = SpinState::normalized(Spinor2cd(Complex<double>(re(rng), re(rng)), Complex<double>(re(rng), re(rng))));
    const double duration = 1.5 * c.period();
    const std::size_t steps = recommended_steps(c, duration);
    const Trajectory tr = evolve(c, psi0, duration, steps, recommended_stride(c, duration, steps));
    const ExactPropagator exact{c};
    CHECK((tr.final_state() - exact.apply(psi0.amplitudes(), duration)).norm() < 1e-6);
    for (std::size_t k = 0; k < tr.size(); k += tr.size() / 7 + 1)
    {
      CHECK((tr.states[k] - exact.apply(psi0.amplitudes(), tr.times[k])).norm() < 1e-6);
    }
    // trapezoid over the recorded samples, about 200 per Larmor cycle
    CHECK(std::abs(dynamical_phase(tr) - exact.dynamical_phase(psi0.amplitudes(), duration)) < 1e-3);
  }
}

TEST_CASE("evolve is deterministic")
{
  const FieldConfig c = FieldConfig::from_ratio(0.9, 0.02);
  const SpinState up = eigenstates(c, 0.0).up;
  const Trajectory a = evolve(c, up, c.period(), 20000, 7);
  const Trajectory b = evolve(c, up, c.period(), 20000, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
  {
    CHECK(a.times[k] == b.times[k]);
    CHECK(a.states[k] == b.states[k]);
  }
}

TEST_CASE("unitarity over two periods")
{
  SUBCASE("at recommended step counts")
  {
    for (double ratio : {1.0 / 50, 1.0 / 200, kDefaultAdiabaticRatio})
    {
      for (double th : {15.0, 60.0, 90.0})
      {
        const FieldConfig c = FieldConfig::from_ratio(deg(th), ratio);
        const double duration = 2 * c.period();
        const std::size_t steps = recommended_steps(c, duration);
        CHECK(steps >= 2 * kMinStepsPerPeriod);
        const Trajectory tr = evolve(c, eigenstates(c, 0.0).up, duration, steps, recommended_stride(c, duration, steps));
        for (const Spinor2cd& s : tr.states)
        {
          CHECK(norm_defect(s) < 1e-9);
        }
      }
    }
  }
  SUBCASE("at the step floor when the floor resolves the Larmor motion")
  {
    // norm loss per RK4 step is (w1 h)^6 / 72; at 1000 steps per period that needs w0/w1 >~ 0.35
    const FieldConfig c = FieldConfig::from_ratio(deg(45), 0.5);
    const Trajectory tr = evolve(c, eigenstates(c, 0.0).up, 2 * c.period(), 2 * kMinStepsPerPeriod);
    for (const Spinor2cd& s : tr.states)
    {
      CHECK(norm_defect(s) < 1e-9);
    }
  }
}

TEST_CASE("adiabatic following at theta = 60 deg, ratio 1/200")
{
  const FieldConfig c = FieldConfig::from_ratio(kPi / 3, 1.0 / 200.0);
  const SpinState up0 = eigenstates(c, 0.0).up;
  const std::size_t steps = recommended_steps(c, c.period());
  const Trajectory tr = evolve(c, up0, c.period(), steps, recommended_stride(c, c.period(), steps));
  CHECK(phase_insensitive_distance(tr.final_state(), up0.amplitudes()) < 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k)
  {
    const SpinState s = SpinState::normalized(tr.states[k]);
    worst = std::max(worst, std::abs(expectation<double, 2>(s, hamiltonian(c, tr.times[k])) - c.larmor_frequency()));
  }
  CHECK(worst < 1e-3 * c.larmor_frequency());
}

TEST_CASE("extract_phases: untilted loop has no geometric phase")
{
  const FieldConfig c = FieldConfig::from_ratio(0.0, 1.0 / 200.0);
  const EchoOracle o = single_period_oracle(c);
  CHECK(angular_distance(o.phases.up.geometric, 0.0) < 1e-6);
  CHECK(angular_distance(o.phases.down.geometric, 0.0) < 1e-6);
}

TEST_CASE("extract_phases: theta = 60 deg, ratio 1/200 gives -pi/2 within 5e-3")
{
  const FieldConfig c = FieldConfig::from_ratio(kPi / 3, 1.0 / 200.0);
  const EchoOracle o = single_period_oracle(c);
  CHECK(angular_distance(o.phases.up.geometric, -kPi / 2) < 5e-3);
}

TEST_CASE("extract_phases matches the exact solution's phase split")
{
  // Separates integrator error from the finite-ratio correction of the geometric phase.
  for (double ratio : {1.0 / 50, 1.0 / 200})
  {
    for (double th : {15.0, 45.0, 75.0, 90.0})
    {
      const FieldConfig c = FieldConfig::from_ratio(deg(th), ratio);
      const EchoOracle o = single_period_oracle(c);
      const ExactPropagator exact{c};
      const double expected = exact.geometric_phase(eigenstates(c, 0.0).up.amplitudes(), c.period());
      CHECK(angular_distance(o.phases.up.geometric, expected) < 1e-5);
      // leading finite-ratio correction: -(3 pi / 4) (w0/w1) sin^2 theta
      const double correction = -0.75 * kPi * ratio * std::pow(std::sin(deg(th)), 2);
      CHECK(std::abs(wrap_phase(expected - berry_phase_up(deg(th))) - correction) < 0.05 * std::abs(correction) + 1e-9);
    }
  }
}

TEST_CASE("extract_phases: up and down phases sum to -2 pi")
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tilt(0.0, kPi / 2);
  for (int i = 0; i < 6; ++i)
  {
    const FieldConfig c = FieldConfig::from_ratio(tilt(rng), 1.0 / 200.0);
    const EchoOracle o = single_period_oracle(c);
    CHECK(angular_distance(o.phases.up.geometric + o.phases.down.geometric, -2 * kPi) < 1e-2);
    CHECK(o.max_norm_defect < 1e-9);
  }
}

TEST_CASE("extract_phases rejects open evolutions")
{
  const FieldConfig c = FieldConfig::from_ratio(deg(60), 0.01);
  const SpinState up = eigenstates(c, 0.0).up;
  const Trajectory half = evolve(c, up, 0.5 * c.period(), 20000);
  CHECK_THROWS_AS(extract_phases(half, up), NonCyclicEvolution);
  CHECK_THROWS_AS(extract_phases(std::span<const Trajectory>{}, up), std::invalid_argument);
}

TEST_CASE("spin echo: analytic composition")
{
  const FieldConfig c = FieldConfig::from_ratio(deg(60), 1.0 / 200.0);
  const EigenPhases full = spin_echo(c, EchoMode::FullTwoPeriods);
  CHECK(full.up.geometric == doctest::Approx(-kPi));
  CHECK(full.up.dynamical == 0.0);
  CHECK(full.down.geometric == doctest::Approx(2 * berry_phase_down(deg(60))));
  const EigenPhases half = spin_echo(c, EchoMode::TwoHalfPeriods);
  CHECK(half.up.geometric == doctest::Approx(-kPi / 2));
  CHECK(half.up.dynamical == 0.0);
  for (EchoMode m : {EchoMode::FullTwoPeriods, EchoMode::TwoHalfPeriods})
  {
    const EigenPhases flat = spin_echo(FieldConfig::from_ratio(0.0, 0.01), m);
    CHECK(flat.up.geometric == 0.0);
    CHECK(flat.up.dynamical == 0.0);
  }
}

TEST_CASE("spin echo oracle cancels the dynamical phase")
{
  for (double th : {15.0, 30.0, 45.0, 60.0, 75.0, 90.0})
  {
    const FieldConfig c = FieldConfig::from_ratio(deg(th), kDefaultAdiabaticRatio);
    const auto o = spin_echo_oracle(c, EchoMode::FullTwoPeriods);
    REQUIRE(o.has_value());
    CHECK(std::abs(o->phases.up.dynamical) < 5e-3);
    CHECK(std::abs(o->phases.down.dynamical) < 5e-3);
    CHECK(angular_distance(o->phases.up.geometric, 2 * berry_phase_up(deg(th))) < 1e-2);
    CHECK(o->max_norm_defect < 1e-9);
  }
  CHECK_FALSE(spin_echo_oracle(FieldConfig::from_ratio(1.0, 0.01), EchoMode::TwoHalfPeriods).has_value());
}
