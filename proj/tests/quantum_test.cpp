#include <doctest.h>

#include "berrybell/quantum.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace berrybell;

namespace
{
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("state vectors reject unnormalized amplitudes")
{
  CHECK_THROWS_AS(SpinState(Spinor2cd(1.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(SpinState::normalized(Spinor2cd(0.0, 0.0)), std::invalid_argument);
  const SpinState s = SpinState::normalized(Spinor2cd(3.0, Complex<double>(0.0, 4.0)));
  CHECK(s[0].real() == doctest::Approx(0.6));
  CHECK(s[1].imag() == doctest::Approx(0.8));
}

TEST_CASE("pauli matrices")
{
  const Op2cd id = Op2cd::Identity();
  CHECK((pauli_x() * pauli_x() - id).norm() < 1e-15);
  CHECK((pauli_y() * pauli_y() - id).norm() < 1e-15);
  CHECK((pauli_x() * pauli_y() - Complex<double>(0, 1) * pauli_z()).norm() < 1e-15);
  CHECK(is_hermitian(pauli_y()));
}

TEST_CASE("measurement direction kets")
{
  SUBCASE("along the axis")
  {
    const MeasurementDirection z(0.0, 1.3);
    CHECK(phase_insensitive_distance(z.ket(Sign::Plus), spin_up().amplitudes()) < 1e-15);
    CHECK(phase_insensitive_distance(z.ket(Sign::Minus), spin_down().amplitudes()) < 1e-15);
  }
  SUBCASE("polar angle is folded into [0, pi]")
  {
    const MeasurementDirection d(1.5 * kPi, 0.2);
    CHECK(d.polar() == doctest::Approx(0.5 * kPi));
    CHECK(d.azimuthal() == doctest::Approx(0.2 + kPi));
    const MeasurementDirection raw(-0.4, -0.1);
    CHECK(raw.polar() == doctest::Approx(0.4));
    CHECK(raw.azimuthal() == doctest::Approx(kPi - 0.1));
  }
  SUBCASE("shifting the polar angle by pi swaps the outcomes")
  {
    const MeasurementDirection d(0.7, 2.1);
    const MeasurementDirection flipped(0.7 + kPi, 2.1);
    CHECK((projector(d, Sign::Minus) - projector(flipped, Sign::Plus)).norm() < 1e-14);
  }
  CHECK_THROWS_AS(MeasurementDirection(std::nan(""), 0.0), std::invalid_argument);
}

TEST_CASE("projectors on random directions")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-4.0 * kPi, 4.0 * kPi);
  for (int trial = 0; trial < 1000; ++trial)
  {
    const MeasurementDirection d(angle(rng), angle(rng));
    const Op2cd plus = projector(d, Sign::Plus);
    const Op2cd minus = projector(d, Sign::Minus);
    CHECK((plus * plus - plus).norm() < 1e-12);
    CHECK((minus * minus - minus).norm() < 1e-12);
    CHECK(hermitian_defect(plus) < 1e-12);
    CHECK((plus + minus - Op2cd::Identity()).norm() < 1e-12);
    CHECK((plus * minus).norm() < 1e-12);
    CHECK(std::abs(plus.trace() - 1.0) < 1e-12);

    // observable = n . sigma with the Bloch vector of the direction
    const double p = d.polar(), a = d.azimuthal();
    const Op2cd n_sigma = std::sin(p) * std::cos(a) * pauli_x() + std::sin(p) * std::sin(a) * pauli_y() +
                          std::cos(p) * pauli_z();
    CHECK((observable(d) - n_sigma).norm() < 1e-12);
  }
}

TEST_CASE("kron and tensor")
{
  const Op4cd zz = kron(pauli_z(), pauli_z());
  CHECK(zz(0, 0).real() == 1.0);
  CHECK(zz(1, 1).real() == -1.0);
  CHECK(zz(2, 2).real() == -1.0);
  CHECK(zz(3, 3).real() == 1.0);
  const PairState ud = tensor(spin_up(), spin_down());
  CHECK(ud[1] == Complex<double>(1.0));
  CHECK(std::abs(ud[0]) + std::abs(ud[2]) + std::abs(ud[3]) == 0.0);
}

TEST_CASE("expectation values")
{
  const SpinState plus_x = SpinState::normalized(Spinor2cd(1.0, 1.0));
  CHECK(expectation<double, 2>(plus_x, pauli_x()) == doctest::Approx(1.0));
  CHECK(std::abs(expectation<double, 2>(plus_x, pauli_z())) < 1e-15);

  Op2cd not_hermitian = Op2cd::Zero();
  not_hermitian(0, 1) = 1.0;
  CHECK_THROWS_AS((expectation<double, 2>(plus_x, not_hermitian)), std::invalid_argument);
}

TEST_CASE("phase insensitive distance")
{
  const Spinor2cd a(0.6, Complex<double>(0.0, 0.8));
  CHECK(phase_insensitive_distance(a, std::polar(1.0, 2.3) * a) < 1e-15);
  CHECK(phase_insensitive_distance(spin_up().amplitudes(), spin_down().amplitudes()) == doctest::Approx(1.0));
  CHECK_THROWS_AS(phase_insensitive_distance(Eigen::VectorXcd::Ones(2), Eigen::VectorXcd::Ones(4)),
                  std::invalid_argument);
}

TEST_CASE("scalar template instantiates for long double")
{
  using LD = long double;
  const MeasurementDirectionT<LD> d(LD(0.3), LD(0.9));
  const Operator2<LD> p = projector(d, Sign::Plus);
  CHECK(static_cast<double>(std::abs((p * p - p).norm())) < 1e-15);
  const SpinStateT<LD> s(d.ket(Sign::Plus));
  CHECK(static_cast<double>(expectation<LD, 2>(s, observable(d))) == doctest::Approx(1.0));
}
