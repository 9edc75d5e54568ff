#ifndef BERRYBELL_QUANTUM_HPP_
#define BERRYBELL_QUANTUM_HPP_

// State vectors and operators for one and two spin-1/2 (or path) qubits.
//
// Basis conventions used throughout the library:
//   single qubit: [up, down] along the quantization axis n
//   pair:         left (x) right, ordered [up-up, up-down, down-up, down-down]

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace berrybell
{

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar, int Dim>
using Ket = Eigen::Matrix<Complex<Scalar>, Dim, 1>;

template <typename Scalar>
using Spinor = Ket<Scalar, 2>;

template <typename Scalar>
using PairVector = Ket<Scalar, 4>;

template <typename Scalar, int Dim>
using Operator = Eigen::Matrix<Complex<Scalar>, Dim, Dim>;

template <typename Scalar>
using Operator2 = Operator<Scalar, 2>;

template <typename Scalar>
using Operator4 = Operator<Scalar, 4>;

using Spinor2cd = Spinor<double>;
using Pair4cd = PairVector<double>;
using Op2cd = Operator2<double>;
using Op4cd = Operator4<double>;

/// Tolerance for "normalized" and "unitary" at construction time.
inline constexpr double kUnitTolerance = 1e-12;

/// Largest |A - A^dagger| entry accepted as Hermitian.
inline constexpr double kHermitianTolerance = 1e-10;

enum class Sign
{
  Plus,
  Minus
};

constexpr int sign_value(Sign s) { return s == Sign::Plus ? 1 : -1; }

/**
 * Normalized state in a Dim-dimensional Hilbert space.
 *
 * Construction from raw amplitudes checks the norm; use normalized() to
 * rescale an arbitrary nonzero vector. Values are immutable.
 */
template <typename Scalar, int Dim>
class StateVector
{
public:
  using Vector = Ket<Scalar, Dim>;

  explicit StateVector(const Vector& amplitudes) : amplitudes_(amplitudes)
  {
    const Scalar defect = std::abs(amplitudes_.squaredNorm() - Scalar(1));
    if (!(defect <= Scalar(kUnitTolerance)))
    {
      throw std::invalid_argument("state vector is not normalized (|norm^2 - 1| = " +
                                  std::to_string(static_cast<double>(defect)) + ")");
    }
  }

  static StateVector normalized(const Vector& v)
  {
    const Scalar n = v.norm();
    if (!(n > Scalar(0)) || !std::isfinite(static_cast<double>(n)))
    {
      throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    return StateVector(v / n);
  }

  const Vector& amplitudes() const { return amplitudes_; }

  Complex<Scalar> operator[](int i) const { return amplitudes_(i); }

  static constexpr int dimension() { return Dim; }

  /// Apply a unitary. Throws if the result drifts off the unit sphere.
  StateVector apply(const Operator<Scalar, Dim>& unitary) const
  {
    return StateVector(unitary * amplitudes_);
  }

private:
  Vector amplitudes_;
};

template <typename Scalar>
using SpinStateT = StateVector<Scalar, 2>;

template <typename Scalar>
using PairStateT = StateVector<Scalar, 4>;

using SpinState = SpinStateT<double>;
using PairState = PairStateT<double>;

template <typename Scalar = double>
SpinStateT<Scalar> spin_up()
{
  return SpinStateT<Scalar>(Spinor<Scalar>(Complex<Scalar>(1), Complex<Scalar>(0)));
}

template <typename Scalar = double>
SpinStateT<Scalar> spin_down()
{
  return SpinStateT<Scalar>(Spinor<Scalar>(Complex<Scalar>(0), Complex<Scalar>(1)));
}

template <typename Scalar = double>
Operator2<Scalar> pauli_x()
{
  Operator2<Scalar> m;
  m << Scalar(0), Scalar(1), Scalar(1), Scalar(0);
  return m;
}

template <typename Scalar = double>
Operator2<Scalar> pauli_y()
{
  Operator2<Scalar> m;
  m << Scalar(0), Complex<Scalar>(0, -1), Complex<Scalar>(0, 1), Scalar(0);
  return m;
}

template <typename Scalar = double>
Operator2<Scalar> pauli_z()
{
  Operator2<Scalar> m;
  m << Scalar(1), Scalar(0), Scalar(0), Scalar(-1);
  return m;
}

/**
 * Analyzer direction relative to the quantization axis: polar angle from n
 * and azimuthal angle around it.
 *
 * Any pair of angles is accepted. The stored representation has polar in
 * [0, pi] and azimuthal in [0, 2pi); a polar angle outside [0, pi] is folded
 * back by moving the azimuth by pi, which leaves both projectors unchanged.
 */
template <typename Scalar = double>
class MeasurementDirectionT
{
public:
  MeasurementDirectionT() = default;

  MeasurementDirectionT(Scalar polar, Scalar azimuthal)
  {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    constexpr Scalar two_pi = 2 * pi;
    if (!std::isfinite(static_cast<double>(polar)) || !std::isfinite(static_cast<double>(azimuthal)))
    {
      throw std::invalid_argument("measurement direction angles must be finite");
    }
    Scalar p = std::fmod(polar, two_pi);
    if (p < 0)
    {
      p += two_pi;
    }
    if (p > pi)
    {
      p = two_pi - p;
      azimuthal += pi;
    }
    Scalar a = std::fmod(azimuthal, two_pi);
    if (a < 0)
    {
      a += two_pi;
    }
    if (a >= two_pi)
    {
      a -= two_pi;
    }
    polar_ = p;
    azimuthal_ = a;
  }

  Scalar polar() const { return polar_; }
  Scalar azimuthal() const { return azimuthal_; }

  /// |+dir> = cos(p/2)|up> + sin(p/2) e^{ia}|down>, |-dir> = -sin(p/2)|up> + cos(p/2) e^{ia}|down>.
  Spinor<Scalar> ket(Sign sign) const
  {
    const Scalar c = std::cos(polar_ / 2);
    const Scalar s = std::sin(polar_ / 2);
    const Complex<Scalar> phase = std::polar(Scalar(1), azimuthal_);
    if (sign == Sign::Plus)
    {
      return Spinor<Scalar>(Complex<Scalar>(c), s * phase);
    }
    return Spinor<Scalar>(Complex<Scalar>(-s), c * phase);
  }

private:
  Scalar polar_{0};
  Scalar azimuthal_{0};
};

using MeasurementDirection = MeasurementDirectionT<double>;

template <typename Scalar>
Operator2<Scalar> projector(const MeasurementDirectionT<Scalar>& dir, Sign sign)
{
  const Spinor<Scalar> k = dir.ket(sign);
  return k * k.adjoint();
}

/// Spin observable along dir: P+ - P-.
template <typename Scalar>
Operator2<Scalar> observable(const MeasurementDirectionT<Scalar>& dir)
{
  return projector(dir, Sign::Plus) - projector(dir, Sign::Minus);
}

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
  using Scalar = typename DerivedA::Scalar;
  constexpr int R = (DerivedA::RowsAtCompileTime == Eigen::Dynamic || DerivedB::RowsAtCompileTime == Eigen::Dynamic)
                        ? Eigen::Dynamic
                        : DerivedA::RowsAtCompileTime * DerivedB::RowsAtCompileTime;
  constexpr int C = (DerivedA::ColsAtCompileTime == Eigen::Dynamic || DerivedB::ColsAtCompileTime == Eigen::Dynamic)
                        ? Eigen::Dynamic
                        : DerivedA::ColsAtCompileTime * DerivedB::ColsAtCompileTime;
  Eigen::Matrix<Scalar, R, C> out;
  out.resize(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// amplitudes[2i + j] = left[i] * right[j]
template <typename Scalar>
PairStateT<Scalar> tensor(const SpinStateT<Scalar>& left, const SpinStateT<Scalar>& right)
{
  return PairStateT<Scalar>(kron(left.amplitudes(), right.amplitudes()));
}

template <typename Derived>
typename Derived::RealScalar hermitian_defect(const Eigen::MatrixBase<Derived>& op)
{
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& op)
{
  return op.rows() == op.cols() && hermitian_defect(op) <= kHermitianTolerance;
}

/// <state| op |state> for a Hermitian op. Throws std::invalid_argument otherwise.
template <typename Scalar, int Dim>
Scalar expectation(const StateVector<Scalar, Dim>& state, const Operator<Scalar, Dim>& op)
{
  if (!is_hermitian(op))
  {
    throw std::invalid_argument("expectation value requires a Hermitian operator");
  }
  const Complex<Scalar> value = state.amplitudes().dot(op * state.amplitudes());
  if (std::abs(value.imag()) > Scalar(kUnitTolerance))
  {
    throw std::runtime_error("expectation value has a non-negligible imaginary part");
  }
  return value.real();
}

/// <state| left (x) right |state>
template <typename Scalar>
Scalar pair_expectation(const PairStateT<Scalar>& state, const Operator2<Scalar>& left,
                        const Operator2<Scalar>& right)
{
  if (!is_hermitian(left) || !is_hermitian(right))
  {
    throw std::invalid_argument("pair_expectation requires Hermitian operators");
  }
  return expectation<Scalar, 4>(state, kron(left, right));
}

/// 1 - |<a|b>|; zero exactly when a and b agree up to a global phase.
template <typename DerivedA, typename DerivedB>
auto phase_insensitive_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
  using Real = typename DerivedA::RealScalar;
  if (a.size() != b.size())
  {
    throw std::invalid_argument("phase_insensitive_distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  const Real overlap = std::abs(a.dot(b));
  return std::clamp(Real(1) - overlap, Real(0), Real(1));
}

template <typename Scalar, int DimA, int DimB>
Scalar phase_insensitive_distance(const StateVector<Scalar, DimA>& a, const StateVector<Scalar, DimB>& b)
{
  return phase_insensitive_distance(a.amplitudes(), b.amplitudes());
}

}  // namespace berrybell

#endif  // BERRYBELL_QUANTUM_HPP_
