#ifndef BERRYBELL_BERRY_HPP_
#define BERRYBELL_BERRY_HPP_

// Spin-1/2 in a magnetic field of constant magnitude rotating about z:
//
//   H(t) = s * w1 * n(theta; t) . sigma,   n = (sin th cos w0 t, sin th sin w0 t, cos th)
//
// with hbar = 1, s = +1 for the forward field and s = -1 for the antipodal
// (reversed) field used as the second spin-echo stage.

#include "berrybell/quantum.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace berrybell
{

enum class FieldOrientation
{
  Forward,
  Reversed
};

/// Rotating-field parameters. Immutable; validated on construction.
class FieldConfig
{
public:
  /// Warn above this w0/w1.
  static constexpr double kAdiabaticWarnRatio = 0.1;

  FieldConfig(double tilt, double rotation_frequency, double larmor_frequency,
              FieldOrientation orientation = FieldOrientation::Forward);

  /// Time measured in units of 1/w1: larmor_frequency = 1, rotation_frequency = ratio.
  static FieldConfig from_ratio(double tilt, double ratio, FieldOrientation orientation = FieldOrientation::Forward);

  double tilt() const { return tilt_; }
  double rotation_frequency() const { return rotation_frequency_; }
  double larmor_frequency() const { return larmor_frequency_; }
  FieldOrientation orientation() const { return orientation_; }

  /// +1 forward, -1 reversed
  double orientation_sign() const { return orientation_ == FieldOrientation::Forward ? 1.0 : -1.0; }

  double adiabaticity_ratio() const { return rotation_frequency_ / larmor_frequency_; }
  bool adiabaticity_warning() const { return adiabaticity_ratio() > kAdiabaticWarnRatio; }

  /// tau = 2 pi / w0
  double period() const;

  FieldConfig reversed() const;

private:
  double tilt_;
  double rotation_frequency_;
  double larmor_frequency_;
  FieldOrientation orientation_;
};

/// Unit field direction including the orientation sign.
Eigen::Vector3d field_direction(const FieldConfig& config, double t);

Op2cd hamiltonian(const FieldConfig& config, double t);

struct Eigenstates
{
  SpinState up;    ///< |up_n; t>, eigenvalue +w1 (forward) / -w1 (reversed)
  SpinState down;  ///< |down_n; t>
};

/// Instantaneous eigenstates of n(theta; t) . sigma in the sigma_z basis.
Eigenstates eigenstates(const FieldConfig& config, double t);

/// Phases in radians.
struct PhasePair
{
  double geometric{0.0};
  double dynamical{0.0};

  double total() const { return geometric + dynamical; }
};

struct EigenPhases
{
  PhasePair up;
  PhasePair down;
};

/// -pi (1 - cos theta)
double berry_phase_up(double tilt);

/// -pi (1 + cos theta)
double berry_phase_down(double tilt);

/// Phases acquired by |up_n> and |down_n> over one rotation period in the adiabatic limit.
EigenPhases analytic_phases(const FieldConfig& config);

/// Reduce a phase to the representative in (center - pi, center + pi].
double wrap_phase(double phase, double center = 0.0);

/// |a - b| modulo 2 pi, in [0, pi].
double angular_distance(double a, double b);

/// Sampled solution of i d|psi>/dt = H(t)|psi>.
///
/// States are stored as raw amplitudes; RK4 is not norm preserving, so the
/// norm drift stays visible (|norm - 1| is kept below ~1e-9 by recommended_steps()).
struct Trajectory
{
  std::vector<double> times;
  std::vector<Spinor2cd> states;
  FieldConfig config;

  const Spinor2cd& final_state() const { return states.back(); }
  std::size_t size() const { return times.size(); }
};

inline constexpr std::size_t kMinStepsPerPeriod = 1000;

/// Oracle default for w0/w1.
inline constexpr double kDefaultAdiabaticRatio = 1.0 / 2000.0;

/// Step count that keeps the accumulated RK4 norm loss over `duration`
/// below 1e-10 (and w1 h <= 0.02), never below the per-period floor.
std::size_t recommended_steps(const FieldConfig& config, double duration);

/// Record stride giving roughly 200 samples per Larmor cycle at the given step count.
std::size_t recommended_stride(const FieldConfig& config, double duration, std::size_t steps);

/**
 * Fixed-step classical RK4 integration of the Schrodinger equation starting
 * at t = 0.
 *
 * Every `record_stride`-th state is stored, plus the final one. Throws
 * std::invalid_argument when duration <= 0, record_stride == 0 or when
 * steps falls below kMinStepsPerPeriod per rotation period.
 */
Trajectory evolve(const FieldConfig& config, const SpinState& initial, double duration, std::size_t steps,
                  std::size_t record_stride = 1);

/// -integral <H> dt over the stored samples (trapezoidal, normalized expectation).
double dynamical_phase(const Trajectory& trajectory);

/// Thrown by extract_phases when the evolution did not close (up to a phase).
class NonCyclicEvolution : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Cyclicity threshold on phase_insensitive_distance(final, reference).
inline constexpr double kCyclicTolerance = 1e-2;

/**
 * Split the phase of a closed evolution into dynamical and geometric parts.
 *
 * total = arg <reference|final>, dynamical = sum of dynamical_phase over the
 * segments, geometric = total - dynamical. The geometric phase is only
 * defined mod 2 pi; the representative closest to `branch_hint` is returned.
 */
PhasePair extract_phases(std::span<const Trajectory> segments, const SpinState& reference,
                         double branch_hint = -std::numbers::pi);

PhasePair extract_phases(const Trajectory& trajectory, const SpinState& reference,
                         double branch_hint = -std::numbers::pi);

enum class EchoMode
{
  FullTwoPeriods,
  TwoHalfPeriods
};

/// Net phases of the two-stage echo: forward field, then the antipodal field, same duration.
EigenPhases spin_echo(const FieldConfig& config, EchoMode mode);

struct EchoOracle
{
  EigenPhases phases;
  double max_norm_defect{0.0};
};

/**
 * Integrate both echo stages for |up_n> and |down_n> and extract the net
 * phases. Only full_two_periods is a closed loop; TwoHalfPeriods returns
 * std::nullopt. `steps_per_stage == 0` selects recommended_steps().
 */
std::optional<EchoOracle> spin_echo_oracle(const FieldConfig& config, EchoMode mode,
                                           std::size_t steps_per_stage = 0);

/// One-period oracle: evolve each eigenstate for tau and extract its phases.
EchoOracle single_period_oracle(const FieldConfig& config, std::size_t steps = 0);

}  // namespace berrybell

#endif  // BERRYBELL_BERRY_HPP_
