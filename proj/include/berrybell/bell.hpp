#ifndef BERRYBELL_BELL_HPP_
#define BERRYBELL_BELL_HPP_

// Singlet with a Berry phase imprinted on the left particle and the CHSH
// quantities built on it.

#include "berrybell/quantum.hpp"

#include <array>

namespace berrybell
{

/// Imprinted Berry phase gamma (= gamma_+ of the left particle), |gamma| <= 2 pi.
class BerryParameter
{
public:
  explicit BerryParameter(double gamma);

  /// gamma = -pi (1 - cos tilt)
  static BerryParameter from_tilt(double tilt);

  double gamma() const { return gamma_; }

  /// Field tilt producing |gamma|: arccos(1 - |gamma| / pi).
  double tilt() const;

private:
  double gamma_;
};

struct BellSetting
{
  MeasurementDirection a;
  MeasurementDirection a_prime;
  MeasurementDirection b;
  MeasurementDirection b_prime;
};

/// (|up down> - |down up>) / sqrt 2
PairState singlet();

/// (|up down> + |down up>) / sqrt 2
PairState triplet_zero();

/**
 * Apply the echo phases of the left particle, e^{i gamma} on |up_n> and
 * e^{-i gamma} on |down_n>, and drop the global e^{i gamma}. On the singlet
 * this gives (|up down> - e^{-2 i gamma} |down up>) / sqrt 2. Other states
 * are transformed by the same single-particle phase gate.
 */
PairState imprint_berry(const PairState& state, BerryParameter gamma);

/// Closed-form P(left = sign_a along a, right = sign_b along b) on the imprinted singlet.
double joint_probability(BerryParameter gamma, const MeasurementDirection& a, const MeasurementDirection& b,
                         Sign left, Sign right);

/// -cos a1 cos b1 - cos(a2 - b2 + 2 gamma) sin a1 sin b1
double correlation(BerryParameter gamma, const MeasurementDirection& a, const MeasurementDirection& b);

/// S = |f1| + |f2| with f1 = E(a,b) - E(a,b'), f2 = E(a',b) + E(a',b').
struct SValue
{
  double s;
  double f1;
  double f2;
};

SValue s_function(BerryParameter gamma, const BellSetting& setting);

/// a = 0, a' = pi/2, b = pi/4, b' = 3pi/4, all azimuths zero.
BellSetting standard_setting();

/// Standard polar angles with the right-hand measurement plane rotated by 2 gamma.
BellSetting compensated_setting(BerryParameter gamma);

enum class SignBranch
{
  F1NegF2Neg,  ///< beta1 = +arctan(cos 2 gamma)
  F1NegF2Pos   ///< beta1 = -arctan(cos 2 gamma)
};

/// Polar angles of the zero-azimuth CHSH setting with a fixed at the quantization axis.
struct PolarBellAngles
{
  double alpha_prime;
  double beta;
  double beta_prime;
};

BellSetting polar_setting(const PolarBellAngles& angles);

/// S at zero azimuths and a = 0, without building MeasurementDirections.
SValue polar_s_function(BerryParameter gamma, const PolarBellAngles& angles);

/// Stationary point of the zero-azimuth S-function on the requested branch.
PolarBellAngles bell_angles(BerryParameter gamma, SignBranch branch);

/// 2 sqrt(1 + cos^2 2 gamma)
double smax_closed_form(BerryParameter gamma);

struct GridOptions
{
  double resolution_deg{0.5};
  int golden_sweeps{3};
  int newton_iterations{50};
};

struct GridMaximum
{
  double s{0.0};
  PolarBellAngles angles{};
};

struct PolarGridResult
{
  GridMaximum overall;
  GridMaximum f1neg_f2neg;
  GridMaximum f1neg_f2pos;
};

/**
 * Brute-force maximization of the zero-azimuth S-function over
 * alpha'_1 in [0, pi) and beta1, beta'_1 in [-pi/2, 3pi/2), followed by
 * golden-section sweeps and a guarded Newton polish from the best cell.
 *
 * The branch maxima are maximizers of -f1 - f2 and -f1 + f2, which equal S
 * on their sign region and lie below S elsewhere. Ties keep the lowest
 * grid index, so results are run-to-run identical.
 */
PolarGridResult polar_grid_search(BerryParameter gamma, const GridOptions& options = {});

enum class SMaxMethod
{
  Analytic,
  Grid
};

double max_s(BerryParameter gamma, SMaxMethod method);

}  // namespace berrybell

#endif  // BERRYBELL_BELL_HPP_
