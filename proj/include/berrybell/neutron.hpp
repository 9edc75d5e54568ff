#ifndef BERRYBELL_NEUTRON_HPP_
#define BERRYBELL_NEUTRON_HPP_

// Single-neutron path (x) spin model of the interferometer: beam path
// {|I>, |II>} is the left factor, spin {|up_n>, |down_n>} the right one.

#include "berrybell/quantum.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace berrybell
{

/// Path (x) spin state, ordering [I up, I down, II up, II down].
class NeutronState
{
public:
  explicit NeutronState(const PairState& state) : state_(state) {}

  const PairState& state() const { return state_; }
  const Pair4cd& amplitudes() const { return state_.amplitudes(); }

private:
  PairState state_;
};

/// Geometric phase set by the two RF flippers: gamma_B = phi1 - phi2.
class InterferometerConfig
{
public:
  static InterferometerConfig from_rf_phases(double phi1, double phi2);

  /// phi1 = gamma_B, phi2 = 0
  static InterferometerConfig from_geometric_phase(double gamma_b);

  /// Config whose state matches the imprinted singlet with Berry phase gamma (gamma_B = -2 gamma).
  static InterferometerConfig from_two_spin_gamma(double gamma);

  double rf_phase_1() const { return phi1_; }
  double rf_phase_2() const { return phi2_; }
  double gamma_b() const { return gamma_b_; }

  /// gamma = -gamma_B / 2
  double two_spin_gamma() const { return -0.5 * gamma_b_; }

private:
  InterferometerConfig(double phi1, double phi2) : phi1_(phi1), phi2_(phi2), gamma_b_(phi1 - phi2) {}

  double phi1_;
  double phi2_;
  double gamma_b_;
};

/// (|I> |up_n> - e^{i gamma_B} |II> |down_n>) / sqrt 2
NeutronState prepare_state(const InterferometerConfig& config);

/// Path phase shift chi and spin analyzer direction delta.
struct AnalyzerSetting
{
  double chi;
  MeasurementDirection delta;
};

/// |+p> = cos(chi/2)|I> + sin(chi/2)|II>, |-p> = -sin(chi/2)|I> + cos(chi/2)|II>
Op2cd path_projector(double chi, Sign sign);

/// P^p(chi) (x) P^s(delta)
Op4cd setting_projector(double chi, const MeasurementDirection& delta, Sign path, Sign spin);

struct OutcomeProbabilities
{
  double pp;
  double pm;
  double mp;
  double mm;

  double sum() const { return pp + pm + mp + mm; }

  /// (pp - pm - mp + mm) / sum
  double correlation() const { return (pp - pm - mp + mm) / sum(); }
};

/// The four joint probabilities, each evaluated as a "++" projection at
/// shifted angles: chi -> chi + pi for path "-", delta1 -> delta1 + pi for spin "-".
OutcomeProbabilities exact_probabilities(const InterferometerConfig& config, double chi,
                                         const MeasurementDirection& delta);

/// <A^p(chi) (x) B^s(delta)> from the matrix route.
double exact_correlation(const InterferometerConfig& config, double chi, const MeasurementDirection& delta);

/// Two-spin analyzer pair equivalent to (chi, delta): a = (chi, 0), b = (pi - delta1, -delta2).
/// The spin relabel up <-> down maps the path-spin state onto the imprinted singlet.
struct TwoSpinAngles
{
  MeasurementDirection a;
  MeasurementDirection b;
};

TwoSpinAngles to_two_spin_angles(double chi, const MeasurementDirection& delta);

/// Inverse of to_two_spin_angles for a left direction with zero azimuth.
AnalyzerSetting from_two_spin_angles(const MeasurementDirection& a, const MeasurementDirection& b);

enum class NoiseModel
{
  Multinomial,  ///< fixed total split over the four outcomes
  Poisson       ///< independent channels with means total * p
};

struct CountRecord
{
  std::uint64_t n_pp{0};
  std::uint64_t n_pm{0};
  std::uint64_t n_mp{0};
  std::uint64_t n_mm{0};
  double gamma_b{0.0};
  double chi{0.0};
  MeasurementDirection delta;
  std::uint64_t seed{0};

  std::uint64_t total() const { return n_pp + n_pm + n_mp + n_mm; }

  friend bool operator==(const CountRecord& a, const CountRecord& b)
  {
    return a.n_pp == b.n_pp && a.n_pm == b.n_pm && a.n_mp == b.n_mp && a.n_mm == b.n_mm && a.gamma_b == b.gamma_b &&
           a.chi == b.chi && a.delta.polar() == b.delta.polar() && a.delta.azimuthal() == b.delta.azimuthal() &&
           a.seed == b.seed;
  }
};

/// Draw counts from the given outcome probabilities with a std::mt19937_64 seeded by `seed`.
CountRecord sample_counts(const OutcomeProbabilities& probabilities, std::uint64_t total, std::uint64_t seed,
                          NoiseModel model = NoiseModel::Multinomial);

/// Simulated detector record for one setting. Throws std::invalid_argument for total == 0.
CountRecord simulate_counts(const InterferometerConfig& config, double chi, const MeasurementDirection& delta,
                            std::uint64_t total, std::uint64_t seed, NoiseModel model = NoiseModel::Multinomial);

/// (N++ - N+- - N-+ + N--) / (N++ + N+- + N-+ + N--). Throws std::domain_error on zero counts.
double estimate_correlation(const CountRecord& counts);

/// Four CHSH settings in the order (a,b), (a,b'), (a',b), (a',b') that reach 2 sqrt 2 for this config.
std::array<AnalyzerSetting, 4> compensated_settings(const InterferometerConfig& config);

struct ChshEstimate
{
  double s;
  double sigma;  ///< 1 sigma from the per-setting variances (1 - E^2) / N
  std::array<double, 4> correlations;
};

/// S = |E1 - E2| + |E3 + E4| from four records in CHSH order.
ChshEstimate estimate_chsh(std::span<const CountRecord, 4> records);

/// seed, gamma_B, chi, delta1, delta2, n_pp, n_pm, n_mp, n_mm (angles in radians).
std::string csv_header(char separator = ',');
std::string to_csv_row(const CountRecord& record, char separator = ',');

}  // namespace berrybell

#endif  // BERRYBELL_NEUTRON_HPP_
