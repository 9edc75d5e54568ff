#include "berrybell/neutron.hpp"

#include "berrybell/bell.hpp"
#include "berrybell/format.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace berrybell
{

namespace
{

constexpr double kPi = std::numbers::pi;

std::uint64_t draw_binomial(std::mt19937_64& rng, std::uint64_t trials, double p)
{
  if (trials == 0 || p <= 0.0)
  {
    return 0;
  }
  if (p >= 1.0)
  {
    return trials;
  }
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(rng);
}

std::uint64_t draw_poisson(std::mt19937_64& rng, double mean)
{
  if (mean <= 0.0)
  {
    return 0;
  }
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(rng);
}

}  // namespace

InterferometerConfig InterferometerConfig::from_rf_phases(double phi1, double phi2)
{
  if (!std::isfinite(phi1) || !std::isfinite(phi2))
  {
    throw std::invalid_argument("RF phases must be finite");
  }
  return InterferometerConfig(phi1, phi2);
}

InterferometerConfig InterferometerConfig::from_geometric_phase(double gamma_b) { return from_rf_phases(gamma_b, 0.0); }

InterferometerConfig InterferometerConfig::from_two_spin_gamma(double gamma) { return from_geometric_phase(-2.0 * gamma); }

NeutronState prepare_state(const InterferometerConfig& config)
{
  const double r = 1.0 / std::sqrt(2.0);
  const Complex<double> tail = -r * std::polar(1.0, config.gamma_b());
  return NeutronState(PairState::normalized(Pair4cd(r, 0.0, 0.0, tail)));
}

Op2cd path_projector(double chi, Sign sign)
{
  // Same kets as a spin analyzer with zero azimuth.
  return projector(MeasurementDirection(chi, 0.0), sign);
}

Op4cd setting_projector(double chi, const MeasurementDirection& delta, Sign path, Sign spin)
{
  return kron(path_projector(chi, path), projector(delta, spin));
}

OutcomeProbabilities exact_probabilities(const InterferometerConfig& config, double chi,
                                         const MeasurementDirection& delta)
{
  const NeutronState psi = prepare_state(config);
  const MeasurementDirection flipped(delta.polar() + kPi, delta.azimuthal());
  const auto plus_plus = [&](double path_angle, const MeasurementDirection& spin_dir) {
    return expectation<double, 4>(psi.state(), setting_projector(path_angle, spin_dir, Sign::Plus, Sign::Plus));
  };
  return {plus_plus(chi, delta), plus_plus(chi, flipped), plus_plus(chi + kPi, delta), plus_plus(chi + kPi, flipped)};
}

double exact_correlation(const InterferometerConfig& config, double chi, const MeasurementDirection& delta)
{
  const Op2cd path_obs = path_projector(chi, Sign::Plus) - path_projector(chi, Sign::Minus);
  return pair_expectation(prepare_state(config).state(), path_obs, observable(delta));
}

TwoSpinAngles to_two_spin_angles(double chi, const MeasurementDirection& delta)
{
  return {MeasurementDirection(chi, 0.0), MeasurementDirection(kPi - delta.polar(), -delta.azimuthal())};
}

AnalyzerSetting from_two_spin_angles(const MeasurementDirection& a, const MeasurementDirection& b)
{
  double chi = a.polar();
  const bool on_axis = a.polar() == 0.0 || a.polar() == kPi;
  if (!on_axis)
  {
    if (std::abs(std::remainder(a.azimuthal() - kPi, 2.0 * kPi)) < 1e-12)
    {
      chi = -a.polar();
    }
    else if (std::abs(std::remainder(a.azimuthal(), 2.0 * kPi)) >= 1e-12)
    {
      throw std::invalid_argument("path analyzer has no azimuthal freedom: left direction must lie in the x-z plane");
    }
  }
  return {chi, MeasurementDirection(kPi - b.polar(), -b.azimuthal())};
}

CountRecord sample_counts(const OutcomeProbabilities& probabilities, std::uint64_t total, std::uint64_t seed,
                          NoiseModel model)
{
  std::array<double, 4> p{std::max(0.0, probabilities.pp), std::max(0.0, probabilities.pm),
                          std::max(0.0, probabilities.mp), std::max(0.0, probabilities.mm)};
  const double mass = p[0] + p[1] + p[2] + p[3];
  if (!(mass > 0.0) || !std::isfinite(mass))
  {
    throw std::invalid_argument("sample_counts: probabilities must have positive finite mass");
  }
  for (double& v : p)
  {
    v /= mass;
  }

  std::mt19937_64 rng(seed);
  std::array<std::uint64_t, 4> n{};
  if (model == NoiseModel::Multinomial)
  {
    std::uint64_t remaining = total;
    double remaining_mass = 1.0;
    for (std::size_t i = 0; i < 3; ++i)
    {
      const double conditional = remaining_mass > 0.0 ? std::clamp(p[i] / remaining_mass, 0.0, 1.0) : 0.0;
      n[i] = draw_binomial(rng, remaining, conditional);
      remaining -= n[i];
      remaining_mass -= p[i];
    }
    n[3] = remaining;
  }
  else
  {
    for (std::size_t i = 0; i < 4; ++i)
    {
      n[i] = draw_poisson(rng, static_cast<double>(total) * p[i]);
    }
  }

  CountRecord record;
  record.n_pp = n[0];
  record.n_pm = n[1];
  record.n_mp = n[2];
  record.n_mm = n[3];
  record.seed = seed;
  return record;
}

CountRecord simulate_counts(const InterferometerConfig& config, double chi, const MeasurementDirection& delta,
                            std::uint64_t total, std::uint64_t seed, NoiseModel model)
{
  if (total == 0)
  {
    throw std::invalid_argument("simulate_counts: total must be at least 1");
  }
  CountRecord record = sample_counts(exact_probabilities(config, chi, delta), total, seed, model);
  record.gamma_b = config.gamma_b();
  record.chi = chi;
  record.delta = delta;
  return record;
}

double estimate_correlation(const CountRecord& counts)
{
  const std::uint64_t total = counts.total();
  if (total == 0)
  {
    throw std::domain_error("estimate_correlation: no counts recorded");
  }
  const double same = static_cast<double>(counts.n_pp) + static_cast<double>(counts.n_mm);
  const double different = static_cast<double>(counts.n_pm) + static_cast<double>(counts.n_mp);
  return (same - different) / static_cast<double>(total);
}

std::array<AnalyzerSetting, 4> compensated_settings(const InterferometerConfig& config)
{
  const BellSetting s = compensated_setting(BerryParameter(config.two_spin_gamma()));
  return {from_two_spin_angles(s.a, s.b), from_two_spin_angles(s.a, s.b_prime),
          from_two_spin_angles(s.a_prime, s.b), from_two_spin_angles(s.a_prime, s.b_prime)};
}

ChshEstimate estimate_chsh(std::span<const CountRecord, 4> records)
{
  ChshEstimate out{};
  double variance = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
  {
    const double e = estimate_correlation(records[i]);
    out.correlations[i] = e;
    variance += (1.0 - e * e) / static_cast<double>(records[i].total());
  }
  const auto& e = out.correlations;
  out.s = std::abs(e[0] - e[1]) + std::abs(e[2] + e[3]);
  out.sigma = std::sqrt(variance);
  return out;
}

std::string csv_header(char separator)
{
  std::string out;
  for (const char* name : {"seed", "gamma_B", "chi", "delta1", "delta2", "n_pp", "n_pm", "n_mp", "n_mm"})
  {
    if (!out.empty())
    {
      out += separator;
    }
    out += name;
  }
  return out;
}

std::string to_csv_row(const CountRecord& record, char separator)
{
  std::string out = format_number(record.seed);
  for (double v : {record.gamma_b, record.chi, record.delta.polar(), record.delta.azimuthal()})
  {
    out += separator;
    out += format_number(v);
  }
  for (std::uint64_t n : {record.n_pp, record.n_pm, record.n_mp, record.n_mm})
  {
    out += separator;
    out += format_number(n);
  }
  return out;
}

}  // namespace berrybell
