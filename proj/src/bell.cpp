#include "berrybell/bell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace berrybell
{

namespace
{

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Zero-azimuth CHSH pieces with a = 0; c = cos 2 gamma.
struct PolarTerms
{
  double f1;
  double f2;
};

PolarTerms polar_terms(double c, double alpha_prime, double beta, double beta_prime)
{
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cp = std::cos(beta_prime), sp = std::sin(beta_prime);
  const double ca = std::cos(alpha_prime), sa = std::sin(alpha_prime);
  return {cp - cb, -ca * (cb + cp) - c * sa * (sb + sp)};
}

// Smooth surrogate sigma1 f1 + sigma2 f2 with its gradient and Hessian in (alpha', beta, beta').
struct Surrogate
{
  double c;
  double sigma1;
  double sigma2;

  double value(const Eigen::Vector3d& x) const
  {
    const PolarTerms t = polar_terms(c, x(0), x(1), x(2));
    return sigma1 * t.f1 + sigma2 * t.f2;
  }

  void derivatives(const Eigen::Vector3d& x, Eigen::Vector3d& grad, Eigen::Matrix3d& hess) const
  {
    const double ca = std::cos(x(0)), sa = std::sin(x(0));
    const double cb = std::cos(x(1)), sb = std::sin(x(1));
    const double cp = std::cos(x(2)), sp = std::sin(x(2));
    const double X = cb + cp;
    const double Y = sb + sp;

    const Eigen::Vector3d df1(0.0, sb, -sp);
    const Eigen::Vector3d df2(sa * X - c * ca * Y, ca * sb - c * sa * cb, ca * sp - c * sa * cp);
    Eigen::Matrix3d hf1 = Eigen::Matrix3d::Zero();
    hf1(1, 1) = cb;
    hf1(2, 2) = -cp;
    Eigen::Matrix3d hf2;
    hf2(0, 0) = ca * X + c * sa * Y;
    hf2(0, 1) = hf2(1, 0) = -sa * sb - c * ca * cb;
    hf2(0, 2) = hf2(2, 0) = -sa * sp - c * ca * cp;
    hf2(1, 1) = ca * cb + c * sa * sb;
    hf2(2, 2) = ca * cp + c * sa * sp;
    hf2(1, 2) = hf2(2, 1) = 0.0;

    grad = sigma1 * df1 + sigma2 * df2;
    hess = sigma1 * hf1 + sigma2 * hf2;
  }
};

template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol = 1e-12)
{
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol)
  {
    if (f1 < f2)
    {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    else
    {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

Eigen::Vector3d refine(const Surrogate& objective, Eigen::Vector3d x, double bracket, const GridOptions& options)
{
  for (int sweep = 0; sweep < options.golden_sweeps; ++sweep)
  {
    for (int axis = 0; axis < 3; ++axis)
    {
      Eigen::Vector3d probe = x;
      const auto along = [&](double v) {
        probe(axis) = v;
        return objective.value(probe);
      };
      const double best = golden_section_max(along, x(axis) - bracket, x(axis) + bracket);
      Eigen::Vector3d candidate = x;
      candidate(axis) = best;
      if (objective.value(candidate) >= objective.value(x))
      {
        x = candidate;
      }
    }
  }

  Eigen::Vector3d grad;
  Eigen::Matrix3d hess;
  for (int it = 0; it < options.newton_iterations; ++it)
  {
    objective.derivatives(x, grad, hess);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(hess);
    if (eig.eigenvalues().maxCoeff() >= -1e-12)
    {
      break;  // flat or saddle: no well-defined Newton step
    }
    const Eigen::Vector3d step = -hess.ldlt().solve(grad);
    if (!step.allFinite() || step.norm() > 20.0 * bracket)
    {
      break;
    }
    const Eigen::Vector3d next = x + step;
    if (objective.value(next) < objective.value(x) - 1e-15)
    {
      break;
    }
    x = next;
    if (step.norm() < 1e-13)
    {
      break;
    }
  }
  return x;
}

}  // namespace

BerryParameter::BerryParameter(double gamma) : gamma_(gamma)
{
  if (!std::isfinite(gamma) || std::abs(gamma) > 2.0 * kPi)
  {
    throw std::invalid_argument("Berry phase must satisfy |gamma| <= 2 pi");
  }
}

BerryParameter BerryParameter::from_tilt(double tilt)
{
  if (!(tilt >= 0.0 && tilt <= kPi))
  {
    throw std::invalid_argument("tilt must lie in [0, pi]");
  }
  return BerryParameter(-kPi * (1.0 - std::cos(tilt)));
}

double BerryParameter::tilt() const
{
  return std::acos(std::clamp(1.0 - std::abs(gamma_) / kPi, -1.0, 1.0));
}

PairState singlet() { return PairState(Pair4cd(0.0, kInvSqrt2, -kInvSqrt2, 0.0)); }

PairState triplet_zero() { return PairState(Pair4cd(0.0, kInvSqrt2, kInvSqrt2, 0.0)); }

PairState imprint_berry(const PairState& state, BerryParameter gamma)
{
  const Complex<double> phase = std::polar(1.0, -2.0 * gamma.gamma());
  Pair4cd v = state.amplitudes();
  v(2) *= phase;
  v(3) *= phase;
  return PairState::normalized(v);
}

double correlation(BerryParameter gamma, const MeasurementDirection& a, const MeasurementDirection& b)
{
  return -std::cos(a.polar()) * std::cos(b.polar()) -
         std::cos(a.azimuthal() - b.azimuthal() + 2.0 * gamma.gamma()) * std::sin(a.polar()) * std::sin(b.polar());
}

double joint_probability(BerryParameter gamma, const MeasurementDirection& a, const MeasurementDirection& b,
                         Sign left, Sign right)
{
  // Flipping a sign maps the polar angle p -> p + pi, i.e. cos p and sin p change sign.
  const double s = sign_value(left) * sign_value(right);
  return 0.25 * (1.0 + s * correlation(gamma, a, b));
}

SValue s_function(BerryParameter gamma, const BellSetting& setting)
{
  const double f1 = correlation(gamma, setting.a, setting.b) - correlation(gamma, setting.a, setting.b_prime);
  const double f2 =
      correlation(gamma, setting.a_prime, setting.b) + correlation(gamma, setting.a_prime, setting.b_prime);
  return {std::abs(f1) + std::abs(f2), f1, f2};
}

BellSetting standard_setting()
{
  return {MeasurementDirection(0.0, 0.0), MeasurementDirection(kPi / 2.0, 0.0), MeasurementDirection(kPi / 4.0, 0.0),
          MeasurementDirection(3.0 * kPi / 4.0, 0.0)};
}

BellSetting compensated_setting(BerryParameter gamma)
{
  const double shift = 2.0 * gamma.gamma();
  return {MeasurementDirection(0.0, 0.0), MeasurementDirection(kPi / 2.0, 0.0),
          MeasurementDirection(kPi / 4.0, shift), MeasurementDirection(3.0 * kPi / 4.0, shift)};
}

BellSetting polar_setting(const PolarBellAngles& angles)
{
  return {MeasurementDirection(0.0, 0.0), MeasurementDirection(angles.alpha_prime, 0.0),
          MeasurementDirection(angles.beta, 0.0), MeasurementDirection(angles.beta_prime, 0.0)};
}

SValue polar_s_function(BerryParameter gamma, const PolarBellAngles& angles)
{
  const PolarTerms t = polar_terms(std::cos(2.0 * gamma.gamma()), angles.alpha_prime, angles.beta, angles.beta_prime);
  return {std::abs(t.f1) + std::abs(t.f2), t.f1, t.f2};
}

PolarBellAngles bell_angles(BerryParameter gamma, SignBranch branch)
{
  const double root = std::atan(std::cos(2.0 * gamma.gamma()));
  const double beta = branch == SignBranch::F1NegF2Neg ? root : -root;
  return {kPi / 2.0, beta, kPi - beta};
}

double smax_closed_form(BerryParameter gamma)
{
  const double c = std::cos(2.0 * gamma.gamma());
  return 2.0 * std::sqrt(1.0 + c * c);
}

PolarGridResult polar_grid_search(BerryParameter gamma, const GridOptions& options)
{
  if (!(options.resolution_deg > 0.0) || options.resolution_deg > 45.0)
  {
    throw std::invalid_argument("grid resolution must lie in (0, 45] degrees");
  }
  const double h = options.resolution_deg * kPi / 180.0;
  const auto n_alpha = static_cast<std::size_t>(std::lround(kPi / h));
  const auto n_beta = static_cast<std::size_t>(std::lround(2.0 * kPi / h));
  const double beta_origin = -kPi / 2.0;
  const double c = std::cos(2.0 * gamma.gamma());

  std::vector<double> ca(n_alpha), csa(n_alpha), cb(n_beta), sb(n_beta);
  for (std::size_t k = 0; k < n_alpha; ++k)
  {
    ca[k] = std::cos(static_cast<double>(k) * h);
    csa[k] = std::sin(static_cast<double>(k) * h);
  }
  for (std::size_t i = 0; i < n_beta; ++i)
  {
    cb[i] = std::cos(beta_origin + static_cast<double>(i) * h);
    sb[i] = std::sin(beta_origin + static_cast<double>(i) * h);
  }

  struct Cell
  {
    double value = -1e300;
    std::size_t alpha = 0, beta = 0, beta_prime = 0;
  };
  Cell best_all, best_pp, best_pm;

  // With v = X cos a' + c Y sin a', f2 = -v.
  const auto first_index_of = [&](double X, double cY, double target) {
    std::size_t arg = 0;
    double gap = 1e300;
    for (std::size_t k = 0; k < n_alpha; ++k)
    {
      const double d = std::abs(X * ca[k] + cY * csa[k] - target);
      if (d < gap)
      {
        gap = d;
        arg = k;
      }
    }
    return arg;
  };

  // Lowest (beta, beta') index wins ties, as in a plain row-major scan.
  const auto better = [](double value, std::size_t i, std::size_t j, const Cell& best) {
    return value > best.value || (value == best.value && (i < best.beta || (i == best.beta && j < best.beta_prime)));
  };
  const auto consider = [&](std::size_t i, std::size_t j, double f1, double X, double cY, double vmax, double vmin) {
    const double pp = -f1 + vmax;
    const double pm = -f1 - vmin;
    const double all = std::abs(f1) + std::max(std::abs(vmax), std::abs(vmin));
    if (better(pp, i, j, best_pp))
    {
      best_pp = {pp, first_index_of(X, cY, vmax), i, j};
    }
    if (better(pm, i, j, best_pm))
    {
      best_pm = {pm, first_index_of(X, cY, vmin), i, j};
    }
    if (better(all, i, j, best_all))
    {
      best_all = {all, first_index_of(X, cY, std::abs(vmax) >= std::abs(vmin) ? vmax : vmin), i, j};
    }
  };

  // X and Y are symmetric in (beta, beta'); only f1 changes sign under the swap.
  const double* ca_data = ca.data();
  const double* csa_data = csa.data();
  for (std::size_t i = 0; i < n_beta; ++i)
  {
    for (std::size_t j = i; j < n_beta; ++j)
    {
      const double f1 = cb[j] - cb[i];
      const double X = cb[i] + cb[j];
      const double cY = c * (sb[i] + sb[j]);
      double vmax = -1e300, vmin = 1e300;
#pragma omp simd reduction(max : vmax) reduction(min : vmin)
      for (std::size_t k = 0; k < n_alpha; ++k)
      {
        const double v = X * ca_data[k] + cY * csa_data[k];
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
      }
      consider(i, j, f1, X, cY, vmax, vmin);
      if (j != i)
      {
        consider(j, i, -f1, X, cY, vmax, vmin);
      }
    }
  }

  const auto point = [&](const Cell& cell) {
    return Eigen::Vector3d(static_cast<double>(cell.alpha) * h, beta_origin + static_cast<double>(cell.beta) * h,
                           beta_origin + static_cast<double>(cell.beta_prime) * h);
  };
  const auto finish = [&](const Cell& cell, double sigma1, double sigma2) {
    const Surrogate objective{c, sigma1, sigma2};
    const Eigen::Vector3d x = refine(objective, point(cell), h, options);
    const PolarBellAngles angles{x(0), x(1), x(2)};
    return GridMaximum{polar_s_function(gamma, angles).s, angles};
  };

  PolarGridResult out;
  out.f1neg_f2neg = finish(best_pp, -1.0, -1.0);
  out.f1neg_f2pos = finish(best_pm, -1.0, 1.0);
  {
    const Eigen::Vector3d x = point(best_all);
    const PolarTerms t = polar_terms(c, x(0), x(1), x(2));
    out.overall = finish(best_all, t.f1 < 0.0 ? -1.0 : 1.0, t.f2 < 0.0 ? -1.0 : 1.0);
  }
  return out;
}

double max_s(BerryParameter gamma, SMaxMethod method)
{
  if (method == SMaxMethod::Analytic)
  {
    return polar_s_function(gamma, bell_angles(gamma, SignBranch::F1NegF2Neg)).s;
  }
  return polar_grid_search(gamma).overall.s;
}

}  // namespace berrybell
