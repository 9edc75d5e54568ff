#include "cli.hpp"

#include "berrybell/bell.hpp"
#include "berrybell/berry.hpp"
#include "berrybell/format.hpp"
#include "berrybell/neutron.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace berrybell::cli
{

namespace
{

constexpr double kPi = std::numbers::pi;

/// Input problem that maps to exit code 1.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions
{
  std::string out_path;
  std::uint64_t seed{1};
  std::string format{"csv"};

  char separator() const { return format == "tsv" ? '\t' : ','; }
};

/// Stream for report output: --out file when given, otherwise the caller's stream.
class OutputSink
{
public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
  {
    if (!path.empty())
    {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_)
      {
        throw InputError("cannot open output file '" + path + "' for writing");
      }
      stream_ = file_.get();
    }
  }

  std::ostream& stream() { return *stream_; }

  void finish()
  {
    stream_->flush();
    if (!*stream_)
    {
      throw InputError("failed to write output");
    }
  }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::string join(const std::vector<std::string>& fields, char separator)
{
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i)
  {
    if (i != 0)
    {
      line += separator;
    }
    line += fields[i];
  }
  return line;
}

void write_kv(std::ostream& os, const std::string& key, double value, const std::string& note = {})
{
  os << key << " = " << format_number(value);
  if (!note.empty())
  {
    os << "  # " << note;
  }
  os << '\n';
}

// ---------------------------------------------------------------- phases

struct PhasesOptions
{
  double theta_deg{0.0};
  std::optional<double> ratio;
  std::string mode{"full"};
  double tolerance{5e-3};
};

int cmd_phases(const PhasesOptions& opt, const GlobalOptions& global, std::ostream& out, std::ostream& err)
{
  if (!(opt.theta_deg >= 0.0 && opt.theta_deg <= 90.0))
  {
    throw InputError("--theta must lie in [0, 90] degrees");
  }
  if (opt.ratio && !(*opt.ratio > 0.0 && std::isfinite(*opt.ratio)))
  {
    throw InputError("--ratio must be positive");
  }
  const double theta = degrees_to_radians(opt.theta_deg);
  const EchoMode mode = opt.mode == "half" ? EchoMode::TwoHalfPeriods : EchoMode::FullTwoPeriods;
  const FieldConfig config = FieldConfig::from_ratio(theta, opt.ratio.value_or(kDefaultAdiabaticRatio));
  if (config.adiabaticity_warning())
  {
    err << "warning: w0/w1 = " << format_number(config.adiabaticity_ratio())
        << " exceeds 0.1; the evolution is not adiabatic\n";
  }

  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  const EigenPhases single = analytic_phases(config);
  const EigenPhases echo = spin_echo(config, mode);

  write_kv(os, "theta_deg", opt.theta_deg);
  write_kv(os, "ratio", config.adiabaticity_ratio(), opt.ratio ? "" : "default");
  write_kv(os, "gamma_plus", single.up.geometric, "one period, up_n");
  write_kv(os, "gamma_minus", single.down.geometric, "one period, down_n");
  write_kv(os, "dynamical_plus", single.up.dynamical);
  write_kv(os, "dynamical_minus", single.down.dynamical);
  os << "mode = " << (mode == EchoMode::FullTwoPeriods ? "full" : "half") << '\n';
  write_kv(os, "gamma", echo.up.geometric, "net echo phase on up_n");
  write_kv(os, "gamma_down", echo.down.geometric, "net echo phase on down_n");
  write_kv(os, "net_dynamical", echo.up.dynamical);

  int code = kSuccess;
  if (opt.ratio)
  {
    const EchoOracle oracle = single_period_oracle(config);
    const double residual_up = angular_distance(oracle.phases.up.geometric, single.up.geometric);
    const double residual_down = angular_distance(oracle.phases.down.geometric, single.down.geometric);
    write_kv(os, "oracle_gamma_plus", oracle.phases.up.geometric);
    write_kv(os, "oracle_gamma_minus", oracle.phases.down.geometric);
    write_kv(os, "oracle_residual_plus", residual_up);
    write_kv(os, "oracle_residual_minus", residual_down);
    write_kv(os, "oracle_norm_defect", oracle.max_norm_defect);
    double worst = std::max(residual_up, residual_down);

    if (const auto echo_oracle = spin_echo_oracle(config, mode))
    {
      const double geometric_error = std::max(angular_distance(echo_oracle->phases.up.geometric, echo.up.geometric),
                                              angular_distance(echo_oracle->phases.down.geometric, echo.down.geometric));
      const double dynamical_residue =
          std::max(std::abs(echo_oracle->phases.up.dynamical), std::abs(echo_oracle->phases.down.dynamical));
      write_kv(os, "echo_oracle_gamma", echo_oracle->phases.up.geometric);
      write_kv(os, "echo_geometric_residual", geometric_error);
      write_kv(os, "echo_dynamical_residue", dynamical_residue);
      worst = std::max({worst, geometric_error, dynamical_residue});
    }
    else
    {
      os << "echo_oracle = not applicable  # half-period stages are not closed loops\n";
    }
    write_kv(os, "oracle_residual", worst);
    write_kv(os, "tolerance", opt.tolerance);
    if (worst > opt.tolerance)
    {
      err << "oracle residual " << format_number(worst) << " exceeds tolerance " << format_number(opt.tolerance)
          << '\n';
      code = kToleranceViolation;
    }
  }
  sink.finish();
  return code;
}

// ------------------------------------------------------------ sweep-smax

struct SweepOptions
{
  std::string parameter{"gamma"};
  double start{0.0};
  double stop{180.0};
  int points{181};
  std::string method{"both"};
  double resolution_deg{0.5};
  std::string svg_path;
};

struct SweepRow
{
  double gamma;
  double theta;
  double smax_analytic;
  double smax_grid;
  PolarBellAngles pp;
  PolarBellAngles pm;
};

void write_svg(const std::string& path, const std::vector<SweepRow>& rows)
{
  std::ofstream svg(path, std::ios::binary | std::ios::trunc);
  if (!svg)
  {
    throw InputError("cannot open plot file '" + path + "' for writing");
  }
  const double width = 640.0, height = 400.0, margin = 50.0;
  const double g0 = rows.front().gamma, g1 = rows.back().gamma;
  const double s_lo = 0.0, s_hi = 3.0;
  const auto x_of = [&](double g) { return margin + (g - g0) / (g1 - g0) * (width - 2 * margin); };
  const auto y_of = [&](double s) { return height - margin - (s - s_lo) / (s_hi - s_lo) * (height - 2 * margin); };
  const auto polyline = [&](auto value, const char* colour) {
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const SweepRow& r : rows)
    {
      const double v = value(r);
      if (!std::isnan(v))
      {
        svg << format_number(x_of(r.gamma)) << ',' << format_number(y_of(v)) << ' ';
      }
    }
    svg << "\"/>\n";
  };
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << y_of(2.0) << "\" x2=\"" << width - margin << "\" y2=\""
      << y_of(2.0) << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  polyline([](const SweepRow& r) { return r.smax_analytic; }, "black");
  polyline([](const SweepRow& r) { return r.smax_grid; }, "red");
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">|gamma| (rad)</text>\n";
  svg << "<text x=\"12\" y=\"" << height / 2 << "\" transform=\"rotate(-90 12 " << height / 2
      << ")\" text-anchor=\"middle\">S max</text>\n";
  svg << "</svg>\n";
}

int cmd_sweep_smax(const SweepOptions& opt, const GlobalOptions& global, std::ostream& out)
{
  if (opt.parameter == "ratio")
  {
    throw InputError("sweep-smax sweeps gamma or theta; ratio does not enter the S-function");
  }
  if (!(opt.start < opt.stop))
  {
    throw InputError("--start must be smaller than --stop");
  }
  if (opt.points < 2)
  {
    throw InputError("--points must be at least 2");
  }
  if (opt.parameter == "theta" && !(opt.start >= 0.0 && opt.stop <= 180.0))
  {
    throw InputError("theta sweeps must stay within [0, 180] degrees");
  }
  if (opt.parameter == "gamma" && !(opt.start >= -360.0 && opt.stop <= 360.0))
  {
    throw InputError("gamma sweeps must stay within [-360, 360] degrees");
  }
  const bool want_grid = opt.method != "analytic";
  const bool want_analytic = opt.method != "grid";

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(opt.points));
  for (int i = 0; i < opt.points; ++i)
  {
    const double value_deg = opt.start + (opt.stop - opt.start) * i / (opt.points - 1);
    const BerryParameter gamma = opt.parameter == "theta"
                                     ? BerryParameter(std::abs(BerryParameter::from_tilt(degrees_to_radians(value_deg)).gamma()))
                                     : BerryParameter(degrees_to_radians(value_deg));
    SweepRow row{gamma.gamma(), gamma.tilt(), std::nan(""), std::nan(""),
                 bell_angles(gamma, SignBranch::F1NegF2Neg), bell_angles(gamma, SignBranch::F1NegF2Pos)};
    if (want_analytic)
    {
      row.smax_analytic = max_s(gamma, SMaxMethod::Analytic);
    }
    if (want_grid)
    {
      GridOptions grid;
      grid.resolution_deg = opt.resolution_deg;
      row.smax_grid = polar_grid_search(gamma, grid).overall.s;
    }
    rows.push_back(row);
  }

  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  const char sep = global.separator();
  os << join({"gamma", "gamma_deg", "theta", "theta_deg", "smax_analytic", "smax_grid", "beta1_branch_pp",
              "beta1_branch_pm", "beta1p", "alpha1p"},
             sep)
     << '\n';
  for (const SweepRow& r : rows)
  {
    os << join({format_number(r.gamma), format_number(radians_to_degrees(r.gamma)), format_number(r.theta),
                format_number(radians_to_degrees(r.theta)), format_number(r.smax_analytic),
                format_number(r.smax_grid), format_number(r.pp.beta), format_number(r.pm.beta),
                format_number(r.pp.beta_prime), format_number(r.pp.alpha_prime)},
               sep)
       << '\n';
  }
  sink.finish();
  if (!opt.svg_path.empty())
  {
    write_svg(opt.svg_path, rows);
  }
  return kSuccess;
}

// ----------------------------------------------------------- bell-angles

struct BellAnglesOptions
{
  std::optional<double> gamma_deg;
  std::optional<double> theta_deg;
  std::string branch{"both"};
};

BerryParameter gamma_from(const std::optional<double>& gamma_deg, const std::optional<double>& theta_deg)
{
  if (gamma_deg && theta_deg)
  {
    throw InputError("give either --gamma or --theta, not both");
  }
  if (theta_deg)
  {
    if (!(*theta_deg >= 0.0 && *theta_deg <= 180.0))
    {
      throw InputError("--theta must lie in [0, 180] degrees");
    }
    return BerryParameter::from_tilt(degrees_to_radians(*theta_deg));
  }
  const double g = gamma_deg.value_or(0.0);
  if (!(std::abs(g) <= 360.0))
  {
    throw InputError("--gamma must satisfy |gamma| <= 360 degrees");
  }
  return BerryParameter(degrees_to_radians(g));
}

int cmd_bell_angles(const BellAnglesOptions& opt, const GlobalOptions& global, std::ostream& out)
{
  const BerryParameter gamma = gamma_from(opt.gamma_deg, opt.theta_deg);
  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  const char sep = global.separator();
  os << join({"branch", "alpha1p", "beta1", "beta1p", "alpha1p_deg", "beta1_deg", "beta1p_deg", "s", "f1", "f2"}, sep)
     << '\n';
  const auto emit = [&](SignBranch branch, const char* name) {
    const PolarBellAngles a = bell_angles(gamma, branch);
    const SValue s = polar_s_function(gamma, a);
    os << join({name, format_number(a.alpha_prime), format_number(a.beta), format_number(a.beta_prime),
                format_number(radians_to_degrees(a.alpha_prime)), format_number(radians_to_degrees(a.beta)),
                format_number(radians_to_degrees(a.beta_prime)), format_number(s.s), format_number(s.f1),
                format_number(s.f2)},
               sep)
       << '\n';
  };
  if (opt.branch == "pp" || opt.branch == "both")
  {
    emit(SignBranch::F1NegF2Neg, "pp");
  }
  if (opt.branch == "pm" || opt.branch == "both")
  {
    emit(SignBranch::F1NegF2Pos, "pm");
  }
  sink.finish();
  return kSuccess;
}

// ----------------------------------------------------------- correlation

struct CorrelationOptions
{
  std::optional<double> gamma_deg;
  std::optional<double> theta_deg;
  std::vector<double> alpha{0.0, 0.0};
  std::vector<double> beta{0.0, 0.0};
};

int cmd_correlation(const CorrelationOptions& opt, const GlobalOptions& global, std::ostream& out)
{
  const BerryParameter gamma = gamma_from(opt.gamma_deg, opt.theta_deg);
  const MeasurementDirection a(degrees_to_radians(opt.alpha[0]), degrees_to_radians(opt.alpha[1]));
  const MeasurementDirection b(degrees_to_radians(opt.beta[0]), degrees_to_radians(opt.beta[1]));
  const PairState state = imprint_berry(singlet(), gamma);

  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  write_kv(os, "gamma", gamma.gamma());
  write_kv(os, "E_closed_form", correlation(gamma, a, b));
  write_kv(os, "E_matrix", pair_expectation(state, observable(a), observable(b)));
  const char* names[2] = {"+", "-"};
  for (Sign left : {Sign::Plus, Sign::Minus})
  {
    for (Sign right : {Sign::Plus, Sign::Minus})
    {
      const std::string key = std::string("P") + names[left == Sign::Minus] + names[right == Sign::Minus];
      write_kv(os, key, joint_probability(gamma, a, b, left, right));
    }
  }
  sink.finish();
  return kSuccess;
}

// ---------------------------------------------------------------- counts

struct CountsOptions
{
  double gamma_b_deg{0.0};
  std::string settings_path;
  bool compensated{false};
  std::uint64_t total{0};
  bool poisson{false};
};

std::vector<AnalyzerSetting> read_settings(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw InputError("cannot open settings file '" + path + "'");
  }
  std::vector<AnalyzerSetting> settings;
  std::string line;
  int number = 0;
  while (std::getline(in, line))
  {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
    {
      line.erase(hash);
    }
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    std::vector<double> values;
    std::string token;
    bool bad = false;
    while (fields >> token)
    {
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(v))
      {
        bad = true;
        break;
      }
      values.push_back(v);
    }
    if (values.empty() && !bad)
    {
      continue;
    }
    if (bad || values.size() != 3)
    {
      throw InputError(path + ":" + std::to_string(number) + ": expected 'chi_deg delta1_deg delta2_deg'");
    }
    settings.push_back(
        {degrees_to_radians(values[0]), MeasurementDirection(degrees_to_radians(values[1]), degrees_to_radians(values[2]))});
  }
  if (settings.empty())
  {
    throw InputError(path + ": no settings found");
  }
  return settings;
}

int cmd_counts(const CountsOptions& opt, const GlobalOptions& global, std::ostream& out)
{
  if (opt.total == 0)
  {
    throw InputError("--total must be at least 1");
  }
  if (opt.compensated == !opt.settings_path.empty())
  {
    throw InputError("give exactly one of --settings or --compensated");
  }
  const InterferometerConfig config = InterferometerConfig::from_geometric_phase(degrees_to_radians(opt.gamma_b_deg));
  std::vector<AnalyzerSetting> settings;
  if (opt.compensated)
  {
    const auto comp = compensated_settings(config);
    settings.assign(comp.begin(), comp.end());
  }
  else
  {
    settings = read_settings(opt.settings_path);
  }

  const NoiseModel model = opt.poisson ? NoiseModel::Poisson : NoiseModel::Multinomial;
  std::vector<CountRecord> records;
  for (std::size_t i = 0; i < settings.size(); ++i)
  {
    records.push_back(simulate_counts(config, settings[i].chi, settings[i].delta, opt.total, global.seed + i, model));
  }

  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  const char sep = global.separator();
  os << csv_header(sep) << sep << "E" << '\n';
  for (const CountRecord& r : records)
  {
    const std::string e = r.total() > 0 ? format_number(estimate_correlation(r)) : std::string("nan");
    os << to_csv_row(r, sep) << sep << e << '\n';
  }
  if (records.size() == 4)
  {
    const ChshEstimate chsh = estimate_chsh(std::span<const CountRecord, 4>(records.data(), 4));
    os << "# S" << sep << format_number(chsh.s) << sep << "sigma" << sep << format_number(chsh.sigma) << '\n';
  }
  sink.finish();
  return kSuccess;
}

// ------------------------------------------------------ verify-adiabatic

struct VerifyOptions
{
  std::vector<double> theta_deg{15.0, 30.0, 45.0, 60.0, 75.0, 90.0};
  std::vector<double> ratios{1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0, kDefaultAdiabaticRatio};
  double tolerance{5e-3};
  bool echo{false};
};

int cmd_verify_adiabatic(const VerifyOptions& opt, const GlobalOptions& global, std::ostream& out,
                         std::ostream& err)
{
  for (double r : opt.ratios)
  {
    if (!(r > 0.0))
    {
      throw InputError("--ratio values must be positive");
    }
  }
  for (double t : opt.theta_deg)
  {
    if (!(t >= 0.0 && t <= 90.0))
    {
      throw InputError("--theta values must lie in [0, 90] degrees");
    }
  }
  std::vector<double> ratios = opt.ratios;
  std::sort(ratios.begin(), ratios.end(), std::greater<>());

  OutputSink sink(global.out_path, out);
  std::ostream& os = sink.stream();
  const char sep = global.separator();
  std::vector<std::string> header{"ratio", "theta_deg", "gamma_analytic", "gamma_oracle", "error", "norm_defect"};
  if (opt.echo)
  {
    header.insert(header.end(), {"echo_gamma_oracle", "echo_geometric_error", "echo_dynamical_residue"});
  }
  os << join(header, sep) << '\n';

  bool ok = true;
  for (double theta_deg : opt.theta_deg)
  {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ratios.size(); ++i)
    {
      const FieldConfig config = FieldConfig::from_ratio(degrees_to_radians(theta_deg), ratios[i]);
      const EigenPhases analytic = analytic_phases(config);
      const EchoOracle oracle = single_period_oracle(config);
      const double error = angular_distance(oracle.phases.up.geometric, analytic.up.geometric);
      std::vector<std::string> fields{format_number(ratios[i]), format_number(theta_deg),
                                      format_number(analytic.up.geometric), format_number(oracle.phases.up.geometric),
                                      format_number(error), format_number(oracle.max_norm_defect)};
      // the theta = 0 loop has no geometric phase to shrink
      if (error > previous && error > 1e-9)
      {
        err << "error does not shrink with the ratio at theta = " << format_number(theta_deg) << " deg\n";
        ok = false;
      }
      previous = error;
      const bool smallest = i + 1 == ratios.size();
      if (smallest && error > opt.tolerance)
      {
        err << "theta = " << format_number(theta_deg) << " deg: error " << format_number(error)
            << " exceeds tolerance at ratio " << format_number(ratios[i]) << '\n';
        ok = false;
      }
      if (opt.echo)
      {
        const EigenPhases expected = spin_echo(config, EchoMode::FullTwoPeriods);
        const auto echo = spin_echo_oracle(config, EchoMode::FullTwoPeriods);
        const double g_err = angular_distance(echo->phases.up.geometric, expected.up.geometric);
        const double residue = std::abs(echo->phases.up.dynamical);
        fields.insert(fields.end(),
                      {format_number(echo->phases.up.geometric), format_number(g_err), format_number(residue)});
        if (smallest && (residue > opt.tolerance || g_err > 2.0 * opt.tolerance))
        {
          err << "theta = " << format_number(theta_deg) << " deg: echo residue " << format_number(residue)
              << " / geometric error " << format_number(g_err) << " out of tolerance\n";
          ok = false;
        }
      }
      os << join(fields, sep) << '\n';
    }
  }
  sink.finish();
  return ok ? kSuccess : kToleranceViolation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Berry phase in an entangled spin pair: phases, CHSH sweeps and neutron count simulation"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--out", global.out_path, "Write the report/CSV to this path instead of stdout");
  app.add_option("--seed", global.seed, "Base seed for count simulation");
  app.add_option("--format", global.format, "Table format")->check(CLI::IsMember({"csv", "tsv"}));

  PhasesOptions phases;
  auto* phases_cmd = app.add_subcommand("phases", "Analytic Berry/dynamical phases, spin echo and RK4 oracle check");
  phases_cmd->add_option("--theta", phases.theta_deg, "Field tilt in degrees")->required();
  phases_cmd->add_option("--ratio", phases.ratio, "w0/w1; runs the RK4 oracle when given");
  phases_cmd->add_option("--mode", phases.mode, "Echo mode")->check(CLI::IsMember({"full", "half"}));
  phases_cmd->add_option("--tol", phases.tolerance, "Oracle residual tolerance (rad)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-smax", "Maximal S versus Berry phase at zero azimuths (CSV)");
  sweep_cmd->add_option("--param", sweep.parameter, "Swept parameter")
      ->check(CLI::IsMember({"gamma", "theta", "ratio"}));
  sweep_cmd->add_option("--start", sweep.start, "Start value in degrees");
  sweep_cmd->add_option("--stop", sweep.stop, "Stop value in degrees");
  sweep_cmd->add_option("--points", sweep.points, "Number of points (>= 2)");
  sweep_cmd->add_option("--method", sweep.method, "S_max method")
      ->check(CLI::IsMember({"analytic", "grid", "both"}));
  sweep_cmd->add_option("--resolution", sweep.resolution_deg, "Grid resolution in degrees");
  sweep_cmd->add_option("--svg", sweep.svg_path, "Also write an SVG plot to this path");

  BellAnglesOptions bell;
  auto* bell_cmd = app.add_subcommand("bell-angles", "Polar Bell angles for a given Berry phase");
  bell_cmd->add_option("--gamma", bell.gamma_deg, "Berry phase in degrees");
  bell_cmd->add_option("--theta", bell.theta_deg, "Field tilt in degrees (alternative to --gamma)");
  bell_cmd->add_option("--branch", bell.branch, "Sign branch")->check(CLI::IsMember({"pp", "pm", "both"}));

  CorrelationOptions corr;
  auto* corr_cmd = app.add_subcommand("correlation", "Correlation and joint probabilities for two analyzers");
  corr_cmd->add_option("--gamma", corr.gamma_deg, "Berry phase in degrees");
  corr_cmd->add_option("--theta", corr.theta_deg, "Field tilt in degrees (alternative to --gamma)");
  corr_cmd->add_option("--alpha", corr.alpha, "Left analyzer: polar,azimuthal in degrees")->expected(2)->delimiter(',');
  corr_cmd->add_option("--beta", corr.beta, "Right analyzer: polar,azimuthal in degrees")->expected(2)->delimiter(',');

  CountsOptions counts;
  auto* counts_cmd = app.add_subcommand("counts", "Simulated interferometer counts and correlation estimates (CSV)");
  counts_cmd->add_option("--gamma-b", counts.gamma_b_deg, "Geometric phase gamma_B in degrees");
  counts_cmd->add_option("--settings", counts.settings_path, "Settings file: 'chi_deg delta1_deg delta2_deg' per line");
  counts_cmd->add_flag("--compensated", counts.compensated, "Use the four compensated CHSH settings");
  counts_cmd->add_option("--total", counts.total, "Events per setting")->required();
  counts_cmd->add_flag("--poisson", counts.poisson, "Independent Poisson channels instead of a multinomial split");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify-adiabatic", "RK4 Berry-phase oracle against the analytic phase");
  verify_cmd->add_option("--theta", verify.theta_deg, "Tilts in degrees")->delimiter(',');
  verify_cmd->add_option("--ratio", verify.ratios, "w0/w1 values")->delimiter(',');
  verify_cmd->add_option("--tol", verify.tolerance, "Tolerance at the smallest ratio (rad)");
  verify_cmd->add_flag("--echo", verify.echo, "Also run the two-period spin-echo oracle");

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    out << app.help();
    return kSuccess;
  }
  catch (const CLI::ParseError& e)
  {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try
  {
    if (phases_cmd->parsed())
    {
      return cmd_phases(phases, global, out, err);
    }
    if (sweep_cmd->parsed())
    {
      return cmd_sweep_smax(sweep, global, out);
    }
    if (bell_cmd->parsed())
    {
      return cmd_bell_angles(bell, global, out);
    }
    if (corr_cmd->parsed())
    {
      return cmd_correlation(corr, global, out);
    }
    if (counts_cmd->parsed())
    {
      return cmd_counts(counts, global, out);
    }
    if (verify_cmd->parsed())
    {
      return cmd_verify_adiabatic(verify, global, out, err);
    }
  }
  catch (const InputError& e)
  {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  catch (const std::invalid_argument& e)
  {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace berrybell::cli
