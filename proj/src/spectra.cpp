#include "raman/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "raman/model.hpp"

namespace raman {

namespace {

// Weideman's rational expansion of w(z) in the upper half plane.
class Weideman {
 public:
  static constexpr int kTerms = 36;

  Weideman() : scale_(std::sqrt(kTerms / std::numbers::sqrt2)) {
    constexpr int m = 2 * kTerms;
    constexpr int m2 = 2 * m;
    std::vector<double> f(m2, 0.0);
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double t = scale_ * std::tan(k * std::numbers::pi / m / 2.0);
      f[k + m] = std::exp(-t * t) * (scale_ * scale_ + t * t);
    }
    // fftshift, then the real part of the DFT for orders 1..N
    std::vector<double> shifted(m2);
    for (int i = 0; i < m2; ++i) shifted[i] = f[(i + m) % m2];
    for (int n = 1; n <= kTerms; ++n) {
      double re = 0.0;
      for (int j = 0; j < m2; ++j) re += shifted[j] * std::cos(2.0 * std::numbers::pi * j * n / m2);
      coeff_[kTerms - n] = re / m2;  // highest degree first
    }
  }

  std::complex<double> operator()(std::complex<double> z) const {
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> denom = scale_ - i * z;
    const std::complex<double> zz = (scale_ + i * z) / denom;
    std::complex<double> p = 0.0;
    for (double c : coeff_) p = p * zz + c;
    return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(std::numbers::pi)) / denom;
  }

 private:
  double scale_;
  std::array<double, kTerms> coeff_{};
};

const Weideman& weideman() {
  static const Weideman w;
  return w;
}

double lorentzian(double x, double center, double fwhm, double area) {
  const double hw = 0.5 * fwhm;
  const double dx = x - center;
  return area * hw / (std::numbers::pi * (dx * dx + hw * hw));
}

// Parameter layout of the least-squares problem (log-scaled positive widths/areas).
struct Layout {
  std::size_t peaks;
  bool shared_sigma;
  bool fit_sigma;
  bool fit_offset;

  std::size_t sigma_count() const { return fit_sigma ? (shared_sigma ? 1 : peaks) : 0; }
  std::size_t size() const { return 3 * peaks + sigma_count() + (fit_offset ? 1 : 0); }
  std::size_t sigma_index(std::size_t p) const { return 3 * peaks + (shared_sigma ? 0 : p); }
  std::size_t offset_index() const { return 3 * peaks + sigma_count(); }
};

constexpr double kMinSigma = 1e-6;

void unpack(const Layout& lay, const Eigen::VectorXd& x, const FitOptions& opt,
            std::vector<VoigtPeak>& peaks, double& offset) {
  peaks.resize(lay.peaks);
  for (std::size_t p = 0; p < lay.peaks; ++p) {
    peaks[p].center = x(3 * p);
    peaks[p].gamma_l = std::exp(x(3 * p + 1));
    peaks[p].area = std::exp(x(3 * p + 2));
    peaks[p].sigma_g = lay.fit_sigma ? std::exp(x(lay.sigma_index(p))) : *opt.fixed_sigma_g;
  }
  offset = lay.fit_offset ? x(lay.offset_index()) : 0.0;
}

}  // namespace

void Spectrum::validate() const {
  if (shift.size() != counts.size()) throw InvalidArgument("spectrum: grid and counts differ in length");
  if (shift.size() < 2) throw InvalidArgument("spectrum: need at least two points");
  for (std::size_t i = 1; i < shift.size(); ++i)
    if (!(shift[i] > shift[i - 1])) throw InvalidArgument("spectrum: grid is not strictly increasing");
  for (double c : counts)
    if (!(c >= 0.0)) throw InvalidArgument("spectrum: negative counts");
}

std::complex<double> faddeeva(std::complex<double> z) {
  if (z.imag() < 0.0) {
    // w(z) = 2 exp(-z^2) - w(-z) in the lower half plane
    return 2.0 * std::exp(-z * z) - weideman()(-z);
  }
  return weideman()(z);
}

double voigt_eval(double x, const VoigtPeak& peak) {
  if (peak.sigma_g <= 0.0) return lorentzian(x, peak.center, peak.gamma_l, peak.area);
  const double s = peak.sigma_g * std::numbers::sqrt2;
  const std::complex<double> z((x - peak.center) / s, 0.5 * peak.gamma_l / s);
  const double v = faddeeva(z).real() / (peak.sigma_g * std::sqrt(2.0 * std::numbers::pi));
  return peak.area * std::max(v, 0.0);
}

double voigt_fwhm(const VoigtPeak& peak) {
  const double fg = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * peak.sigma_g;
  const double fl = peak.gamma_l;
  return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
}

double FitResult::area_significance(std::size_t i) const {
  const double err = errors.at(i).area;
  if (!(err > 0.0) || !std::isfinite(err)) return 0.0;
  return peaks.at(i).area / err;
}

bool FitResult::confident() const {
  for (std::size_t i = 0; i < peaks.size(); ++i)
    if (area_significance(i) < 3.0) return false;
  return !peaks.empty();
}

FitResult fit_voigt_peaks(const Spectrum& spectrum, const std::vector<VoigtPeak>& guesses,
                          const FitOptions& options) {
  spectrum.validate();
  if (guesses.empty()) throw InvalidArgument("fit_voigt_peaks: need at least one peak guess");
  const double lo = spectrum.shift.front();
  const double hi = spectrum.shift.back();
  for (const auto& g : guesses) {
    if (g.center < lo || g.center > hi) {
      std::ostringstream os;
      os << "fit_voigt_peaks: guess center " << g.center << " outside the grid [" << lo << ", "
         << hi << "]";
      throw InvalidArgument(os.str());
    }
    if (!(g.gamma_l > 0.0) || !(g.area > 0.0))
      throw InvalidArgument("fit_voigt_peaks: guesses need positive width and area");
  }
  if (options.fixed_sigma_g && *options.fixed_sigma_g < 0.0)
    throw InvalidArgument("fit_voigt_peaks: fixed sigma_g must be >= 0");

  const Layout lay{guesses.size(), options.shared_sigma_g, !options.fixed_sigma_g.has_value(),
                   options.fit_offset};
  Eigen::VectorXd x0(lay.size());
  for (std::size_t p = 0; p < guesses.size(); ++p) {
    x0(3 * p) = guesses[p].center;
    x0(3 * p + 1) = std::log(guesses[p].gamma_l);
    x0(3 * p + 2) = std::log(guesses[p].area);
    if (lay.fit_sigma)
      x0(lay.sigma_index(p)) = std::log(std::max(guesses[p].sigma_g, 0.05 * guesses[p].gamma_l));
  }
  if (lay.fit_offset)
    x0(lay.offset_index()) = *std::min_element(spectrum.counts.begin(), spectrum.counts.end());

  const auto n = static_cast<Eigen::Index>(spectrum.shift.size());
  const ResidualFunction residual = [&](const Eigen::VectorXd& x) {
    std::vector<VoigtPeak> peaks;
    double offset = 0.0;
    unpack(lay, x, options, peaks, offset);
    for (auto& p : peaks) p.sigma_g = lay.fit_sigma ? std::max(p.sigma_g, kMinSigma) : p.sigma_g;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double model = offset;
      for (const auto& p : peaks) model += voigt_eval(spectrum.shift[i], p);
      r(i) = model - spectrum.counts[i];
    }
    return r;
  };

  const LmResult lm = levenberg_marquardt(residual, x0, options.lm);

  FitResult out;
  unpack(lay, lm.params, options, out.peaks, out.offset);
  out.chi2 = lm.cost;
  out.residual_rms = std::sqrt(lm.cost / static_cast<double>(n));
  out.iterations = lm.iterations;
  out.converged = lm.converged;
  out.message = lm.message;
  out.cost_history = lm.cost_history;

  // Covariance s^2 (J^T J)^-1 in fit coordinates, mapped through the log scalings.
  const Eigen::Index dof = std::max<Eigen::Index>(n - static_cast<Eigen::Index>(lay.size()), 1);
  const double s2 = lm.cost / static_cast<double>(dof);
  const Eigen::MatrixXd jtj = lm.jacobian.transpose() * lm.jacobian;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  const bool singular = cod.rank() < jtj.rows();
  const Eigen::MatrixXd cov = singular ? Eigen::MatrixXd() : Eigen::MatrixXd(s2 * cod.pseudoInverse());
  const auto sd = [&](std::size_t k) {
    if (singular) return std::numeric_limits<double>::infinity();
    return std::sqrt(std::max(cov(k, k), 0.0));
  };
  for (std::size_t p = 0; p < lay.peaks; ++p) {
    PeakUncertainty u;
    u.center = sd(3 * p);
    u.gamma_l = out.peaks[p].gamma_l * sd(3 * p + 1);
    u.area = out.peaks[p].area * sd(3 * p + 2);
    u.sigma_g = lay.fit_sigma ? out.peaks[p].sigma_g * sd(lay.sigma_index(p)) : 0.0;
    out.errors.push_back(u);
  }

  if (!lm.converged)
    throw FitError("fit_voigt_peaks: no convergence after " + std::to_string(lm.iterations) +
                       " iterations (residual rms " + std::to_string(out.residual_rms) + ")",
                   out);
  return out;
}

double wavenumber_to_thz(double cm_inv) { return cm_inv * kSpeedOfLightCmPerPs; }

DerivedParams derive_model_params(const std::array<VoigtPeak, 2>& input) {
  if (input[0].center == input[1].center)
    throw InvalidArgument("derive_model_params: the two peaks have identical centers");
  for (const auto& p : input)
    if (!(p.area > 0.0) || !(p.gamma_l > 0.0))
      throw InvalidArgument("derive_model_params: peaks need positive area and width");
  std::array<VoigtPeak, 2> peaks = input;
  if (peaks[1].center > peaks[0].center) std::swap(peaks[0], peaks[1]);

  DerivedParams out;
  const double total = peaks[0].area + peaks[1].area;
  const double mean = 0.5 * (peaks[0].center + peaks[1].center);
  for (std::size_t j = 0; j < 2; ++j) {
    out.center[j] = peaks[j].center;
    out.beta[j] = std::sqrt(peaks[j].area / total);
    out.delta[j] = 2.0 * std::numbers::pi * wavenumber_to_thz(peaks[j].center - mean);
    const double dephasing = std::numbers::pi * wavenumber_to_thz(peaks[j].gamma_l);  // Gamma
    out.kappa[j] = 2.0 * dephasing;
  }
  return out;
}

namespace {

std::vector<double> split_numbers(const std::string& line, const std::string& source, int lineno) {
  std::string cleaned = line;
  for (char& c : cleaned)
    if (c == ',' || c == ';' || c == '\t') c = ' ';
  std::istringstream is(cleaned);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ParseError(source, lineno, "not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Spectrum parse_spectrum(const std::string& text, const std::string& source) {
  Spectrum s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto nums = split_numbers(body, source, lineno);
    if (nums.size() != 2)
      throw ParseError(source, lineno, "expected 2 columns, found " + std::to_string(nums.size()));
    if (!s.shift.empty() && !(nums[0] > s.shift.back()))
      throw ParseError(source, lineno, "shift grid must be strictly increasing");
    if (!(nums[1] >= 0.0)) throw ParseError(source, lineno, "counts must be non-negative");
    s.shift.push_back(nums[0]);
    s.counts.push_back(nums[1]);
  }
  if (s.shift.size() < 2) throw ParseError(source, lineno, "spectrum needs at least two data rows");
  return s;
}

Spectrum read_spectrum(const std::filesystem::path& path) {
  return parse_spectrum(read_file(path), path.string());
}

std::vector<VoigtPeak> read_peak_guesses(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<VoigtPeak> out;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto nums = split_numbers(body, path.string(), lineno);
    if (nums.size() != 4)
      throw ParseError(path.string(), lineno, "expected 'center gamma_l sigma_g area'");
    out.push_back({nums[0], nums[1], nums[2], nums[3]});
  }
  return out;
}

std::vector<double> uniform_grid(double begin, double end, double step) {
  if (!(step > 0.0) || !(end > begin)) throw InvalidArgument("uniform_grid: bad range");
  const auto n = static_cast<std::size_t>(std::floor((end - begin) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = begin + static_cast<double>(i) * step;
  return out;
}

Spectrum synthesize_spectrum(const std::vector<VoigtPeak>& peaks, const std::vector<double>& grid,
                             double offset, double noise_fraction, std::uint64_t seed) {
  Spectrum s;
  s.shift = grid;
  s.counts.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = offset;
    for (const auto& p : peaks) v += voigt_eval(grid[i], p);
    s.counts[i] = v;
  }
  const double peak = *std::max_element(s.counts.begin(), s.counts.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_fraction * peak);
  if (noise_fraction > 0.0)
    for (double& c : s.counts) c = std::max(0.0, c + noise(rng));
  return s;
}

std::string format_fit_report(const FitResult& fit, const std::optional<DerivedParams>& derived) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "# Voigt fit\n";
  os << "converged = " << (fit.converged ? "true" : "false") << "  (" << fit.message << ", "
     << fit.iterations << " iterations)\n";
  os << "residual_rms = " << fit.residual_rms << "\n";
  os << "offset = " << fit.offset << "\n";
  os << "confident = " << (fit.confident() ? "true" : "false") << "\n\n";
  os << "peak  center_cm  gamma_l_cm  sigma_g_cm  area  area_err  area_over_err\n";
  for (std::size_t i = 0; i < fit.peaks.size(); ++i) {
    const auto& p = fit.peaks[i];
    os << i + 1 << "  " << p.center << "  " << p.gamma_l << "  " << p.sigma_g << "  " << p.area
       << "  " << fit.errors[i].area << "  " << fit.area_significance(i) << "\n";
  }
  if (derived) {
    os << "\n# derived phonon modes (mode 1 = higher frequency; lifetime-limited lines assumed)\n";
    os << "mode  center_cm  beta  delta_rad_per_ps  kappa_per_ps  tau_ps\n";
    for (std::size_t j = 0; j < 2; ++j)
      os << j + 1 << "  " << derived->center[j] << "  " << derived->beta[j] << "  "
         << derived->delta[j] << "  " << derived->kappa[j] << "  " << derived->tau_ps(j) << "\n";
  }
  return os.str();
}

std::string format_config_fragment(const DerivedParams& d) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "[system]\n";
  os << "beta1 = " << d.beta[0] << "\n";
  os << "delta1_rad_per_ps = " << d.delta[0] << "\n";
  os << "delta2_rad_per_ps = " << d.delta[1] << "\n";
  os << "tau1_ps = " << d.tau_ps(0) << "\n";
  os << "tau2_ps = " << d.tau_ps(1) << "\n";
  return os.str();
}

}  // namespace raman
