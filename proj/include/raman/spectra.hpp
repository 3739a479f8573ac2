#pragma once

// cw Raman spectra: Voigt line shapes, peak fitting, and conversion of fitted
// lines into phonon-mode parameters.

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "raman/error.hpp"
#include "raman/least_squares.hpp"

namespace raman {

struct Spectrum {
  std::vector<double> shift;   ///< Raman shift grid, cm^-1, strictly increasing
  std::vector<double> counts;  ///< non-negative intensity per grid point

  void validate() const;
};

struct VoigtPeak {
  double center = 0.0;   ///< cm^-1
  double gamma_l = 1.0;  ///< Lorentzian FWHM, cm^-1
  double sigma_g = 0.0;  ///< Gaussian standard deviation, cm^-1
  double area = 1.0;
};

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0.
std::complex<double> faddeeva(std::complex<double> z);

/// Area-normalized Voigt profile times the peak area.
double voigt_eval(double x, const VoigtPeak& peak);

/// FWHM of a Voigt profile (Olivero-Longbothum approximation, ~2e-4 relative).
double voigt_fwhm(const VoigtPeak& peak);

struct FitOptions {
  /// One instrument width for all peaks.
  bool shared_sigma_g = true;
  /// Hold every sigma_g at this value instead of fitting it.
  std::optional<double> fixed_sigma_g;
  bool fit_offset = true;
  LmOptions lm{};
};

struct PeakUncertainty {
  double center = 0.0;
  double gamma_l = 0.0;
  double sigma_g = 0.0;
  double area = 0.0;
};

struct FitResult {
  std::vector<VoigtPeak> peaks;
  std::vector<PeakUncertainty> errors;  ///< one-sigma, from the Gauss-Newton covariance
  double offset = 0.0;
  double chi2 = 0.0;  ///< residual sum of squares
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> cost_history;

  /// Area divided by its uncertainty for peak i (0 if undetermined).
  double area_significance(std::size_t i) const;
  /// Every peak area is at least three standard deviations from zero.
  bool confident() const;
};

/// Fit failure; `best` holds the best parameters found.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, FitResult best) : NumericalError(what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

FitResult fit_voigt_peaks(const Spectrum& spectrum, const std::vector<VoigtPeak>& guesses,
                          const FitOptions& options = {});

struct DerivedParams {
  std::array<double, 2> beta{};    ///< Raman weights, beta_1^2 + beta_2^2 = 1
  std::array<double, 2> delta{};   ///< detuning from the mean frequency, rad/ps
  std::array<double, 2> kappa{};   ///< energy decay rate, 1/ps
  std::array<double, 2> center{};  ///< line centers, cm^-1 (mode 1 is the higher one)
  /// Lifetimes assume purely lifetime-limited lines (no pure dephasing).
  bool assumes_no_pure_dephasing = true;

  double tau_ps(std::size_t j) const { return 1.0 / kappa.at(j); }
};

/// Mode 1 is the higher-frequency line. beta_j^2 is proportional to area;
/// kappa = 2 Gamma with Gamma = pi * FWHM (in THz).
DerivedParams derive_model_params(const std::array<VoigtPeak, 2>& peaks);

/// Converts a line width or shift in cm^-1 to THz.
double wavenumber_to_thz(double cm_inv);

/// Two-column text: shift (cm^-1) and counts; '#' starts a comment.
Spectrum read_spectrum(const std::filesystem::path& path);
Spectrum parse_spectrum(const std::string& text, const std::string& source = "<string>");

/// Peak guesses: one "center gamma_l sigma_g area" row per line.
std::vector<VoigtPeak> read_peak_guesses(const std::filesystem::path& path);

/// Sum of Voigt peaks plus offset on `grid`, with Gaussian noise of standard
/// deviation `noise_fraction * max(signal)`, clamped at zero.
Spectrum synthesize_spectrum(const std::vector<VoigtPeak>& peaks, const std::vector<double>& grid,
                             double offset, double noise_fraction, std::uint64_t seed);

/// Uniform grid [begin, end] with the given step.
std::vector<double> uniform_grid(double begin, double end, double step);

/// Human-readable fit report including derived beta and tau.
std::string format_fit_report(const FitResult& fit, const std::optional<DerivedParams>& derived);

/// `[system]` fragment with beta, delta and tau keys, ready to paste into a run config.
std::string format_config_fragment(const DerivedParams& derived);

}  // namespace raman
