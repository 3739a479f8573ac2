#pragma once

// Effective Raman write/read Hamiltonian and phonon bath for two collective
// vibrational modes sharing one Stokes and one anti-Stokes photon mode.
//
// Units: time in ps, angular frequencies and rates in rad/ps (1/ps).
// Frame: co-rotating at the mean vibrational frequency and at the
// Raman-resonant photon frequencies, so only the phonon beat (delta_1 - delta_2)
// and optional photon detunings remain.

#include <array>
#include <cstddef>
#include <numbers>
#include <vector>

#include "raman/hilbert.hpp"

namespace raman {

/// Fixed mode order of the four-mode space.
namespace mode {
inline constexpr std::size_t b1 = 0;
inline constexpr std::size_t b2 = 1;
inline constexpr std::size_t stokes = 2;
inline constexpr std::size_t anti_stokes = 3;
}  // namespace mode

/// The canonical (b1, b2, a_S, a_A) space with the given truncations.
HilbertSpace raman_space(const std::array<int, 4>& dims = {3, 3, 3, 3});

/// Speed of light in cm/ps, for cm^-1 <-> rad/ps conversions.
inline constexpr double kSpeedOfLightCmPerPs = 0.0299792458;

/// Half-width of every integration window, in pulse sigmas.
inline constexpr double kPulseWindowSigmas = 6.0;

enum class PulseRole { write, read };

struct PulseSpec {
  double t0_ps = 0.0;
  double sigma_ps = 0.085;
  PulseRole role = PulseRole::write;

  double window_begin() const { return t0_ps - kPulseWindowSigmas * sigma_ps; }
  double window_end() const { return t0_ps + kPulseWindowSigmas * sigma_ps; }
};

struct PhononMode {
  double delta = 0.0;  ///< detuning from the mean vibrational frequency (rad/ps)
  double beta = 0.0;   ///< Raman weight; beta_1^2 + beta_2^2 = 1
  double kappa = 1.0;  ///< energy decay rate (1/ps)

  double tau_ps() const { return 1.0 / kappa; }
};

/// Physical parameters of the effective model.
///
/// Couplings carry units of 1/ps: a single Gaussian pulse of width sigma
/// produces a squeezing (or swap) angle Lambda * sqrt(2 pi) * sigma.
struct SystemParams {
  std::array<PhononMode, 2> phonons{};
  double lambda_write_stokes = 0.104;
  double lambda_read_antistokes = 0.136;
  double lambda_fwm = 0.0;
  /// Total phase between the two vibrational amplitudes (write + read).
  double theta = std::numbers::pi / 6.0;
  /// Part of theta carried by the read term; the write term carries the rest.
  double theta_split = 0.0;
  double n_th = 0.04;
  PulseSpec write{0.0, 0.085, PulseRole::write};
  PulseSpec read{1.0, 0.085, PulseRole::read};
  double delta_stokes = 0.0;
  double delta_antistokes = 0.0;

  double theta_write() const { return theta - theta_split; }
  double theta_read() const { return theta_split; }

  /// Throws InvalidArgument describing the first violated constraint.
  void validate() const;

  /// Parameter set of the CS2 isotope experiment.
  static SystemParams cs2_defaults();
};

/// Pulse width sigma (ps) for a given intensity-envelope FWHM (ps).
double sigma_from_fwhm(double fwhm_ps);

/// Gaussian pulse envelope exp(-(t - t0)^2 / (2 sigma^2)); the carrier lives in the frame.
double envelope(double t_ps, const PulseSpec& pulse);

/// H(t) = free + G_w(t) write + G_r(t) read + G_w(t) G_r(t) fwm, each part Hermitian.
struct HamiltonianParts {
  Op free;
  Op write;
  Op read;
  Op fwm;

  Op at(double t_ps, const SystemParams& params) const;
};

HamiltonianParts hamiltonian_parts(const SystemParams& params, const HilbertSpace& space);

Op hamiltonian_at(double t_ps, const SystemParams& params, const HilbertSpace& space);

/// Thermal-bath jump operators sqrt(k(1+n)) b_j and sqrt(k n) b_j^dagger for both phonons.
std::vector<Op> collapse_operators(const SystemParams& params, const HilbertSpace& space);

/// Throws DimensionError unless `space` is a (b1, b2, a_S, a_A) space.
void require_raman_space(const HilbertSpace& space);

}  // namespace raman
